#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "reconf/harness.hpp"

namespace {

int run_command(const std::string& scenario_path,
                std::optional<uint64_t> seed, std::optional<int64_t> budget,
                const std::vector<std::string>& checkers,
                const std::string& trace_path) {
    reconf::Scenario sc;
    try {
        sc = reconf::Scenario::parse_file(scenario_path);
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    }
    reconf::Harness::Overrides o;
    o.seed = seed;
    if (budget) o.budget = *budget;
    o.checkers = checkers;
    try {
        auto result = reconf::Harness::run(sc, o);
        if (!trace_path.empty()) {
            std::ofstream out(trace_path);
            if (!out) {
                std::cerr << "cannot write trace to " << trace_path << "\n";
                return 2;
            }
            result.trace.write_tsv(out);
        }
        std::cout << "scenario " << result.scenario.name << " seed "
                  << result.scenario.seed << " steps " << result.scenario.budget
                  << " digest " << std::hex << result.trace_digest << std::dec
                  << "\n";
        for (const auto& v : result.verdicts) {
            std::cout << (v.pass ? "PASS " : "FAIL ") << v.checker;
            for (const auto& [k, val] : v.measured)
                std::cout << " " << k << "=" << val;
            if (!v.pass) std::cout << " | " << v.witness;
            std::cout << "\n";
        }
        return result.all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-stabilizing reconfiguration protocol simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string trace_path;
    std::vector<std::string> checkers;
    std::optional<uint64_t> seed;
    std::optional<int64_t> budget;

    CLI::App* run = app.add_subcommand("run", "run a scenario file");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--budget", budget, "override the step budget");
    run->add_option("--trace", trace_path, "write the trace TSV here");
    run->add_option("--checkers", checkers, "override the checker list")
        ->delimiter(',');

    CLI::App* list = app.add_subcommand("checkers", "list known checkers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        for (const auto& name : reconf::checker_names())
            std::cout << name << "\n";
        return 0;
    }
    return run_command(scenario_path, seed, budget, checkers, trace_path);
}
