#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reconf/checkers.hpp"
#include "reconf/scenario.hpp"
#include "reconf/trace.hpp"

namespace reconf {

// Runs scenarios, evaluates property checkers, and emits traces and verdicts.
class Harness {
public:
    struct Overrides {
        std::optional<uint64_t> seed;
        std::optional<Step> budget;
        std::vector<std::string> checkers;
    };

    struct RunResult {
        Scenario scenario;
        Trace trace;
        IdSet final_live;
        std::map<ProcessorId, FinalNode> finals;
        std::vector<Verdict> verdicts;
        bool all_pass = true;
        uint64_t trace_digest = 0;
    };

    static RunResult run(Scenario sc, const Overrides& overrides = {});

private:
    struct Execution {
        Trace trace;
        IdSet final_live;
        std::map<ProcessorId, FinalNode> finals;
    };
    static Execution run_once(const Scenario& sc);
};

}  // namespace reconf
