#include "reconf/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace reconf {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') break;
        out.push_back(tok);
    }
    return out;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
    throw ScenarioParseError(name + ":" + std::to_string(line) + ": " + what);
}

int64_t to_int(const std::string& name, int line, const std::string& s) {
    try {
        std::size_t pos = 0;
        int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) fail(name, line, "bad integer '" + s + "'");
        return v;
    } catch (const ScenarioParseError&) {
        throw;
    } catch (...) {
        fail(name, line, "bad integer '" + s + "'");
    }
}

bool to_bool(const std::string& name, int line, const std::string& s) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    fail(name, line, "bad flag '" + s + "' (want on/off)");
}

}  // namespace

Scenario Scenario::parse(std::istream& in, const std::string& name) {
    Scenario sc;
    sc.name = name;
    std::string line;
    int ln = 0;
    // Event kinds whose first argument is a processor id (or "all" where the
    // knob applies to every active processor).
    const std::vector<std::string> proc_events = {
        "crash",        "join",         "estab",       "pass",
        "evalconf",     "evalconfig",   "admit",       "input",
        "increment",    "inject-config", "inject-prp", "inject-flags",
        "inject-taint", "inject-counterseq", "inject-label"};
    const std::vector<std::string> all_ok = {"pass", "evalconf", "evalconfig",
                                             "admit"};

    while (std::getline(in, line)) {
        ++ln;
        std::vector<std::string> tok = tokenize(line);
        if (tok.empty()) continue;
        const std::string& key = tok[0];
        auto need = [&](std::size_t n) {
            if (tok.size() < n + 1)
                fail(name, ln, key + " expects at least " +
                                   std::to_string(n) + " arguments");
        };
        if (key == "nodes") {
            need(1);
            for (std::size_t i = 1; i < tok.size(); ++i)
                sc.nodes.push_back(
                    static_cast<ProcessorId>(to_int(name, ln, tok[i])));
        } else if (key == "N") {
            need(1);
            sc.n_bound = static_cast<int>(to_int(name, ln, tok[1]));
        } else if (key == "cap") {
            need(1);
            sc.cap = static_cast<int>(to_int(name, ln, tok[1]));
            if (sc.cap < 1) fail(name, ln, "cap must be positive");
        } else if (key == "seed") {
            need(1);
            sc.seed = static_cast<uint64_t>(to_int(name, ln, tok[1]));
        } else if (key == "budget") {
            need(1);
            sc.budget = to_int(name, ln, tok[1]);
        } else if (key == "window") {
            need(1);
            sc.window = to_int(name, ln, tok[1]);
        } else if (key == "fd") {
            need(1);
            if (tok[1] == "admissible")
                sc.fd_mode = FdMode::Admissible;
            else if (tok[1] == "unreliable")
                sc.fd_mode = FdMode::Unreliable;
            else
                fail(name, ln, "fd mode must be admissible or unreliable");
        } else if (key == "modules") {
            sc.modules.recma = sc.modules.joining = false;
            for (std::size_t i = 1; i < tok.size(); ++i) {
                if (tok[i] == "recma") sc.modules.recma = true;
                else if (tok[i] == "joining") sc.modules.joining = true;
                else if (tok[i] == "labels") sc.modules.labels = true;
                else if (tok[i] == "counters") sc.modules.counters = true;
                else if (tok[i] == "vs") sc.modules.vs = true;
                else if (tok[i] == "recsa") { /* always on */ }
                else fail(name, ln, "unknown module '" + tok[i] + "'");
            }
            if (sc.modules.vs) sc.modules.counters = true;
            if (sc.modules.counters) sc.modules.labels = true;
        } else if (key == "b") {
            need(1);
            sc.modules.seqn_bits = static_cast<int>(to_int(name, ln, tok[1]));
        } else if (key == "gapfactor") {
            need(1);
            sc.modules.gap_factor = static_cast<int>(to_int(name, ln, tok[1]));
        } else if (key == "loss") {
            need(1);
            sc.loss_permille = static_cast<uint32_t>(to_int(name, ln, tok[1]));
        } else if (key == "dup") {
            need(1);
            sc.dup_permille = static_cast<uint32_t>(to_int(name, ln, tok[1]));
        } else if (key == "init") {
            need(1);
            if (tok[1] == "cold") {
                sc.init_converged = false;
            } else if (tok[1] == "converged") {
                sc.init_converged = true;
                for (std::size_t i = 2; i < tok.size(); ++i)
                    sc.init_config.insert(
                        static_cast<ProcessorId>(to_int(name, ln, tok[i])));
            } else {
                fail(name, ln, "init must be cold or converged");
            }
        } else if (key == "checkers") {
            for (std::size_t i = 1; i < tok.size(); ++i)
                sc.checkers.push_back(tok[i]);
        } else if (key == "at") {
            need(2);
            ScenarioEvent ev;
            ev.step = to_int(name, ln, tok[1]);
            ev.kind = tok[2];
            ev.args.assign(tok.begin() + 3, tok.end());
            ev.line = ln;
            if (ev.step < 0) fail(name, ln, "event step must be >= 0");
            sc.events.push_back(ev);
        } else {
            fail(name, ln, "unknown directive '" + key + "'");
        }
    }

    if (sc.nodes.empty()) fail(name, ln, "scenario declares no nodes");
    if (sc.n_bound == 0) sc.n_bound = static_cast<int>(sc.nodes.size());
    std::stable_sort(sc.events.begin(), sc.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) {
                         return a.step < b.step;
                     });

    // Validate processor references.
    IdSet declared(std::vector<ProcessorId>(sc.nodes.begin(), sc.nodes.end()));
    for (const ScenarioEvent& ev : sc.events) {
        bool takes_proc = std::find(proc_events.begin(), proc_events.end(),
                                    ev.kind) != proc_events.end();
        if (!takes_proc) continue;
        if (ev.args.empty())
            fail(name, ev.line, ev.kind + " needs a processor id");
        if (ev.args[0] == "all") {
            if (std::find(all_ok.begin(), all_ok.end(), ev.kind) == all_ok.end())
                fail(name, ev.line, ev.kind + " does not accept 'all'");
            continue;
        }
        ProcessorId p =
            static_cast<ProcessorId>(to_int(name, ev.line, ev.args[0]));
        if (!declared.contains(p))
            fail(name, ev.line,
                 "event references undeclared processor " + std::to_string(p));
    }
    if (sc.init_converged) {
        if (sc.init_config.empty())
            sc.init_config =
                IdSet(std::vector<ProcessorId>(sc.nodes.begin(), sc.nodes.end()));
        for (ProcessorId p : sc.init_config)
            if (!declared.contains(p))
                fail(name, 0, "init converged references undeclared processor " +
                                  std::to_string(p));
    }
    return sc;
}

Scenario Scenario::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open scenario file " + path);
    return parse(in, path);
}

}  // namespace reconf
