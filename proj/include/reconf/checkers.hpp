#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reconf/scenario.hpp"
#include "reconf/trace.hpp"

namespace reconf {

struct Verdict {
    std::string checker;
    bool pass = false;
    std::string witness;  // fail verdicts always carry one
    std::map<std::string, int64_t> measured;
};

struct FinalNode {
    bool live = false;
    bool participant = false;
    ConfigValue config;
    Proposal prp;
    unsigned stale_mask = 0;
    bool tainted = false;
    std::string app_log;
    ProcessorId vs_crd = kNoProcessor;
};

struct RunContext {
    const Scenario* scenario = nullptr;
    IdSet final_live;
    std::map<ProcessorId, FinalNode> finals;
    Step budget = 0;
};

bool checker_exists(const std::string& name);
std::vector<std::string> checker_names();
Verdict run_checker(const std::string& name, const Trace& trace,
                    const RunContext& ctx);

}  // namespace reconf
