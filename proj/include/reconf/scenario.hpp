#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "reconf/ids.hpp"
#include "reconf/netsim.hpp"
#include "reconf/node.hpp"

namespace reconf {

struct ScenarioEvent {
    Step step = 0;
    std::string kind;
    std::vector<std::string> args;
    int line = 0;
};

// Parsed scenario file: topology, parameters, event script, checker list.
struct Scenario {
    std::string name;
    std::vector<ProcessorId> nodes;
    int n_bound = 0;
    int cap = 2;
    uint64_t seed = 1;
    Step budget = 10000;
    Step window = 0;
    FdMode fd_mode = FdMode::Admissible;
    Node::Options modules;
    uint32_t loss_permille = 150;
    uint32_t dup_permille = 60;
    bool init_converged = false;
    IdSet init_config;
    std::vector<ScenarioEvent> events;  // step-sorted
    std::vector<std::string> checkers;

    static Scenario parse(std::istream& in, const std::string& name);
    static Scenario parse_file(const std::string& path);
};

// Parse or validation failure; the message carries the line number.
class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace reconf
