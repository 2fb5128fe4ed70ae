#pragma once

#include <functional>
#include <map>
#include <optional>

#include "reconf/recsa.hpp"

namespace reconf {

// Joining mechanism: a non-participant gathers passes from a majority of
// configuration members, initializes application state from their responses,
// then calls participate().
class JoiningCore {
public:
    struct Hooks {
        std::function<void()> on_reset_vars;
        // States attached to the majority passes; consolidation is delegated
        // to the application.
        std::function<void(const std::vector<AppState>&)> on_init_vars;
        std::function<void()> on_became_participant;
    };

    explicit JoiningCore(ProcessorId self) : self_(self) {}

    // One round of the joiner loop; no-op for participants. Returns the Join
    // requests to send.
    std::vector<std::pair<ProcessorId, JoinRequest>> tick(RecsaCore& sa);

    // Member side: reply to a Join request, or nothing.
    std::optional<JoinReply> on_join_request(const RecsaCore& sa,
                                             ProcessorId from,
                                             bool pass_query,
                                             const AppState& state) const;

    // Joiner side: store a pass reply.
    void on_pass(const RecsaCore& sa, ProcessorId from, const JoinReply& m);

    bool pass_from(ProcessorId j) const {
        auto it = pass_.find(j);
        return it != pass_.end() && it->second;
    }

    // Complete-collapse entry: no participant will ever broadcast, so the
    // joiner starts the reset itself (chsConfig() = ⊥ path). The caller
    // supplies link-layer evidence per trusted peer.
    std::function<bool(ProcessorId peer)> exchanged_with;

    Hooks hooks;

private:
    ProcessorId self_;
    bool in_joiner_branch_ = false;
    std::optional<ConfigValue> last_com_conf_;
    std::map<ProcessorId, bool> pass_;
    std::map<ProcessorId, AppState> state_;
};

}  // namespace reconf
