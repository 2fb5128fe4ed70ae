#include "reconf/joining.hpp"

namespace reconf {

std::vector<std::pair<ProcessorId, JoinRequest>> JoiningCore::tick(RecsaCore& sa) {
    std::vector<std::pair<ProcessorId, JoinRequest>> out;
    if (sa.fd_part().contains(self_)) {
        in_joiner_branch_ = false;
        return out;
    }
    if (!in_joiner_branch_) {
        // Entry into the non-participant branch: reset passes and the
        // application variables exactly once.
        in_joiner_branch_ = true;
        pass_.clear();
        state_.clear();
        last_com_conf_.reset();
        if (hooks.on_reset_vars) hooks.on_reset_vars();
    }

    ConfigValue com_conf = sa.get_config();
    if (last_com_conf_ && !(com_conf == *last_com_conf_)) {
        // Passes collected under an older configuration value are void.
        pass_.clear();
        state_.clear();
    }
    last_com_conf_ = com_conf;

    if (sa.no_reco() && com_conf.is_set()) {
        std::vector<AppState> granted;
        std::size_t votes = 0;
        for (ProcessorId j : com_conf.members().intersect(sa.fd_trusted())) {
            if (pass_from(j)) {
                ++votes;
                granted.push_back(state_[j]);
            }
        }
        if (2 * votes > com_conf.members().size()) {
            if (hooks.on_init_vars) hooks.on_init_vars(granted);
            if (sa.participate()) {
                if (hooks.on_became_participant) hooks.on_became_participant();
                in_joiner_branch_ = false;
                return out;
            }
        }
    } else if (sa.no_reco() && sa.fd_part().empty() && !sa.received_any() &&
               exchanged_with) {
        // Complete collapse: every trusted peer has a running link and a
        // completed token exchange, yet no participant traffic ever arrived.
        bool all_exchanged = true;
        for (ProcessorId j : sa.fd_trusted()) {
            if (j == self_) continue;
            all_exchanged = all_exchanged && exchanged_with(j);
        }
        if (all_exchanged) {
            if (hooks.on_init_vars) hooks.on_init_vars({});
            if (sa.participate()) {
                if (hooks.on_became_participant) hooks.on_became_participant();
                in_joiner_branch_ = false;
                return out;
            }
        }
    }

    for (ProcessorId j : sa.fd_trusted())
        if (j != self_) out.emplace_back(j, JoinRequest{});
    return out;
}

std::optional<JoinReply> JoiningCore::on_join_request(const RecsaCore& sa,
                                                      ProcessorId from,
                                                      bool pass_query,
                                                      const AppState& state) const {
    // Requests are honored only from trusted non-participants, and only by
    // quiescent configuration members.
    if (!sa.fd_trusted().contains(from) || sa.fd_part().contains(from))
        return std::nullopt;
    ConfigValue cfg = sa.config();
    if (!cfg.is_set() || !cfg.members().contains(self_) || !sa.no_reco())
        return std::nullopt;
    return JoinReply{pass_query, state};
}

void JoiningCore::on_pass(const RecsaCore& sa, ProcessorId from,
                          const JoinReply& m) {
    if (sa.fd_part().contains(self_)) return;  // participants ignore strays
    pass_[from] = m.pass;
    state_[from] = m.state;
}

}  // namespace reconf
