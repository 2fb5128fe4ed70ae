#include "reconf/recma.hpp"

namespace reconf {

IdSet RecmaCore::core(const RecsaCore& sa) const {
    IdSet part = sa.fd_part();
    bool first = true;
    IdSet acc;
    for (ProcessorId j : part) {
        IdSet pj = j == sa.self() ? part : [&] {
            auto it = sa.slots().find(j);
            return it == sa.slots().end() ? IdSet{} : it->second.fd_part;
        }();
        if (first) {
            acc = pj;
            first = false;
        } else {
            acc = acc.intersect(pj);
        }
    }
    return first ? IdSet{} : acc;
}

void RecmaCore::flush_flags() {
    no_maj_.clear();
    need_reconf_.clear();
}

void RecmaCore::tick(RecsaCore& sa) {
    outbox_.clear();
    IdSet part = sa.fd_part();
    if (!part.contains(self_)) return;

    ConfigValue cur_conf = sa.get_config();
    need_reconf_[self_] = false;
    no_maj_[self_] = false;
    if (!(prev_config_ == cur_conf) && !prev_config_.is_bottom()) flush_flags();

    if (sa.no_reco()) {
        prev_config_ = cur_conf;
        if (cur_conf.is_set()) {
            std::size_t quorum = cur_conf.members().size() / 2 + 1;
            std::size_t trusted_members =
                cur_conf.members().intersect(sa.fd_trusted()).size();
            if (trusted_members < quorum) no_maj_[self_] = true;

            IdSet c = core(sa);
            bool core_agrees = c.size() > 1;
            for (ProcessorId k : c) core_agrees = core_agrees && no_maj(k);
            if (no_maj(self_) && core_agrees) {
                if (hooks.on_trigger) hooks.on_trigger("collapse", sa.fd_part());
                sa.estab(sa.fd_part());
                flush_flags();
            } else {
                bool wants;
                const char* cause;
                if (delicate_override) {
                    wants = delicate_override();
                    cause = "delicate";
                } else {
                    need_reconf_[self_] = eval_conf(cur_conf);
                    std::size_t votes = 0;
                    for (ProcessorId j :
                         cur_conf.members().intersect(sa.fd_trusted()))
                        if (need_reconf(j)) ++votes;
                    wants = need_reconf(self_) &&
                            2 * votes > cur_conf.members().size();
                    cause = "prediction";
                }
                if (wants) {
                    if (hooks.on_trigger) hooks.on_trigger(cause, sa.fd_part());
                    sa.estab(sa.fd_part());
                    flush_flags();
                }
            }
        }
    }

    RecmaMessage m{no_maj(self_), need_reconf(self_)};
    for (ProcessorId j : sa.fd_part())
        if (j != self_) outbox_.emplace_back(j, m);
}

void RecmaCore::on_receive(const RecsaCore& sa, ProcessorId j,
                           const RecmaMessage& m) {
    if (!sa.fd_part().contains(self_)) return;
    no_maj_[j] = m.no_maj;
    need_reconf_[j] = m.need_reconf;
}

}  // namespace reconf
