#include "reconf/vssmr.hpp"

#include <algorithm>

namespace reconf {

const VsRecord& VsCore::record_of(ProcessorId k) const {
    if (k == self_) return own_;
    static const VsRecord kDefault;
    auto it = peers_.find(k);
    return it == peers_.end() ? kDefault : it->second;
}

VsCore::CrdSets VsCore::compute_crd(
    const RecsaCore& sa, const std::map<ProcessorId, ProcessorId>& fd_crd) const {
    CrdSets out;
    ConfigValue cfg = sa.get_config();
    if (!cfg.is_set()) return out;
    const IdSet& conf = cfg.members();
    IdSet part = sa.fd_part();
    std::size_t quorum = conf.size() / 2;

    auto part_of = [&](ProcessorId k) -> IdSet {
        if (k == sa.self()) return part;
        auto it = sa.slots().find(k);
        return it == sa.slots().end() ? IdSet{} : it->second.fd_part;
    };
    auto crd_of = [&](ProcessorId k) -> ProcessorId {
        if (k == self_) return own_crd_;
        auto it = fd_crd.find(k);
        return it == fd_crd.end() ? kNoProcessor : it->second;
    };

    for (ProcessorId l : part.intersect(conf)) {
        if (!have_record(l)) continue;
        const VsRecord& st = record_of(l);
        if (st.propV.id.wid != l) continue;
        if (st.propV.set.size() <= quorum) continue;
        if (part_of(l).size() <= quorum) continue;
        if (!st.propV.set.contains(l)) continue;
        bool reciprocal = true;
        for (ProcessorId k : part) {
            bool in_view = st.propV.set.contains(k);
            bool trusts_back = part_of(k).contains(l);
            if (in_view != trusts_back) reciprocal = false;
        }
        if (!reciprocal) continue;
        if (st.status == VsStatus::Multicast &&
            (!(st.view == st.propV) || crd_of(l) != l))
            continue;
        if (st.status == VsStatus::Install && crd_of(l) != l) continue;
        out.seem.insert(l);
    }
    for (ProcessorId l : out.seem) {
        bool maximal = true;
        for (ProcessorId k : out.seem) {
            Cmp c = counter_cmp(record_of(k).propV.id, record_of(l).propV.id);
            if (c != Cmp::Less && c != Cmp::Equal) maximal = false;
        }
        if (maximal) out.val.insert(l);
    }
    return out;
}

void VsCore::set_suspend(bool v) {
    if (own_.suspend != v && hooks.on_suspend) hooks.on_suspend(v);
    own_.suspend = v;
}

void VsCore::set_reconf_ready(bool v) {
    if (own_.reconf_ready != v && hooks.on_reconf_ready)
        hooks.on_reconf_ready(v);
    own_.reconf_ready = v;
}

void VsCore::apply_batch(const std::map<ProcessorId, std::string>& batch) {
    std::vector<std::string> fresh;
    for (const auto& [sender, payload] : batch) {
        std::string entry = std::to_string(sender) + ":" + payload;
        if (std::find(own_.replica.log.begin(), own_.replica.log.end(), entry) ==
            own_.replica.log.end()) {
            own_.replica.log.push_back(entry);
            fresh.push_back(entry);
        }
    }
    if (!fresh.empty() && hooks.on_deliver)
        hooks.on_deliver(own_.view, own_.rnd, fresh);
}

ProcessorId VsCore::synch_source() const {
    // The consolidated state is the record with the highest ⟨view.ID, rnd⟩
    // among the proposed view's members.
    ProcessorId best = self_;
    for (ProcessorId j : own_.propV.set) {
        if (!have_record(j)) continue;
        const VsRecord& a = record_of(j);
        const VsRecord& b = record_of(best);
        Cmp c = counter_cmp(a.view.id, b.view.id);
        bool greater = c == Cmp::Greater ||
                       (c == Cmp::Equal && a.rnd > b.rnd) ||
                       (c == Cmp::Incomparable &&
                        label_tie_lt(b.view.id.lbl, a.view.id.lbl));
        if (greater) best = j;
    }
    return best;
}

void VsCore::install(const ViewTag& v) {
    own_.view = v;
    own_.status = VsStatus::Multicast;
    own_.rnd = 0;
    set_suspend(false);
    set_reconf_ready(false);
    if (hooks.on_view_install) hooks.on_view_install(v);
}

std::vector<std::pair<ProcessorId, VsMessage>> VsCore::tick(
    const RecsaCore& sa, const std::map<ProcessorId, ProcessorId>& fd_crd) {
    std::vector<std::pair<ProcessorId, VsMessage>> out;
    if (!sa.is_participant()) return out;

    ConfigValue cfg = sa.get_config();
    IdSet conf = cfg.is_set() ? cfg.members() : IdSet{};
    IdSet part = sa.fd_part();
    std::size_t quorum = conf.size() / 2;

    CrdSets crd = compute_crd(sa, fd_crd);
    last_val_crd_ = crd.val;
    bool no_crd = crd.val.size() != 1;
    own_.no_crd = no_crd;
    own_crd_ = crd.val.size() == 1 ? *crd.val.begin() : kNoProcessor;
    own_.admit = admit_joiners;
    if (own_crd_ != kNoProcessor) {
        last_crd_admit_ = record_of(own_crd_).admit;
    }

    bool self_crd = crd.val == IdSet{self_};
    if (self_crd && own_.status == VsStatus::Multicast && own_.reconf_ready) {
        set_reconf_ready(eval_config());
        set_suspend(own_.reconf_ready);
    } else if (!self_crd && crd.val.size() == 1 &&
               (record_of(own_crd_).status == VsStatus::Propose ||
                record_of(own_crd_).status == VsStatus::Install)) {
        set_reconf_ready(false);
        set_suspend(false);
    }
    if (!sa.no_reco()) set_suspend(true);

    // View proposal.
    bool majority_trusted = !conf.empty() && part.intersect(conf).size() > quorum;
    bool no_crd_majority = false;
    if (no_crd) {
        std::size_t votes = 0;
        for (ProcessorId k : part) {
            IdSet kp = k == self_ ? part : [&] {
                auto it = sa.slots().find(k);
                return it == sa.slots().end() ? IdSet{} : it->second.fd_part;
            }();
            if (kp.contains(self_) && record_of(k).no_crd) ++votes;
        }
        no_crd_majority = votes > quorum;
    }
    bool drift = self_crd && !(part == own_.propV.set);
    if (drift) {
        std::size_t followers = 0;
        for (ProcessorId k : part)
            if (record_of(k).propV == own_.propV) ++followers;
        drift = followers > quorum;
    }

    if (majority_trusted && ((no_crd && no_crd_majority) || drift) &&
        sa.no_reco()) {
        std::optional<CounterTriple> ct = request_counter();
        if (ct) {
            own_.status = VsStatus::Propose;
            own_.propV = ViewTag{*ct, part};
        }
    } else if (self_crd) {
        bool view_unison = true;
        for (ProcessorId j : own_.view.set) {
            const VsRecord& st = record_of(j);
            if (!(st.view == own_.view) || st.status != own_.status ||
                st.rnd != own_.rnd)
                view_unison = false;
        }
        bool propose_unison = own_.status != VsStatus::Multicast;
        if (propose_unison) {
            for (ProcessorId j : own_.propV.set) {
                const VsRecord& st = record_of(j);
                if (!(st.propV == own_.propV) || st.status != VsStatus::Propose)
                    propose_unison = false;
            }
        }
        if (view_unison || propose_unison) {
            if (own_.status == VsStatus::Multicast && !own_.reconf_ready) {
                apply_batch(own_.msg);
                set_suspend(eval_config());
                bool all_suspended = true;
                for (ProcessorId k : own_.view.set)
                    if (!record_of(k).suspend) all_suspended = false;
                set_reconf_ready(all_suspended);
                if (!own_.reconf_ready && sa.no_reco()) {
                    std::optional<std::string> in = fetch();
                    own_.input = in;
                    if (in && hooks.on_fetch) hooks.on_fetch(*in);
                    own_.msg.clear();
                    for (ProcessorId j : own_.view.set) {
                        const VsRecord& st = record_of(j);
                        if (st.input) own_.msg[j] = *st.input;
                    }
                    own_.rnd += 1;
                    if (hooks.on_round) hooks.on_round(own_.rnd);
                }
            } else if (own_.status == VsStatus::Propose) {
                ProcessorId src = synch_source();
                const VsRecord& base = record_of(src);
                own_.replica = base.replica;
                own_.msg = base.msg;
                own_.status = VsStatus::Install;
            } else if (own_.status == VsStatus::Install) {
                install(own_.propV);
            }
        }
    } else if (crd.val.size() == 1 && own_crd_ != self_) {
        const VsRecord& st = record_of(own_crd_);
        bool follow = st.rnd == 0 || own_.rnd < st.rnd || !(st.view == st.propV);
        if (follow) {
            if (st.status == VsStatus::Multicast && !own_.suspend) {
                bool suspend_before = own_.suspend;
                ViewTag view_before = own_.view;
                own_ = st;  // full replication, including the suspend flag
                if (suspend_before != own_.suspend && hooks.on_suspend)
                    hooks.on_suspend(own_.suspend);
                if (!(view_before == own_.view) && hooks.on_view_install)
                    hooks.on_view_install(own_.view);
                apply_batch(st.msg);
                if (!st.suspend) {
                    std::optional<std::string> in = fetch();
                    own_.input = in;
                    if (in && hooks.on_fetch) hooks.on_fetch(*in);
                }
            } else if (st.status == VsStatus::Install) {
                // Adopt the consolidated record. The suspend flag is governed
                // by the update lines above, not by the replication; copying
                // it here would re-freeze a follower that already cleared it.
                bool suspend = own_.suspend;
                own_ = st;
                own_.suspend = suspend;
                // Flush: the consolidated last-round messages reach members
                // that had not delivered them, still within the old view.
                apply_batch(st.msg);
            } else if (st.status == VsStatus::Propose) {
                own_.status = VsStatus::Propose;
                own_.propV = st.propV;
            }
        }
    }

    IdSet send_set = crd.seem;
    if (self_crd) send_set = send_set.unite(own_.propV.set);
    if (no_crd || own_.status == VsStatus::Propose)
        send_set = send_set.unite(sa.fd_trusted());
    for (ProcessorId j : send_set)
        if (j != self_) out.emplace_back(j, VsMessage{own_});
    return out;
}

void VsCore::on_receive(ProcessorId from, const VsMessage& m) {
    if (from == self_) return;
    peers_[from] = m.state;
}

}  // namespace reconf
