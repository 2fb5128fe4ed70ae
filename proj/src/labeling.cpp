#include "reconf/labeling.hpp"

#include <algorithm>

namespace reconf {

bool LabelingCore::is_member(const RecsaCore& sa) const {
    ConfigValue c = sa.config();
    return c.is_set() && c.members().contains(self_);
}

bool LabelingCore::structures_match(const IdSet& members) const {
    if (!(conf_ == members)) return false;
    if (max_.size() != members.size() || stored_.size() != members.size())
        return false;
    for (ProcessorId j : members)
        if (!max_.count(j) || !stored_.count(j)) return false;
    return true;
}

void LabelingCore::rebuild_for(const IdSet& members) {
    conf_ = members;
    v_ = static_cast<int>(members.size());
    m_ = cap_ * std::max(0, v_ - 1);
    k_ = own_queue_cap();
    d_ = k_ * (own_queue_cap() + 1);
    std::map<ProcessorId, LabelPair> new_max;
    for (ProcessorId j : members) new_max[j] = max_.count(j) ? max_[j] : LabelPair{};
    max_ = std::move(new_max);
    stored_.clear();
    for (ProcessorId j : members) stored_[j] = {};
}

void LabelingCore::management_tick(const RecsaCore& sa) {
    if (!sa.no_reco()) return;
    ConfigValue cfg = sa.get_config();
    if (!cfg.is_set() || !cfg.members().contains(self_)) return;
    if (structures_match(cfg.members())) return;

    LabelPair old_own = max_.count(self_) ? max_[self_] : LabelPair{};
    rebuild_for(cfg.members());
    if (hooks.on_queue_flush) hooks.on_queue_flush();
    clean_max();
    // Self-delivery ⟨⊥, max[i], p_i⟩ re-derives the local maximum.
    label_receipt_action(LabelPair{}, clean_lp(old_own), self_);
}

LabelPair LabelingCore::clean_lp(const LabelPair& x) const {
    for (const auto& f : {x.ml, x.cl})
        if (f && !conf_.contains(f->creator)) return LabelPair{};
    return x;
}

void LabelingCore::clean_max() {
    for (auto& [j, lp] : max_) lp = clean_lp(lp);
}

std::optional<std::pair<ProcessorId, LabelMessage>> LabelingCore::transmit_tick(
    const RecsaCore& sa) {
    if (!sa.no_reco() || !is_member(sa)) return std::nullopt;
    if (!structures_match(sa.get_config().members())) return std::nullopt;
    std::vector<ProcessorId> peers;
    for (ProcessorId j : conf_)
        if (j != self_) peers.push_back(j);
    if (peers.empty()) return std::nullopt;
    ProcessorId dst = peers[transmit_cursor_++ % peers.size()];
    max_[self_] = clean_lp(max_[self_]);
    max_[dst] = clean_lp(max_[dst]);
    return std::make_pair(dst, LabelMessage{max_[self_], max_[dst]});
}

void LabelingCore::on_receive(const RecsaCore& sa, ProcessorId from,
                              const LabelMessage& m) {
    if (!sa.no_reco() || !is_member(sa)) return;
    if (!structures_match(sa.get_config().members())) return;
    if (!conf_.contains(from) || from == self_) return;
    clean_max();
    label_receipt_action(clean_lp(m.sent_max), clean_lp(m.last_sent), from);
}

std::deque<LabelPair>* LabelingCore::queue_for(const EpochLabel& l) {
    auto it = stored_.find(l.creator);
    return it == stored_.end() ? nullptr : &it->second;
}

bool LabelingCore::find_to_front(std::deque<LabelPair>& q, const EpochLabel& ml) {
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].ml && *q[i].ml == ml) {
            if (i != 0) {
                LabelPair lp = q[i];
                q.erase(q.begin() + i);
                q.push_front(lp);
            }
            return true;
        }
    }
    return false;
}

void LabelingCore::add_front(std::deque<LabelPair>& q, LabelPair lp,
                             std::size_t cap) {
    q.push_front(std::move(lp));
    while (q.size() > cap) q.pop_back();
}

bool LabelingCore::stale_info() const {
    for (const auto& [j, q] : stored_) {
        int legit_count = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const LabelPair& lp = q[i];
            if (!lp.ml) return true;  // void records do not belong in queues
            if (lp.ml->creator != j) return true;
            if (lp.legit()) ++legit_count;
            for (std::size_t i2 = i + 1; i2 < q.size(); ++i2)
                if (q[i2].ml && *q[i2].ml == *lp.ml) return true;  // double
        }
        if (legit_count > 1) return true;
    }
    return false;
}

void LabelingCore::empty_all_queues() {
    for (auto& [j, q] : stored_) q.clear();
    if (hooks.on_queue_flush) hooks.on_queue_flush();
}

EpochLabel LabelingCore::next_label() {
    // Antistings cover the stings of every ml (and, space permitting, cl)
    // stored in the own queue, so the new label dominates all of them; the
    // sting avoids every stored Antisting so no stored label dominates it.
    const std::deque<LabelPair>& own = stored_[self_];
    IdSet anti;
    IdSet banned;
    for (const LabelPair& lp : own) {
        if (lp.ml) {
            if (static_cast<int>(anti.size()) < k_) anti.insert(lp.ml->sting);
            banned = banned.unite(lp.ml->antistings);
        }
    }
    for (const LabelPair& lp : own) {
        if (lp.cl) {
            if (static_cast<int>(anti.size()) < k_) anti.insert(lp.cl->sting);
            banned = banned.unite(lp.cl->antistings);
        }
    }
    for (int c = 1; static_cast<int>(anti.size()) < k_ && c <= d_; ++c)
        if (!anti.contains(c)) anti.insert(c);
    int sting = 0;
    for (int c = 1; c <= d_; ++c) {
        if (!banned.contains(c) && !anti.contains(c)) {
            sting = c;
            break;
        }
    }
    if (sting == 0)
        throw std::runtime_error("label sting domain exhausted (d too small)");
    EpochLabel l{self_, sting, anti};
    if (hooks.on_next_label) hooks.on_next_label(l);
    return l;
}

void LabelingCore::label_receipt_action(const LabelPair& sent_max,
                                        const LabelPair& last_sent,
                                        ProcessorId k) {
    if (!max_.count(k)) return;
    max_[k] = sent_max;
    // Adopt the cancelation of the own max if the peer echoed it canceled.
    LabelPair& own_max = max_[self_];
    if (!last_sent.legit() && last_sent.ml && own_max.ml &&
        *own_max.ml == *last_sent.ml)
        own_max = last_sent;

    if (stale_info()) empty_all_queues();

    // Insert missing max records into their creators' queues.
    for (auto& [j, mp] : max_) {
        if (!mp.ml) continue;
        std::deque<LabelPair>* q = queue_for(*mp.ml);
        if (!q) continue;
        std::size_t cap = mp.ml->creator == self_ ? own_queue_cap() : peer_queue_cap();
        if (!find_to_front(*q, *mp.ml)) add_front(*q, mp, cap);
    }

    // Cancel stored legit pairs that some same-queue pair fails to dominate.
    for (auto& [j, q] : stored_) {
        for (LabelPair& lp : q) {
            if (!lp.legit() || !lp.ml) continue;
            for (const LabelPair& other : q) {
                if (&other == &lp || !other.ml) continue;
                Cmp c = label_cmp(*other.ml, *lp.ml);
                if (c == Cmp::Greater || c == Cmp::Incomparable) {
                    lp.cl = *other.ml;
                    break;
                }
            }
        }
    }

    // Propagate received cancelations into the stores.
    for (auto& [j, mp] : max_) {
        if (mp.legit() || !mp.ml) continue;
        std::deque<LabelPair>* q = queue_for(*mp.ml);
        if (!q) continue;
        for (LabelPair& lp : *q)
            if (lp.ml && *lp.ml == *mp.ml && lp.legit()) lp = mp;
    }

    // Drop doubles, retaining the canceled copy.
    for (auto& [j, q] : stored_) {
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (!q[i].ml) continue;
            for (std::size_t i2 = q.size(); i2-- > i + 1;) {
                if (!q[i2].ml || !(*q[i2].ml == *q[i].ml)) continue;
                if (!q[i].legit() || q[i2].legit()) {
                    q.erase(q.begin() + i2);
                } else {
                    q[i] = q[i2];
                    q.erase(q.begin() + i2);
                }
            }
        }
    }

    // Cancel max entries whose stored twin is canceled.
    for (auto& [j, mp] : max_) {
        if (!mp.legit() || !mp.ml) continue;
        std::deque<LabelPair>* q = queue_for(*mp.ml);
        if (!q) continue;
        for (const LabelPair& lp : *q)
            if (lp.ml && *lp.ml == *mp.ml && !lp.legit()) {
                mp = lp;
                break;
            }
    }

    // Adopt the greatest legit label, or fall back to an own label.
    std::vector<EpochLabel> legit;
    for (const auto& [j, mp] : max_)
        if (mp.legit() && mp.ml) legit.push_back(*mp.ml);
    if (!legit.empty()) {
        std::vector<EpochLabel> maximal;
        for (const EpochLabel& l : legit) {
            bool dominated = false;
            for (const EpochLabel& other : legit)
                if (label_lt(l, other)) dominated = true;
            if (!dominated) maximal.push_back(l);
        }
        EpochLabel best = maximal.front();
        for (const EpochLabel& l : maximal)
            if (label_tie_lt(best, l)) best = l;
        max_[self_] = LabelPair{best, std::nullopt};
    } else {
        std::deque<LabelPair>& own = stored_[self_];
        const LabelPair* found = nullptr;
        for (const LabelPair& lp : own)
            if (lp.legit() && lp.ml) {
                found = &lp;
                break;
            }
        if (found) {
            max_[self_] = *found;
        } else {
            LabelPair fresh{next_label(), std::nullopt};
            max_[self_] = fresh;
            add_front(own, fresh, own_queue_cap());
        }
    }
}

bool LabelingCore::holds_nonmember_label(const IdSet& members) const {
    for (const auto& [j, mp] : max_)
        for (const auto& f : {mp.ml, mp.cl})
            if (f && !members.contains(f->creator)) return true;
    for (const auto& [j, q] : stored_)
        for (const LabelPair& lp : q)
            for (const auto& f : {lp.ml, lp.cl})
                if (f && !members.contains(f->creator)) return true;
    return false;
}

}  // namespace reconf
