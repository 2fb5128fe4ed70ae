#include "reconf/counter.hpp"

#include <algorithm>
#include <stdexcept>

namespace reconf {

bool CounterCore::is_member(const RecsaCore& sa) const {
    ConfigValue c = sa.config();
    return c.is_set() && c.members().contains(self_);
}

bool CounterCore::structures_match(const IdSet& members) const {
    if (!(conf_ == members)) return false;
    for (ProcessorId j : members)
        if (!max_.count(j) || !stored_.count(j)) return false;
    return max_.size() == members.size() && stored_.size() == members.size();
}

void CounterCore::rebuild_for(const IdSet& members) {
    conf_ = members;
    v_ = static_cast<int>(members.size());
    m_ = cap_ * std::max(0, v_ - 1);
    k_ = own_queue_cap();
    d_ = k_ * (2 * own_queue_cap() + 2);
    std::map<ProcessorId, CounterPair> new_max;
    for (ProcessorId j : members)
        new_max[j] = max_.count(j) ? max_[j] : CounterPair{};
    max_ = std::move(new_max);
    stored_.clear();
    for (ProcessorId j : members) stored_[j] = {};
}

void CounterCore::management_tick(const RecsaCore& sa) {
    if (!sa.no_reco()) return;
    ConfigValue cfg = sa.get_config();
    if (!cfg.is_set() || !cfg.members().contains(self_)) return;
    if (structures_match(cfg.members())) {
        cancel_exhausted_max();
        return;
    }
    CounterPair old_own = max_.count(self_) ? max_[self_] : CounterPair{};
    rebuild_for(cfg.members());
    if (hooks.on_queue_flush) hooks.on_queue_flush();
    clean_max();
    counter_receipt_action(CounterPair{}, clean_cp(old_own), self_);
}

CounterPair CounterCore::clean_cp(const CounterPair& x) const {
    for (const auto& f : {x.mct, x.cct})
        if (f && !conf_.contains(f->lbl.creator)) return CounterPair{};
    return x;
}

std::optional<CounterTriple> CounterCore::clean_ct(const CounterTriple& x) const {
    if (!conf_.contains(x.lbl.creator)) return std::nullopt;
    return x;
}

void CounterCore::clean_max() {
    for (auto& [j, cp] : max_) cp = clean_cp(cp);
}

void CounterCore::cancel_exhausted_max() {
    for (auto& [j, cp] : max_)
        if (cp.legit() && cp.mct && exhausted(*cp.mct)) cp.cct = cp.mct;
}

std::optional<std::pair<ProcessorId, CounterMessage>> CounterCore::transmit_tick(
    const RecsaCore& sa) {
    if (!sa.no_reco() || !is_member(sa)) return std::nullopt;
    if (!structures_match(sa.get_config().members())) return std::nullopt;
    std::vector<ProcessorId> peers;
    for (ProcessorId j : conf_)
        if (j != self_) peers.push_back(j);
    if (peers.empty()) return std::nullopt;
    ProcessorId dst = peers[transmit_cursor_++ % peers.size()];
    max_[self_] = clean_cp(max_[self_]);
    max_[dst] = clean_cp(max_[dst]);
    return std::make_pair(dst, CounterMessage{max_[self_], max_[dst]});
}

void CounterCore::on_receive(const RecsaCore& sa, ProcessorId from,
                             const CounterMessage& m) {
    if (!sa.no_reco() || !is_member(sa)) return;
    if (!structures_match(sa.get_config().members())) return;
    if (!conf_.contains(from) || from == self_) return;
    clean_max();
    cancel_exhausted_max();
    counter_receipt_action(clean_cp(m.sent_max), clean_cp(m.last_sent), from);
}

std::deque<CounterPair>* CounterCore::queue_for(const EpochLabel& l) {
    auto it = stored_.find(l.creator);
    return it == stored_.end() ? nullptr : &it->second;
}

// Only one record per label is kept: the ≺_ct-greatest instance, except that
// a canceled copy beats an uncanceled one.
void CounterCore::enqueue(std::deque<CounterPair>& q, CounterPair cp,
                          std::size_t cap) {
    if (!cp.mct) return;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (!q[i].mct || !(q[i].mct->lbl == cp.mct->lbl)) continue;
        bool keep_new;
        if (q[i].legit() != cp.legit())
            keep_new = !cp.legit();
        else
            keep_new = counter_lt(*q[i].mct, *cp.mct);
        CounterPair kept = keep_new ? cp : q[i];
        q.erase(q.begin() + i);
        q.push_front(kept);
        return;
    }
    q.push_front(std::move(cp));
    while (q.size() > cap) q.pop_back();
}

bool CounterCore::stale_info() const {
    for (const auto& [j, q] : stored_) {
        int legit_count = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const CounterPair& cp = q[i];
            if (!cp.mct) return true;
            if (cp.mct->lbl.creator != j) return true;
            if (cp.legit()) ++legit_count;
            for (std::size_t i2 = i + 1; i2 < q.size(); ++i2)
                if (q[i2].mct && q[i2].mct->lbl == cp.mct->lbl) return true;
        }
        if (legit_count > 1) return true;
    }
    return false;
}

void CounterCore::empty_all_queues() {
    for (auto& [j, q] : stored_) q.clear();
    if (hooks.on_queue_flush) hooks.on_queue_flush();
}

EpochLabel CounterCore::next_label() {
    const std::deque<CounterPair>& own = stored_[self_];
    IdSet anti;
    IdSet banned;
    auto absorb = [&](const std::optional<CounterTriple>& f) {
        if (!f) return;
        if (static_cast<int>(anti.size()) < k_) anti.insert(f->lbl.sting);
        banned = banned.unite(f->lbl.antistings);
    };
    for (const CounterPair& cp : own) absorb(cp.mct);
    for (const CounterPair& cp : own) absorb(cp.cct);
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
        throw std::runtime_error("counter sting domain exhausted (d too small)");
    EpochLabel l{self_, sting, anti};
    if (hooks.on_next_label) hooks.on_next_label(l);
    return l;
}

void CounterCore::counter_receipt_action(const CounterPair& sent_max,
                                         const CounterPair& last_sent,
                                         ProcessorId k) {
    if (k != kNoProcessor) {
        if (!max_.count(k)) return;
        max_[k] = sent_max;
        CounterPair& own_max = max_[self_];
        if (!last_sent.legit() && last_sent.mct && own_max.mct &&
            own_max.mct->lbl == last_sent.mct->lbl)
            own_max = last_sent;
    }

    if (stale_info()) empty_all_queues();

    for (auto& [j, mp] : max_) {
        if (!mp.mct) continue;
        std::deque<CounterPair>* q = queue_for(mp.mct->lbl);
        if (!q) continue;
        std::size_t cap =
            mp.mct->lbl.creator == self_ ? own_queue_cap() : peer_queue_cap();
        enqueue(*q, mp, cap);
    }

    // Cancel stored legit pairs whose label some same-queue pair dominates or
    // is incomparable with.
    for (auto& [j, q] : stored_) {
        for (CounterPair& cp : q) {
            if (!cp.legit() || !cp.mct) continue;
            for (const CounterPair& other : q) {
                if (&other == &cp || !other.mct) continue;
                Cmp c = label_cmp(other.mct->lbl, cp.mct->lbl);
                if (c == Cmp::Greater || c == Cmp::Incomparable) {
                    cp.cct = *other.mct;
                    break;
                }
            }
        }
    }

    // Propagate received cancelations into the stores.
    for (auto& [j, mp] : max_) {
        if (mp.legit() || !mp.mct) continue;
        std::deque<CounterPair>* q = queue_for(mp.mct->lbl);
        if (!q) continue;
        for (CounterPair& cp : *q)
            if (cp.mct && cp.mct->lbl == mp.mct->lbl && cp.legit()) cp = mp;
    }

    // Cancel max entries with canceled stored twins.
    for (auto& [j, mp] : max_) {
        if (!mp.legit() || !mp.mct) continue;
        std::deque<CounterPair>* q = queue_for(mp.mct->lbl);
        if (!q) continue;
        for (const CounterPair& cp : *q)
            if (cp.mct && cp.mct->lbl == mp.mct->lbl && !cp.legit()) {
                mp = cp;
                break;
            }
    }

    // Adopt the ≺_ct-greatest legit counter, or fall back to an own one.
    std::vector<CounterTriple> legit;
    for (const auto& [j, mp] : max_)
        if (mp.legit() && mp.mct) legit.push_back(*mp.mct);
    if (!legit.empty()) {
        std::vector<CounterTriple> maximal;
        for (const CounterTriple& ct : legit) {
            bool dominated = false;
            for (const CounterTriple& other : legit)
                if (counter_lt(ct, other)) dominated = true;
            if (!dominated) maximal.push_back(ct);
        }
        CounterTriple best = maximal.front();
        for (const CounterTriple& ct : maximal) {
            if (label_tie_lt(best.lbl, ct.lbl) ||
                (best.lbl == ct.lbl &&
                 (ct.seqn > best.seqn ||
                  (ct.seqn == best.seqn && ct.wid > best.wid))))
                best = ct;
        }
        max_[self_] = CounterPair{best, std::nullopt};
    } else {
        std::deque<CounterPair>& own = stored_[self_];
        const CounterPair* found = nullptr;
        for (const CounterPair& cp : own)
            if (cp.legit() && cp.mct) {
                found = &cp;
                break;
            }
        if (found) {
            max_[self_] = *found;
        } else {
            CounterPair fresh{CounterTriple{next_label(), 0, self_}, std::nullopt};
            max_[self_] = fresh;
            enqueue(own, fresh, own_queue_cap());
        }
    }
}

void CounterCore::get_max_seq() {
    CounterPair& own = max_[self_];
    if (!own.mct) return;
    CounterTriple best = *own.mct;
    for (const auto& [j, q] : stored_) {
        for (const CounterPair& cp : q) {
            if (!cp.legit() || !cp.mct) continue;
            if (!(cp.mct->lbl == best.lbl)) continue;
            if (cp.mct->seqn > best.seqn ||
                (cp.mct->seqn == best.seqn && cp.mct->wid > best.wid))
                best = *cp.mct;
        }
    }
    own = CounterPair{best, own.cct};
}

void CounterCore::find_max_counter() {
    cancel_exhausted_max();
    counter_receipt_action(CounterPair{}, CounterPair{}, kNoProcessor);
    get_max_seq();
}

std::optional<CounterCore::SessionOutput> CounterCore::start_increment(
    const RecsaCore& sa, Step now) {
    if (session_) return std::nullopt;
    if (!sa.no_reco()) return std::nullopt;
    ConfigValue cfg = sa.get_config();
    if (!cfg.is_set() || cfg.members().empty()) return std::nullopt;
    bool member = cfg.members().contains(self_);
    if (member && !structures_match(cfg.members())) return std::nullopt;

    Session s;
    s.id = ++session_counter_;
    s.member = member;
    s.config = cfg.members();
    s.started = now;
    session_ = s;
    SessionOutput out;
    for (ProcessorId j : s.config)
        if (j != self_) out.messages.emplace_back(j, CounterReadRequest{s.id});
    if (member) {
        // The caller's own reply to itself is immediate.
        find_max_counter();
        session_->repliers.insert(self_);
    }
    return out;
}

void CounterCore::finish_session(bool completed) {
    SessionResult r;
    r.completed = completed;
    r.member = session_->member;
    r.started = session_->started;
    if (completed) r.value = session_->new_counter;
    result_ = r;
    session_.reset();
}

CounterCore::SessionOutput CounterCore::on_read_reply(const RecsaCore& sa,
                                                      ProcessorId from,
                                                      const CounterReadReply& m) {
    SessionOutput out;
    if (!session_ || session_->phase != Session::Phase::Read ||
        m.session != session_->id || !session_->config.contains(from))
        return out;
    if (m.abort) {
        finish_session(false);
        return out;
    }
    session_->repliers.insert(from);
    if (session_->member) {
        max_[from] = clean_cp(m.value);
    } else {
        session_->collected.push_back(m.value);
    }
    if (2 * session_->repliers.size() <= session_->config.size()) return out;

    // Majority read done; derive the new counter.
    if (session_->member) {
        for (int guard = 0;; ++guard) {
            if (guard > 64)
                throw std::runtime_error(
                    "findMaxCounter repeat exceeded the label-creation bound");
            find_max_counter();
            const CounterPair& own = max_[self_];
            if (own.legit() && own.mct && !exhausted(*own.mct)) break;
        }
        const CounterTriple& base = *max_[self_].mct;
        session_->new_counter = CounterTriple{base.lbl, base.seqn + 1, self_};
    } else {
        std::optional<CounterTriple> candidate;
        for (const CounterPair& cp : session_->collected) {
            if (!cp.legit() || !cp.mct || exhausted(*cp.mct)) continue;
            bool dominates_all = true;
            for (const CounterPair& other : session_->collected) {
                if (!other.mct) continue;
                Cmp c = counter_cmp(*other.mct, *cp.mct);
                if (c != Cmp::Less && c != Cmp::Equal) dominates_all = false;
            }
            if (dominates_all &&
                (!candidate || counter_lt(*candidate, *cp.mct)))
                candidate = *cp.mct;
        }
        if (!candidate) {
            finish_session(false);
            return out;
        }
        session_->new_counter = CounterTriple{candidate->lbl, candidate->seqn + 1, self_};
    }
    session_->phase = Session::Phase::Write;
    for (ProcessorId j : session_->config)
        if (j != self_)
            out.messages.emplace_back(
                j, CounterWriteRequest{session_->id, session_->new_counter});
    if (session_->member) {
        // The caller's own write is applied locally.
        CounterPair pair{session_->new_counter, std::nullopt};
        max_[self_] = pair;
        if (std::deque<CounterPair>* q = queue_for(session_->new_counter.lbl))
            enqueue(*q, pair,
                    session_->new_counter.lbl.creator == self_ ? own_queue_cap()
                                                               : peer_queue_cap());
        session_->acks.insert(self_);
    }
    return out;
}

CounterCore::SessionOutput CounterCore::on_write_reply(
    const RecsaCore& sa, ProcessorId from, const CounterWriteReply& m) {
    SessionOutput out;
    if (!session_ || session_->phase != Session::Phase::Write ||
        m.session != session_->id || !session_->config.contains(from))
        return out;
    if (m.abort) {
        finish_session(false);
        return out;
    }
    session_->acks.insert(from);
    if (2 * session_->acks.size() > session_->config.size()) finish_session(true);
    return out;
}

std::optional<CounterCore::SessionResult> CounterCore::take_result() {
    auto r = result_;
    result_.reset();
    return r;
}

CounterReadReply CounterCore::serve_read(const RecsaCore& sa,
                                         const CounterReadRequest& m) {
    CounterReadReply reply;
    reply.session = m.session;
    if (!sa.no_reco() || !is_member(sa) ||
        !structures_match(sa.get_config().members())) {
        reply.abort = true;
        return reply;
    }
    find_max_counter();
    reply.value = max_[self_];
    return reply;
}

CounterWriteReply CounterCore::serve_write(const RecsaCore& sa,
                                           ProcessorId from,
                                           const CounterWriteRequest& m) {
    CounterWriteReply reply;
    reply.session = m.session;
    if (!sa.no_reco() || !is_member(sa) ||
        !structures_match(sa.get_config().members())) {
        reply.abort = true;
        return reply;
    }
    std::optional<CounterTriple> ct = clean_ct(m.value);
    if (ct) {
        CounterPair& slot = max_[from];
        if (!slot.mct || counter_lt(*slot.mct, *ct))
            slot = CounterPair{*ct, std::nullopt};
        if (ct->lbl.creator == self_)
            enqueue(stored_[self_], slot, own_queue_cap());
        if (slot.legit() && slot.mct && exhausted(*slot.mct)) slot.cct = slot.mct;
    }
    return reply;
}

bool CounterCore::holds_nonmember_label(const IdSet& members) const {
    for (const auto& [j, mp] : max_)
        for (const auto& f : {mp.mct, mp.cct})
            if (f && !members.contains(f->lbl.creator)) return true;
    for (const auto& [j, q] : stored_)
        for (const CounterPair& cp : q)
            for (const auto& f : {cp.mct, cp.cct})
                if (f && !members.contains(f->lbl.creator)) return true;
    return false;
}

}  // namespace reconf
