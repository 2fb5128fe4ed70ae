#include "reconf/recsa.hpp"

#include <algorithm>

namespace reconf {

void RecsaCore::boot() {
    slots_.clear();
    all_seen_.clear();
    received_any_ = false;
    PeerSlot& me = slots_[self_];
    me.config = ConfigValue::hash();
    me.prp = Proposal::dflt();
    me.all = false;
}

const IdSet& RecsaCore::fd_of(ProcessorId k) const {
    if (k == self_) return fd_;
    static const IdSet kEmpty;
    auto it = slots_.find(k);
    return it == slots_.end() ? kEmpty : it->second.fd_trusted;
}

IdSet RecsaCore::part_of(ProcessorId k) const {
    if (k == self_) return fd_part();
    auto it = slots_.find(k);
    return it == slots_.end() ? IdSet{} : it->second.fd_part;
}

ConfigValue RecsaCore::config_of(ProcessorId k) const {
    auto it = slots_.find(k);
    return it == slots_.end() ? ConfigValue::hash() : it->second.config;
}

const Proposal& RecsaCore::prp_of(ProcessorId k) const {
    static const Proposal kDflt;
    auto it = slots_.find(k);
    return it == slots_.end() ? kDflt : it->second.prp;
}

IdSet RecsaCore::fd_part() const {
    IdSet part;
    for (ProcessorId j : fd_)
        if (!config_of(j).is_hash()) part.insert(j);
    return part;
}

ConfigValue RecsaCore::chs_config() const {
    // choose() picks the smallest candidate for determinism; choose(∅) = ⊥.
    std::optional<ConfigValue> best;
    for (ProcessorId k : fd_) {
        ConfigValue v = config_of(k);
        if (v.is_hash()) continue;
        if (!best || v < *best) best = v;
    }
    return best ? *best : ConfigValue::bottom();
}

ConfigValue RecsaCore::get_config() const {
    return no_reco() ? chs_config() : config();
}

bool RecsaCore::no_reco() const {
    IdSet part = fd_part();
    bool self_participant = part.contains(self_);

    // (1) every trusted participant's FD snapshot recognizes p_i.
    for (ProcessorId j : part) {
        if (j == self_) continue;
        const PeerSlot& s = slots_.at(j);
        if (s.have_fd && !s.fd_trusted.contains(self_)) return false;
    }
    // (2) at most one non-# configuration among trusted entries, and neither
    // Bottom nor the (illegal) empty set.
    std::optional<ConfigValue> seen;
    for (ProcessorId k : fd_) {
        ConfigValue v = config_of(k);
        if (v.is_hash()) continue;
        if (v.is_bottom() || v.is_empty_set()) return false;
        if (seen && !(v == *seen)) return false;
        seen = v;
    }
    // (3) participant-set snapshots and echoes agree with FD[i].part.
    for (ProcessorId k : part) {
        if (k == self_) continue;
        const PeerSlot& s = slots_.at(k);
        if (s.have_fd && !(s.fd_part == part)) return false;
        if (self_participant && s.have_echo && !(s.echo_part == part))
            return false;
    }
    // (4) no notification anywhere.
    for (const auto& [k, s] : slots_)
        if (!s.prp.is_default()) return false;
    return true;
}

bool RecsaCore::estab(const IdSet& set) {
    bool effective = no_reco() && !set.empty() &&
                     !(ConfigValue::set(set) == config());
    if (hooks.on_estab) hooks.on_estab(set, effective);
    if (!effective) return false;
    set_own_prp(Proposal{1, set});
    return true;
}

bool RecsaCore::participate() {
    if (!no_reco()) return false;
    ConfigValue chosen = chs_config();
    set_own_config(chosen);
    if (hooks.on_participate) hooks.on_participate();
    return true;
}

void RecsaCore::set_own_config(const ConfigValue& v) {
    PeerSlot& me = self_slot();
    if (me.config == v) return;
    me.config = v;
    if (hooks.on_config_changed) hooks.on_config_changed(v);
}

void RecsaCore::set_own_prp(const Proposal& p) {
    PeerSlot& me = self_slot();
    if (me.prp == p) return;
    me.prp = p;
    // The notification changed: nobody has confirmed the new value yet.
    me.all = false;
    all_seen_.clear();
    if (hooks.on_phase_change) hooks.on_phase_change(p);
}

void RecsaCore::config_set(const ConfigValue& val) {
    for (auto& [k, s] : slots_) {
        if (k == self_) continue;
        s.config = val;
        s.prp = Proposal::dflt();
    }
    set_own_config(val);
    PeerSlot& me = self_slot();
    if (!me.prp.is_default()) set_own_prp(Proposal::dflt());
    if (hooks.on_config_set) hooks.on_config_set(val);
}

int RecsaCore::degree_of(ProcessorId k) const {
    auto it = slots_.find(k);
    if (it == slots_.end()) return 0;
    return 2 * it->second.prp.phase + (it->second.all ? 1 : 0);
}

std::optional<Proposal> RecsaCore::max_ntf() const {
    IdSet part = fd_part();
    std::optional<Proposal> best;
    for (ProcessorId k : part) {
        const Proposal& p = prp_of(k);
        if (p.is_default()) continue;
        if (!best || *best < p) best = p;
    }
    return best;
}

bool RecsaCore::echo_no_all(ProcessorId k) const {
    if (k == self_) return true;  // echo[i] aliases the own triple
    const PeerSlot& s = slots_.at(k);
    return s.have_echo && s.echo_part == fd_part() && s.echo_prp == prp();
}

bool RecsaCore::same(ProcessorId k) const {
    if (k == self_) return true;
    const PeerSlot& s = slots_.at(k);
    return s.have_fd && s.fd_part == fd_part() && s.prp == prp();
}

bool RecsaCore::echo_complete() const {
    for (ProcessorId k : fd_part()) {
        if (k == self_) continue;
        const PeerSlot& s = slots_.at(k);
        if (!s.have_echo || !(s.echo_part == fd_part()) ||
            !(s.echo_prp == prp()) || s.echo_all != all_flag())
            return false;
    }
    return true;
}

bool RecsaCore::all_seen_complete() const {
    IdSet cover = all_seen_;
    if (all_flag()) cover.insert(self_);
    return fd_part().subset_of(cover);
}

bool RecsaCore::loop_stale_test() const {
    IdSet part = fd_part();
    // type-1: notifications in phase 0 must not carry a set.
    for (const auto& [k, s] : slots_)
        if (s.prp.phase == 0 && s.prp.set && !s.prp.set->empty()) return true;
    // type-2 (local): configurations that are Bottom or the empty set.
    for (const auto& [k, s] : slots_)
        if (s.config.is_bottom() || s.config.is_empty_set()) return true;
    // type-3a: degree gap above one among non-default notifications.
    std::vector<int> degs;
    for (ProcessorId k : part)
        if (!prp_of(k).is_default()) degs.push_back(degree_of(k));
    if (!degs.empty()) {
        auto [lo, hi] = std::minmax_element(degs.begin(), degs.end());
        if (*hi - *lo > 1) return true;
    }
    // type-3b: a participant one phase ahead that p_i never saw completing.
    int x = prp().phase;
    if (!prp().is_default() && (x == 1 || x == 2)) {
        int ahead = (x + 1) % 3;
        for (ProcessorId k : part) {
            if (k == self_) continue;
            if (prp_of(k).phase == ahead && !all_seen_.contains(k)) return true;
        }
    }
    // type-3c: more than one proposed set while a phase-2 notification exists.
    bool phase2 = false;
    for (ProcessorId k : part) phase2 = phase2 || prp_of(k).phase == 2;
    if (phase2) {
        std::vector<IdSet> sets;
        for (ProcessorId k : part) {
            const Proposal& p = prp_of(k);
            if (p.is_default() || !p.set) continue;
            if (std::find(sets.begin(), sets.end(), *p.set) == sets.end())
                sets.push_back(*p.set);
        }
        if (sets.size() > 1) return true;
    }
    // type-4: agreed snapshots but the configuration holds no live participant.
    if (!part.empty() && config().is_set()) {
        bool agreed = true;
        for (ProcessorId k : part) {
            if (k == self_) continue;
            const PeerSlot& s = slots_.at(k);
            if (!s.have_fd || !(s.fd_trusted == fd_) || !(s.fd_part == part)) {
                agreed = false;
                break;
            }
        }
        if (agreed && config().members().intersect(part).empty()) return true;
    }
    return false;
}

unsigned RecsaCore::detect_stale() const {
    unsigned mask = 0;
    IdSet part = fd_part();
    for (const auto& [k, s] : slots_)
        if (s.prp.phase == 0 && s.prp.set && !s.prp.set->empty())
            mask |= kStaleType1;
    std::vector<ConfigValue> distinct;
    for (ProcessorId k : fd_) {
        ConfigValue v = config_of(k);
        if (v.is_bottom() || v.is_empty_set()) mask |= kStaleType2;
        if (v.is_hash() || v.is_bottom()) continue;
        if (std::find(distinct.begin(), distinct.end(), v) == distinct.end())
            distinct.push_back(v);
    }
    if (distinct.size() > 1) mask |= kStaleType2;  // configuration conflict
    std::vector<int> degs;
    for (ProcessorId k : part)
        if (!prp_of(k).is_default()) degs.push_back(degree_of(k));
    if (!degs.empty()) {
        auto [lo, hi] = std::minmax_element(degs.begin(), degs.end());
        if (*hi - *lo > 1) mask |= kStaleType3;
    }
    int x = prp().phase;
    if (!prp().is_default() && (x == 1 || x == 2)) {
        int ahead = (x + 1) % 3;
        for (ProcessorId k : part)
            if (k != self_ && prp_of(k).phase == ahead && !all_seen_.contains(k))
                mask |= kStaleType3;
    }
    bool phase2 = false;
    for (ProcessorId k : part) phase2 = phase2 || prp_of(k).phase == 2;
    if (phase2) {
        std::vector<IdSet> sets;
        for (ProcessorId k : part) {
            const Proposal& p = prp_of(k);
            if (p.is_default() || !p.set) continue;
            if (std::find(sets.begin(), sets.end(), *p.set) == sets.end())
                sets.push_back(*p.set);
        }
        if (sets.size() > 1) mask |= kStaleType3;
    }
    if (!part.empty() && config().is_set()) {
        bool agreed = true;
        for (ProcessorId k : part) {
            if (k == self_) continue;
            const PeerSlot& s = slots_.at(k);
            if (!s.have_fd || !(s.fd_trusted == fd_) || !(s.fd_part == part)) {
                agreed = false;
                break;
            }
        }
        if (agreed && config().members().intersect(part).empty())
            mask |= kStaleType4;
    }
    return mask;
}

std::vector<std::pair<ProcessorId, RecsaMessage>> RecsaCore::loop_iteration(
    const IdSet& fd_now) {
    fd_ = fd_now;
    self_slot();  // ensure the own slot exists

    // Cleanup after crashes: non-participant entries cannot affect the
    // computation. The own entry is included, which continuously wipes a
    // non-participant's notification residue.
    IdSet part = fd_part();
    for (auto& [k, s] : slots_) {
        if (part.contains(k)) continue;
        if (k == self_) {
            if (!s.prp.is_default()) set_own_prp(Proposal::dflt());
            continue;
        }
        s.config = ConfigValue::hash();
        s.prp = Proposal::dflt();
    }
    part = fd_part();

    if (loop_stale_test()) config_set(ConfigValue::bottom());

    std::optional<Proposal> mn = max_ntf();
    if (!mn) {
        // Brute-force branch.
        std::vector<ConfigValue> distinct;
        for (ProcessorId k : fd_) {
            ConfigValue v = config_of(k);
            if (v.is_hash() || v.is_bottom()) continue;
            if (std::find(distinct.begin(), distinct.end(), v) == distinct.end())
                distinct.push_back(v);
        }
        if (distinct.size() > 1) config_set(ConfigValue::bottom());
        if (config().is_bottom()) {
            bool identical = true;
            for (ProcessorId j : fd_) {
                if (j == self_) continue;
                const auto it = slots_.find(j);
                if (it == slots_.end() || !it->second.have_fd ||
                    !(it->second.fd_trusted == fd_)) {
                    identical = false;
                    break;
                }
            }
            if (identical) config_set(ConfigValue::set(fd_));
        }
    } else {
        // Delicate replacement branch.
        bool allv = true;
        for (ProcessorId k : part) {
            bool ok = echo_no_all(k) && same(k);
            allv = allv && ok;
            if (ok) all_seen_.insert(k);
        }
        self_slot().all = allv;

        if (echo_complete() && all_seen_complete()) {
            Proposal next = prp();
            next.phase = increment(next.phase);
            set_own_prp(next);  // resets all/allSeen
        }
        switch (prp().phase) {
            case 0: {
                std::optional<Proposal> cur = max_ntf();
                if (cur && cur->phase == 1)
                    set_own_prp(*cur);  // adopt the pending selection
                else if (!prp().is_default())
                    set_own_prp(Proposal::dflt());
                break;
            }
            case 1: {
                std::optional<Proposal> cur = max_ntf();
                if (cur) set_own_prp(*cur);  // converge to the lexical max
                break;
            }
            case 2:
                if (prp().set) set_own_config(ConfigValue::set(*prp().set));
                break;
        }
    }

    std::vector<std::pair<ProcessorId, RecsaMessage>> out;
    if (!config().is_hash()) {
        for (ProcessorId j : fd_) {
            if (j == self_) continue;
            RecsaMessage m;
            m.fd_trusted = fd_;
            m.fd_part = fd_part();
            m.config = config();
            m.prp = prp();
            m.all = all_flag();
            auto it = slots_.find(j);
            if (it != slots_.end()) {
                m.echo_part = it->second.fd_part;
                m.echo_prp = it->second.prp;
                m.echo_all = it->second.all;
            }
            out.emplace_back(j, m);
        }
    }
    return out;
}

void RecsaCore::on_receive(ProcessorId from, const RecsaMessage& m) {
    if (from == self_) return;
    received_any_ = true;
    PeerSlot& s = slots_[from];
    s.have_fd = true;
    s.fd_trusted = m.fd_trusted;
    s.fd_part = m.fd_part;
    s.config = m.config;
    s.prp = m.prp;
    s.all = m.all;
    s.have_echo = true;
    s.echo_part = m.echo_part;
    s.echo_prp = m.echo_prp;
    s.echo_all = m.echo_all;
}

}  // namespace reconf
