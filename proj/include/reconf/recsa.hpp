#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "reconf/config_value.hpp"
#include "reconf/ids.hpp"
#include "reconf/wire.hpp"

namespace reconf {

// Stale-information types of Definition 1, as a bitmask.
enum StaleType : unsigned {
    kStaleType1 = 1u << 0,  // phase-0 notification carrying a set
    kStaleType2 = 1u << 1,  // empty/Bottom or conflicting configurations
    kStaleType3 = 1u << 2,  // phase/degree desynchronization
    kStaleType4 = 1u << 3,  // configuration disjoint from live participants
};

// Reconfiguration Stability Assurance: detects stale information, runs the
// brute-force reset, and emulates the three-phase delicate replacement
// automaton. Pure state machine; the caller supplies the trusted set and
// routes messages.
class RecsaCore {
public:
    struct PeerSlot {
        bool have_fd = false;
        IdSet fd_trusted;
        IdSet fd_part;
        ConfigValue config = ConfigValue::hash();
        Proposal prp;
        bool all = false;
        bool have_echo = false;
        IdSet echo_part;
        Proposal echo_prp;
        bool echo_all = false;
    };

    struct Hooks {
        std::function<void(const ConfigValue&)> on_config_set;      // configSet(val)
        std::function<void(const Proposal&)> on_phase_change;       // own prp changed
        std::function<void(const ConfigValue&)> on_config_changed;  // own config changed
        std::function<void(const IdSet&, bool)> on_estab;           // set, effective
        std::function<void()> on_participate;
    };

    explicit RecsaCore(ProcessorId self) : self_(self) { boot(); }

    void boot();

    // Interface functions (Algorithm 1).
    ConfigValue chs_config() const;
    ConfigValue get_config() const;
    bool no_reco() const;
    bool estab(const IdSet& set);
    bool participate();

    // One do-forever iteration. Returns the broadcast bodies (empty while the
    // processor is a non-participant).
    std::vector<std::pair<ProcessorId, RecsaMessage>> loop_iteration(
        const IdSet& fd_now);
    void on_receive(ProcessorId from, const RecsaMessage& m);

    // Observers.
    unsigned detect_stale() const;  // Definition 1, local evaluation
    int degree_of(ProcessorId k) const;
    std::optional<Proposal> max_ntf() const;
    IdSet fd_part() const;
    const IdSet& fd_trusted() const { return fd_; }
    void set_fd(const IdSet& fd) { fd_ = fd; }
    const ConfigValue& config() const { return self_slot().config; }
    const Proposal& prp() const { return self_slot().prp; }
    bool all_flag() const { return self_slot().all; }
    const IdSet& all_seen() const { return all_seen_; }
    bool is_participant() const { return !config().is_hash(); }
    bool received_any() const { return received_any_; }
    ProcessorId self() const { return self_; }
    const std::map<ProcessorId, PeerSlot>& slots() const { return slots_; }

    // Fault injection (test/harness only).
    PeerSlot& slot_mut(ProcessorId k) { return slots_[k]; }
    IdSet& all_seen_mut() { return all_seen_; }

    Hooks hooks;

private:
    const PeerSlot& self_slot() const { return slots_.at(self_); }
    PeerSlot& self_slot() { return slots_[self_]; }
    const IdSet& fd_of(ProcessorId k) const;
    IdSet part_of(ProcessorId k) const;
    ConfigValue config_of(ProcessorId k) const;
    const Proposal& prp_of(ProcessorId k) const;

    void config_set(const ConfigValue& val);
    void set_own_config(const ConfigValue& v);
    void set_own_prp(const Proposal& p);

    bool echo_no_all(ProcessorId k) const;
    bool same(ProcessorId k) const;
    bool echo_complete() const;
    bool all_seen_complete() const;
    static int increment(int phase) { return phase == 1 ? 2 : 0; }

    bool loop_stale_test() const;

    ProcessorId self_;
    IdSet fd_;
    std::map<ProcessorId, PeerSlot> slots_;
    IdSet all_seen_;
    bool received_any_ = false;
};

}  // namespace reconf
