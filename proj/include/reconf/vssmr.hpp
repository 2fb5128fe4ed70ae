#pragma once

#include <functional>
#include <map>
#include <optional>

#include "reconf/recsa.hpp"
#include "reconf/trace.hpp"
#include "reconf/wire.hpp"

namespace reconf {

// Reconfigurable virtually synchronous SMR: coordinator election via
// counters, view installation, lockstep multicast rounds with state
// replication, and the suspend/drain protocol ahead of a coordinator-led
// delicate reconfiguration. The replicated application is an append log.
class VsCore {
public:
    struct Hooks {
        std::function<void(const ViewTag&)> on_view_install;
        std::function<void(int64_t)> on_round;
        std::function<void(bool)> on_suspend;
        std::function<void(bool)> on_reconf_ready;
        std::function<void(const ViewTag&, int64_t rnd,
                           const std::vector<std::string>&)>
            on_deliver;
        std::function<void(const std::string&)> on_fetch;
    };

    explicit VsCore(ProcessorId self) : self_(self) {}

    // Application interface, supplied by the harness.
    std::function<std::optional<std::string>()> fetch = [] {
        return std::optional<std::string>{};
    };
    std::function<bool()> eval_config = [] { return false; };
    // One-shot counter from the increment-session machinery.
    std::function<std::optional<CounterTriple>()> request_counter =
        [] { return std::optional<CounterTriple>{}; };
    bool admit_joiners = true;  // coordinator-side knob

    struct CrdSets {
        IdSet seem;
        IdSet val;
    };
    CrdSets compute_crd(const RecsaCore& sa,
                        const std::map<ProcessorId, ProcessorId>& fd_crd) const;

    std::vector<std::pair<ProcessorId, VsMessage>> tick(
        const RecsaCore& sa, const std::map<ProcessorId, ProcessorId>& fd_crd);
    void on_receive(ProcessorId from, const VsMessage& m);

    // Coordinator patch: replaces the recMA prediction-path trigger.
    bool need_delicate_reconf() const {
        return own_.reconf_ready && last_val_crd_ == IdSet{self_} &&
               eval_config();
    }

    // Coordinator-controlled joins: the most recently propagated admit flag.
    bool pass_query() const { return last_crd_admit_; }

    const VsRecord& record() const { return own_; }
    VsRecord& record_mut() { return own_; }
    const std::map<ProcessorId, VsRecord>& peer_records() const { return peers_; }
    ProcessorId current_crd() const { return own_crd_; }
    void set_replica(AppState s) { own_.replica = std::move(s); }

    Hooks hooks;

private:
    const VsRecord& record_of(ProcessorId k) const;
    bool have_record(ProcessorId k) const {
        return k == self_ || peers_.count(k) > 0;
    }
    void apply_batch(const std::map<ProcessorId, std::string>& batch);
    ProcessorId synch_source() const;
    void set_suspend(bool v);
    void set_reconf_ready(bool v);
    void install(const ViewTag& v);

    ProcessorId self_;
    VsRecord own_;
    std::map<ProcessorId, VsRecord> peers_;
    ProcessorId own_crd_ = kNoProcessor;
    IdSet last_val_crd_;
    bool last_crd_admit_ = true;
};

}  // namespace reconf
