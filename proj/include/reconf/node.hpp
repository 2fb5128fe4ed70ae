#pragma once

#include <deque>
#include <memory>
#include <optional>

#include "reconf/counter.hpp"
#include "reconf/fd.hpp"
#include "reconf/joining.hpp"
#include "reconf/labeling.hpp"
#include "reconf/netsim.hpp"
#include "reconf/recma.hpp"
#include "reconf/recsa.hpp"
#include "reconf/trace.hpp"
#include "reconf/vssmr.hpp"

namespace reconf {

enum class FdMode { Admissible, Unreliable };

// One simulated processor: the protocol stack wired to the simulator.
class Node : public NodeHost {
public:
    struct Options {
        bool recma = true;
        bool joining = true;
        bool labels = false;
        bool counters = false;
        bool vs = false;
        int seqn_bits = 16;
        int gap_factor = 4;
    };

    Node(ProcessorId id, Simulation* sim, Trace* trace, Options opt, FdMode mode);

    // NodeHost.
    int tick_source_count() const override { return 8; }
    void run_tick(int source) override;
    void on_message(ProcessorId from, const Message& m) override;
    void on_heartbeat(ProcessorId from) override;
    void on_peer_crd(ProcessorId from, ProcessorId crd) override;
    ProcessorId own_crd() const override;
    void on_link_established(ProcessorId peer) override {}
    void on_token_exchange(ProcessorId peer) override {}

    // Scenario knobs.
    void set_fd_mode(FdMode m) { fd_mode_ = m; }
    void set_pass_flag(bool v) { pass_flag_ = v; }
    void set_eval_conf(bool v) { eval_conf_flag_ = v; }
    void set_eval_config(bool v) { eval_config_flag_ = v; }
    void set_admit(bool v) { vs_.admit_joiners = v; }
    void push_input(std::string s) { inputs_.push_back(std::move(s)); }
    void request_increment() { pending_increments_ += 1; }
    void pend_counter_seqn(int64_t s) { pending_seqn_bump_ = s; }

    // Converged-start initialization: a participant holding `config` with a
    // stale-free view of `live`.
    void init_converged(const IdSet& config_members, const IdSet& live);

    void inject_taint(const std::string& text);
    int64_t labels_rx() const { return labels_rx_; }

    IdSet current_fd() const;
    ProcessorId id() const { return id_; }
    RecsaCore& recsa() { return recsa_; }
    RecmaCore& recma() { return recma_; }
    JoiningCore& joining() { return joining_; }
    LabelingCore& labels() { return labels_; }
    CounterCore& counters() { return counters_; }
    VsCore& vs() { return vs_; }
    HeartbeatVector& heartbeats() { return hb_; }
    const Options& options() const { return opt_; }
    const AppState& app_state() const;
    AppState& plain_app_state() { return app_; }
    bool tainted() const;

private:
    void dispatch_send(ProcessorId dst, Message m) { sim_->send(id_, dst, m); }
    void drain_session(CounterCore::SessionOutput out);
    void note_session_result();
    std::optional<CounterTriple> vs_counter_request();

    ProcessorId id_;
    Simulation* sim_;
    Trace* trace_;
    Options opt_;
    FdMode fd_mode_;

    HeartbeatVector hb_;
    RecsaCore recsa_;
    RecmaCore recma_;
    JoiningCore joining_;
    LabelingCore labels_;
    CounterCore counters_;
    VsCore vs_;

    AppState app_;  // application state when the VS layer is off
    std::deque<std::string> inputs_;
    bool pass_flag_ = true;
    bool eval_conf_flag_ = false;
    bool eval_config_flag_ = false;

    std::map<ProcessorId, ProcessorId> fd_crd_;

    int pending_increments_ = 0;
    bool session_for_vs_ = false;
    std::optional<CounterTriple> vs_counter_cache_;
    std::optional<int64_t> pending_seqn_bump_;
    int64_t labels_rx_ = 0;
};

}  // namespace reconf
