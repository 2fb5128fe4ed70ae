#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "reconf/ids.hpp"
#include "reconf/trace.hpp"
#include "reconf/wire.hpp"

namespace reconf {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Deterministic RNG. Only raw engine draws are used (std distributions are
// not portable across implementations).
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}
    uint64_t next() { return eng_(); }
    uint64_t below(uint64_t n) { return n == 0 ? 0 : eng_() % n; }
    bool permille(uint32_t p) { return below(1000) < p; }

private:
    std::mt19937_64 eng_;
};

struct AdversaryPolicy {
    uint32_t loss_permille = 150;  // deliver step discards instead
    uint32_t dup_permille = 60;    // deliver step leaves a copy behind
    uint32_t drop_new_permille = 500;  // overflow: drop incoming vs resident
};

// Low-level packet. The label is the identifier of the data-link sender per
// the anti-parallel link identification scheme; packets whose label does not
// match an expected sender tag are ignored on arrival.
struct Packet {
    enum class Kind { Data, Ack, Clean, CleanAck };
    ProcessorId link_sender = kNoProcessor;
    Kind kind = Kind::Data;
    uint64_t epoch = 0;
    uint64_t seq = 0;
    std::optional<Message> payload;  // Data only; absent payload is the token
    ProcessorId crd = kNoProcessor;  // piggybacked coordinator id
    bool preexisting = false;        // injected before link cleaning

    std::string str() const;
};

// Bounded-capacity packet channel. Never fabricates packets; an insert into
// a full channel drops either the new packet or a resident one.
class Channel {
public:
    explicit Channel(int cap = 1) : cap_(cap) {}

    // Returns false if the new packet was the one dropped.
    bool insert(Packet p, Rng& rng, const AdversaryPolicy& adv);
    Packet take(std::size_t index);
    const Packet& peek(std::size_t index) const { return packets_.at(index); }
    std::size_t size() const { return packets_.size(); }
    bool empty() const { return packets_.empty(); }
    int cap() const { return cap_; }
    std::size_t newest_index() const;  // highest (epoch, seq)
    void purge_epoch_mismatch(ProcessorId link_sender, uint64_t epoch);
    void clear() { packets_.clear(); }

private:
    int cap_;
    std::deque<Packet> packets_;
};

// What a simulated processor exposes to the scheduler.
class NodeHost {
public:
    virtual ~NodeHost() = default;
    virtual int tick_source_count() const = 0;
    virtual void run_tick(int source) = 0;
    virtual void on_message(ProcessorId from, const Message& m) = 0;
    virtual void on_heartbeat(ProcessorId from) = 0;
    virtual void on_peer_crd(ProcessorId from, ProcessorId crd) = 0;
    virtual ProcessorId own_crd() const = 0;
    virtual void on_link_established(ProcessorId peer) = 0;
    virtual void on_token_exchange(ProcessorId peer) = 0;
    // Called by the harness after every simulation step touching this node.
    virtual void after_step() {}
};

struct SimEvent {
    enum class Kind { Tick, LinkSend, Deliver, Halted, Noop } kind = Kind::Noop;
    ProcessorId proc = kNoProcessor;
    ProcessorId peer = kNoProcessor;
    std::string detail;
};

struct SimParams {
    int n_bound = 0;  // N
    int cap = 2;
    uint64_t seed = 1;
    Step step_budget = 10000;
    Step fairness_window = 0;  // 0: derived from the slot count
    AdversaryPolicy adversary;
};

// Deterministic discrete-event simulation: asynchronous processors joined by
// bounded lossy reordering duplicating channels, with token-based data links
// and fault injection. Single-threaded; (scenario, seed) -> trace is pure.
class Simulation {
public:
    Simulation(SimParams params, Trace* trace);

    void add_processor(ProcessorId id, NodeHost* host);
    void crash(ProcessorId id);
    bool is_live(ProcessorId id) const;
    IdSet live_set() const;
    IdSet known_ids() const;

    // Sends a protocol message over the data link (reliable FIFO once the
    // link is established). Unknown endpoints are scenario errors.
    void send(ProcessorId src, ProcessorId dst, Message m);

    // Runs the pairwise link-cleaning procedure state machine; links between
    // freshly connected processors deliver nothing until cleaned.
    void establish_link(ProcessorId a, ProcessorId b);

    // Converged-start scenarios: all pairwise links already cleaned and
    // running, so transient faults can be injected into a steady system.
    void init_established_links();

    SimEvent step();
    Step now() const { return now_; }
    Step budget() const { return params_.step_budget; }
    bool halted() const { return now_ >= params_.step_budget; }

    // Fault injection (scenario time zero or explicit script points).
    void inject_channel_packet(ProcessorId src, ProcessorId dst, Packet p);
    void inject_link_desync(ProcessorId src, ProcessorId dst, uint64_t seq);

    NodeHost* host(ProcessorId id);
    Rng& rng() { return rng_; }
    Trace* trace() { return trace_; }
    int cap() const { return params_.cap; }
    int n_bound() const { return params_.n_bound; }

    // Transient-fault helper: replaces the in-flight slot of an established
    // link with an adversarial message (current epoch and sequence).
    void inject_app_message(ProcessorId src, ProcessorId dst, Message m);

    int64_t exchanges_completed(ProcessorId src, ProcessorId dst) const;
    bool link_running(ProcessorId src, ProcessorId dst) const;
    std::size_t channel_size(ProcessorId src, ProcessorId dst) const;
    bool channel_has_preexisting(ProcessorId src, ProcessorId dst) const;

    void assert_invariants() const;

private:
    enum class LinkPhase { Cleaning, Running };

    struct LinkDir {  // directed data link src -> dst
        LinkPhase phase = LinkPhase::Cleaning;
        uint64_t epoch = 0;
        uint64_t seq = 1;
        int acks = 0;
        int clean_acks = 0;
        std::deque<Message> outbox;
        // Receiver-side registers for this direction (owned by dst).
        uint64_t rx_epoch = 0;
        uint64_t rx_last_seq = 0;
        int64_t exchanges = 0;
    };

    struct SlotKey {
        int kind;  // 0 tick, 1 transmit, 2 deliver
        ProcessorId a = kNoProcessor;
        int b = 0;
        auto operator<=>(const SlotKey&) const = default;
    };

    using PairKey = std::pair<ProcessorId, ProcessorId>;

    Channel& channel(ProcessorId src, ProcessorId dst);
    LinkDir& link(ProcessorId src, ProcessorId dst);
    void do_transmit(ProcessorId src, ProcessorId dst);
    void do_deliver(ProcessorId src, ProcessorId dst, bool forced);
    void process_arrival(ProcessorId src, ProcessorId dst, const Packet& p);
    void finish_cleaning(ProcessorId src, ProcessorId dst);
    Step fairness_window() const;

    SimParams params_;
    Trace* trace_;
    Rng rng_;
    Step now_ = 0;
    uint64_t epoch_counter_ = 100;

    std::map<ProcessorId, NodeHost*> hosts_;
    std::map<ProcessorId, bool> live_;
    std::map<PairKey, Channel> channels_;
    std::map<PairKey, LinkDir> links_;
    std::map<SlotKey, Step> last_fired_;
};

}  // namespace reconf
