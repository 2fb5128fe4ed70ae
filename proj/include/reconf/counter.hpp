#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "reconf/counter_types.hpp"
#include "reconf/recsa.hpp"
#include "reconf/trace.hpp"

namespace reconf {

// Practically-infinite monotonic counters layered on epoch labels. Members
// mirror the labeling structures with counter pairs and serve the two-phase
// majority read/write increments; non-member participants run the read/write
// protocol only.
class CounterCore {
public:
    struct Hooks {
        std::function<void(const EpochLabel&)> on_next_label;
        std::function<void()> on_queue_flush;
    };

    CounterCore(ProcessorId self, int cap, int seqn_bits)
        : self_(self), cap_(cap), seqn_bits_(seqn_bits) {}

    bool exhausted(const CounterTriple& ct) const {
        return ct.seqn >= (int64_t{1} << seqn_bits_);
    }

    // Algorithm 6.
    void management_tick(const RecsaCore& sa);
    std::optional<std::pair<ProcessorId, CounterMessage>> transmit_tick(
        const RecsaCore& sa);
    void on_receive(const RecsaCore& sa, ProcessorId from,
                    const CounterMessage& m);
    void counter_receipt_action(const CounterPair& sent_max,
                                const CounterPair& last_sent, ProcessorId k);
    void find_max_counter();

    // Increment sessions (Algorithms 7 and 8). start_increment returns the
    // read requests, or nothing when an increment cannot start.
    struct SessionOutput {
        std::vector<std::pair<ProcessorId, Message>> messages;
    };
    std::optional<SessionOutput> start_increment(const RecsaCore& sa, Step now);
    SessionOutput on_read_reply(const RecsaCore& sa, ProcessorId from,
                                const CounterReadReply& m);
    SessionOutput on_write_reply(const RecsaCore& sa, ProcessorId from,
                                 const CounterWriteReply& m);
    bool session_active() const { return session_.has_value(); }

    struct SessionResult {
        bool completed = false;  // false: aborted, returned Bottom
        bool member = false;
        Step started = 0;
        CounterTriple value;
    };
    std::optional<SessionResult> take_result();

    // Responder side.
    CounterReadReply serve_read(const RecsaCore& sa, const CounterReadRequest& m);
    CounterWriteReply serve_write(const RecsaCore& sa, ProcessorId from,
                                  const CounterWriteRequest& m);

    // Introspection / injection.
    bool structures_match(const IdSet& members) const;
    void rebuild_for(const IdSet& members);
    const std::map<ProcessorId, CounterPair>& max_pairs() const { return max_; }
    std::map<ProcessorId, CounterPair>& max_mut() { return max_; }
    std::map<ProcessorId, std::deque<CounterPair>>& stored_mut() {
        return stored_;
    }
    std::optional<CounterTriple> local_max() const {
        auto it = max_.find(self_);
        if (it == max_.end() || !it->second.legit() || !it->second.mct)
            return std::nullopt;
        return *it->second.mct;
    }
    bool holds_nonmember_label(const IdSet& members) const;
    int own_queue_cap() const { return v_ * (v_ * v_ + m_) + v_; }
    int peer_queue_cap() const { return v_ + m_; }

    Hooks hooks;

private:
    struct Session {
        int64_t id = 0;
        bool member = false;
        enum class Phase { Read, Write } phase = Phase::Read;
        IdSet config;
        IdSet repliers;
        std::vector<CounterPair> collected;  // non-member path
        IdSet acks;
        CounterTriple new_counter;
        Step started = 0;
    };

    bool is_member(const RecsaCore& sa) const;
    CounterPair clean_cp(const CounterPair& x) const;
    std::optional<CounterTriple> clean_ct(const CounterTriple& x) const;
    void clean_max();
    void cancel_exhausted_max();
    bool stale_info() const;
    void empty_all_queues();
    EpochLabel next_label();
    std::deque<CounterPair>* queue_for(const EpochLabel& l);
    void enqueue(std::deque<CounterPair>& q, CounterPair cp, std::size_t cap);
    void get_max_seq();
    void finish_session(bool completed);

    ProcessorId self_;
    int cap_;
    int seqn_bits_;
    IdSet conf_;
    int v_ = 0;
    int m_ = 0;
    int k_ = 0;
    int d_ = 0;
    std::map<ProcessorId, CounterPair> max_;
    std::map<ProcessorId, std::deque<CounterPair>> stored_;
    std::size_t transmit_cursor_ = 0;
    int64_t session_counter_ = 0;
    std::optional<Session> session_;
    std::optional<SessionResult> result_;
};

}  // namespace reconf
