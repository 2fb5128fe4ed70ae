#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "reconf/epoch_label.hpp"
#include "reconf/recsa.hpp"

namespace reconf {

// Bounded epoch labeling over the current configuration. Members exchange
// label pairs, purge non-member-created labels, rebuild structures on
// configuration change and converge to a global maximal label.
class LabelingCore {
public:
    struct Hooks {
        std::function<void(const EpochLabel&)> on_next_label;
        std::function<void()> on_queue_flush;
    };

    LabelingCore(ProcessorId self, int cap) : self_(self), cap_(cap) {}

    // Algorithm 4 do-forever body (configuration-change handling).
    void management_tick(const RecsaCore& sa);
    // transmitReady for the next destination in rotation; nullopt when
    // quiescence or membership rules out transmission.
    std::optional<std::pair<ProcessorId, LabelMessage>> transmit_tick(
        const RecsaCore& sa);
    void on_receive(const RecsaCore& sa, ProcessorId from, const LabelMessage& m);

    // Algorithm 5.
    void label_receipt_action(const LabelPair& sent_max,
                              const LabelPair& last_sent, ProcessorId k);

    EpochLabel next_label();

    // Introspection.
    bool structures_match(const IdSet& members) const;
    const std::map<ProcessorId, LabelPair>& max_pairs() const { return max_; }
    const std::map<ProcessorId, std::deque<LabelPair>>& stored() const {
        return stored_;
    }
    const IdSet& structure_members() const { return conf_; }
    bool holds_nonmember_label(const IdSet& members) const;
    std::optional<EpochLabel> local_max() const {
        auto it = max_.find(self_);
        if (it == max_.end() || !it->second.legit() || !it->second.ml)
            return std::nullopt;
        return *it->second.ml;
    }
    int own_queue_cap() const { return v_ * (v_ * v_ + m_) + v_; }
    int peer_queue_cap() const { return v_ + m_; }
    int sting_domain() const { return d_; }

    // Test/fault-injection access.
    void rebuild_for(const IdSet& members);
    std::map<ProcessorId, LabelPair>& max_mut() { return max_; }
    std::map<ProcessorId, std::deque<LabelPair>>& stored_mut() { return stored_; }

    Hooks hooks;

private:
    bool is_member(const RecsaCore& sa) const;
    LabelPair clean_lp(const LabelPair& x) const;
    void clean_max();
    bool stale_info() const;
    void empty_all_queues();
    std::deque<LabelPair>* queue_for(const EpochLabel& l);
    static bool find_to_front(std::deque<LabelPair>& q, const EpochLabel& ml);
    void add_front(std::deque<LabelPair>& q, LabelPair lp, std::size_t cap);

    ProcessorId self_;
    int cap_;
    IdSet conf_;
    int v_ = 0;
    int m_ = 0;
    int k_ = 0;
    int d_ = 0;
    std::map<ProcessorId, LabelPair> max_;
    std::map<ProcessorId, std::deque<LabelPair>> stored_;
    std::size_t transmit_cursor_ = 0;
};

}  // namespace reconf
