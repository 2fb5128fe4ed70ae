#pragma once

#include <cstdint>
#include <map>

#include "reconf/ids.hpp"

namespace reconf {

// The (N,Θ)-failure detector: an ordered heartbeat count vector fed by the
// token exchange. A token receipt from p_j zeroes p_j's count and ages every
// other entry; ranking below the N-th position is ignored.
class HeartbeatVector {
public:
    HeartbeatVector() = default;
    HeartbeatVector(ProcessorId self, int activity_bound, int gap_factor)
        : self_(self), n_bound_(activity_bound), gap_factor_(gap_factor) {}

    void on_heartbeat(ProcessorId j) {
        if (j == self_) return;
        for (auto& [id, cnt] : counts_)
            if (id != j) ++cnt;
        counts_[j] = 0;
    }

    // Sorted ascending by (count, id); the vector the estimation works on.
    std::vector<std::pair<ProcessorId, int64_t>> ranked() const {
        std::vector<std::pair<ProcessorId, int64_t>> v;
        v.reserve(counts_.size());
        for (const auto& [id, cnt] : counts_) v.emplace_back(id, cnt);
        std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        if (v.size() > static_cast<std::size_t>(n_bound_)) v.resize(n_bound_);
        return v;
    }

    // Position of the last entry before the first significant gap, i.e. where
    // count[k+1] > gap_factor * max(count[1..k], 1). Capped at N.
    int estimate_n() const {
        auto v = ranked();
        if (v.empty()) return 0;
        int64_t prefix_max = 1;
        std::size_t n = 1;
        prefix_max = std::max<int64_t>(prefix_max, v[0].second);
        while (n < v.size()) {
            if (v[n].second > gap_factor_ * prefix_max) break;
            prefix_max = std::max(prefix_max, v[n].second);
            ++n;
        }
        return static_cast<int>(std::min<std::size_t>(n, n_bound_));
    }

    // Self is always trusted; peers are truncated at the estimated n.
    IdSet trusted() const {
        IdSet out{self_};
        auto v = ranked();
        int n = estimate_n();
        for (int k = 0; k < n && out.size() < static_cast<std::size_t>(n_bound_);
             ++k)
            out.insert(v[k].first);
        return out;
    }

    void forget(ProcessorId j) { counts_.erase(j); }
    const std::map<ProcessorId, int64_t>& counts() const { return counts_; }
    std::map<ProcessorId, int64_t>& counts() { return counts_; }

private:
    ProcessorId self_ = kNoProcessor;
    int n_bound_ = 1;
    int gap_factor_ = 4;
    std::map<ProcessorId, int64_t> counts_;
};

}  // namespace reconf
