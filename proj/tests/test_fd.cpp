#include "doctest.h"
#include "reconf/fd.hpp"

using namespace reconf;

TEST_CASE("heartbeat zeroes the sender and ages everyone else") {
    HeartbeatVector v(1, 8, 4);
    v.counts()[2] = 5;
    v.counts()[3] = 1;
    v.on_heartbeat(3);
    CHECK(v.counts().at(2) == 6);
    CHECK(v.counts().at(3) == 0);
}

TEST_CASE("heartbeat from an unknown processor creates a zero entry") {
    HeartbeatVector v(1, 8, 4);
    v.on_heartbeat(9);
    CHECK(v.counts().at(9) == 0);
}

TEST_CASE("a silent processor's count grows with every other heartbeat") {
    HeartbeatVector v(1, 8, 4);
    v.on_heartbeat(4);
    int64_t last = v.counts().at(4);
    for (int i = 0; i < 5; ++i) {
        v.on_heartbeat(2);
        v.on_heartbeat(3);
        CHECK(v.counts().at(4) > last);
        last = v.counts().at(4);
    }
}

namespace {
// Independent oracle: scan the ascending counts for the first position whose
// count exceeds gap_factor times the prefix maximum (at least 1).
int estimate_oracle(std::vector<int64_t> counts, int gap_factor, int n_bound) {
    std::sort(counts.begin(), counts.end());
    if (counts.size() > static_cast<std::size_t>(n_bound))
        counts.resize(n_bound);
    if (counts.empty()) return 0;
    int64_t prefix = std::max<int64_t>(1, counts[0]);
    std::size_t n = 1;
    while (n < counts.size()) {
        if (counts[n] > gap_factor * prefix) break;
        prefix = std::max(prefix, counts[n]);
        ++n;
    }
    return static_cast<int>(n);
}
}  // namespace

TEST_CASE("gap estimation: counts 1,2,3,100 with gap_factor 4 give n=3") {
    CHECK(estimate_oracle({1, 2, 3, 100}, 4, 8) == 3);  // frozen oracle value
    HeartbeatVector v(0, 8, 4);
    v.counts()[1] = 1;
    v.counts()[2] = 2;
    v.counts()[3] = 3;
    v.counts()[4] = 100;
    CHECK(v.estimate_n() == 3);
    IdSet t = v.trusted();
    CHECK(t.contains(0));  // self
    CHECK(t.contains(1));
    CHECK(t.contains(2));
    CHECK(t.contains(3));
    CHECK(!t.contains(4));
}

TEST_CASE("no gap: all counts equal estimates every entry") {
    HeartbeatVector v(0, 8, 4);
    for (ProcessorId j = 1; j <= 5; ++j) v.counts()[j] = 7;
    CHECK(v.estimate_n() == 5);
}

TEST_CASE("entries beyond the N-th rank are ignored") {
    HeartbeatVector v(0, 3, 4);
    for (ProcessorId j = 1; j <= 6; ++j) v.counts()[j] = j;
    CHECK(v.estimate_n() <= 3);
    CHECK(v.trusted().size() <= 3);
}

TEST_CASE("the paper's 30-versus-100 ranking example") {
    HeartbeatVector v(0, 64, 4);
    for (ProcessorId j = 1; j <= 30; ++j) v.counts()[j] = j;  // up to 30
    v.counts()[31] = 100;
    CHECK(v.estimate_n() == 30);
    IdSet t = v.trusted();
    CHECK(t.size() == 31);  // the 30 low-count processors plus self
    CHECK(!t.contains(31));
}

TEST_CASE("single processor trusts itself") {
    HeartbeatVector v(7, 4, 4);
    CHECK(v.trusted() == IdSet{7});
}
