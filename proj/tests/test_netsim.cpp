#include <set>

#include "doctest.h"
#include "reconf/netsim.hpp"

using namespace reconf;

namespace {

// Minimal host recording what the link layer delivers.
struct Probe : NodeHost {
    std::vector<std::pair<ProcessorId, std::string>> delivered;
    std::map<ProcessorId, int> heartbeats;
    std::map<ProcessorId, int> exchanges;
    int tick_source_count() const override { return 0; }
    void run_tick(int) override {}
    void on_message(ProcessorId from, const Message& m) override {
        delivered.emplace_back(from, describe(m));
    }
    void on_heartbeat(ProcessorId from) override { heartbeats[from]++; }
    void on_peer_crd(ProcessorId, ProcessorId) override {}
    ProcessorId own_crd() const override { return kNoProcessor; }
    void on_link_established(ProcessorId) override {}
    void on_token_exchange(ProcessorId from) override { exchanges[from]++; }
};

Message probe_msg(const std::string& s) {
    JoinReply r;
    r.pass = true;
    r.state.log = {s};
    return r;
}

struct Rig {
    SimParams params;
    Trace trace;
    Simulation sim;
    Probe a, b;
    Rig(uint64_t seed = 7, int cap = 2, Step budget = 40000)
        : params{}, sim((params.cap = cap, params.seed = seed,
                         params.step_budget = budget, params.n_bound = 4,
                         params),
                        &trace) {
        sim.add_processor(1, &a);
        sim.add_processor(2, &b);
    }
};

}  // namespace

TEST_CASE("bounded channel: capacity one holds exactly one packet") {
    Rng rng(1);
    AdversaryPolicy adv;
    Channel ch(1);
    Packet m;
    m.link_sender = 1;
    CHECK(ch.insert(m, rng, adv));
    CHECK(ch.size() == 1);
}

TEST_CASE("bounded channel: drop-new policy keeps the resident packet") {
    Rng rng(1);
    AdversaryPolicy adv;
    adv.drop_new_permille = 1000;
    Channel ch(1);
    Packet x;
    x.seq = 11;
    REQUIRE(ch.insert(x, rng, adv));
    Packet m;
    m.seq = 22;
    CHECK(!ch.insert(m, rng, adv));
    CHECK(ch.size() == 1);
    CHECK(ch.peek(0).seq == 11);
}

TEST_CASE("drop-old policy evicts a resident packet instead") {
    Rng rng(1);
    AdversaryPolicy adv;
    adv.drop_new_permille = 0;
    Channel ch(1);
    Packet x;
    x.seq = 11;
    REQUIRE(ch.insert(x, rng, adv));
    Packet m;
    m.seq = 22;
    CHECK(ch.insert(m, rng, adv));
    CHECK(ch.size() == 1);
    CHECK(ch.peek(0).seq == 22);
}

TEST_CASE("link cleaning flushes preloaded stale packets") {
    Rig rig;
    Packet stale;
    stale.link_sender = 1;
    stale.kind = Packet::Kind::Data;
    stale.epoch = 3;
    stale.seq = 9;
    rig.sim.inject_channel_packet(1, 2, stale);
    rig.sim.inject_channel_packet(2, 1, stale);
    CHECK(rig.sim.channel_has_preexisting(1, 2));

    rig.sim.establish_link(1, 2);
    while (!rig.sim.halted() &&
           !(rig.sim.link_running(1, 2) && rig.sim.link_running(2, 1)))
        rig.sim.step();
    REQUIRE(rig.sim.link_running(1, 2));
    CHECK(!rig.sim.channel_has_preexisting(1, 2));
    CHECK(!rig.sim.channel_has_preexisting(2, 1));
    CHECK(rig.a.delivered.empty());
    CHECK(rig.b.delivered.empty());
}

TEST_CASE("cleaning requires strictly more than 2*cap acknowledgments") {
    // Oracle: count clean-acknowledgment deliveries back at the cleaning side
    // until the link runs; the threshold is 2*cap so at least 2*cap+1 arrive.
    Rig rig(13, 2);
    rig.sim.establish_link(1, 2);
    int clean_acks_to_1 = 0;
    while (!rig.sim.halted() && !rig.sim.link_running(1, 2)) {
        SimEvent ev = rig.sim.step();
        if (ev.kind == SimEvent::Kind::Deliver && ev.proc == 1 &&
            ev.detail.empty()) {
            // counted below via trace instead
        }
    }
    for (const TraceEvent& e : rig.trace.events())
        if (e.kind == EventKind::PacketDeliver && e.proc == 1 &&
            e.detail.find("cleanack:l1") != std::string::npos)
            ++clean_acks_to_1;
    CHECK(clean_acks_to_1 > 2 * 2);
}

TEST_CASE("messages are delivered reliably and in order after cleaning") {
    Rig rig;
    rig.sim.establish_link(1, 2);
    for (int i = 0; i < 5; ++i)
        rig.sim.send(1, 2, probe_msg("m" + std::to_string(i)));
    while (!rig.sim.halted() && rig.b.delivered.size() < 5) rig.sim.step();
    REQUIRE(rig.b.delivered.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(rig.b.delivered[i].first == 1);
        CHECK(rig.b.delivered[i].second.find("m" + std::to_string(i)) !=
              std::string::npos);
    }
}

TEST_CASE("no fabrication: every delivered payload was sent") {
    Rig rig(99);
    rig.sim.establish_link(1, 2);
    std::set<std::string> sent;
    for (int i = 0; i < 8; ++i) {
        std::string tag = "x" + std::to_string(i);
        sent.insert(tag);
        rig.sim.send(1, 2, probe_msg(tag));
        rig.sim.send(2, 1, probe_msg(tag));
    }
    while (!rig.sim.halted()) rig.sim.step();
    for (const auto& [from, body] : rig.b.delivered) {
        bool known = false;
        for (const auto& tag : sent)
            if (body.find(tag) != std::string::npos) known = true;
        CHECK(known);
    }
    CHECK(!rig.b.delivered.empty());
}

TEST_CASE("token exchange: heartbeats flow while both sides live") {
    Rig rig;
    rig.sim.establish_link(1, 2);
    for (int i = 0; i < 4000 && rig.a.exchanges[2] < 3; ++i) rig.sim.step();
    CHECK(rig.a.exchanges[2] >= 3);
    CHECK(rig.b.heartbeats[1] > 0);
    CHECK(rig.a.heartbeats[2] > 0);
}

TEST_CASE("a crashed processor stops producing heartbeats") {
    Rig rig;
    rig.sim.establish_link(1, 2);
    for (int i = 0; i < 3000 && rig.a.exchanges[2] < 2; ++i) rig.sim.step();
    REQUIRE(rig.a.exchanges[2] >= 2);
    rig.sim.crash(2);
    // Drain whatever is still in flight, then expect silence.
    for (int i = 0; i < 500; ++i) rig.sim.step();
    int hb = rig.a.heartbeats[2];
    for (int i = 0; i < 2000; ++i) rig.sim.step();
    CHECK(rig.a.heartbeats[2] == hb);
}

TEST_CASE("identical seeds and scenario produce identical traces") {
    auto run = [](uint64_t seed) {
        Rig rig(seed, 2, 3000);
        rig.sim.establish_link(1, 2);
        rig.sim.send(1, 2, probe_msg("d"));
        while (!rig.sim.halted()) rig.sim.step();
        return rig.trace.digest();
    };
    CHECK(run(42) == run(42));
    CHECK(run(42) != run(43));  // different schedules almost surely diverge
}

TEST_CASE("raw channels reorder under the adversary") {
    // Three packets into a cap-3 channel can come out in a non-FIFO order
    // for some seed; deliveries always preserve the multiset.
    bool reordered = false;
    for (uint64_t seed = 1; seed <= 32 && !reordered; ++seed) {
        Rng rng(seed);
        AdversaryPolicy adv;
        Channel ch(3);
        for (uint64_t s = 1; s <= 3; ++s) {
            Packet p;
            p.link_sender = 1;
            p.seq = s;
            REQUIRE(ch.insert(p, rng, adv));
        }
        std::vector<uint64_t> order;
        while (!ch.empty()) order.push_back(ch.take(rng.below(ch.size())).seq);
        std::vector<uint64_t> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        CHECK(sorted == std::vector<uint64_t>{1, 2, 3});
        if (order != sorted) reordered = true;
    }
    CHECK(reordered);
}

TEST_CASE("fault injection cannot exceed channel capacity") {
    Rig rig;
    Packet junk;
    junk.link_sender = 1;
    rig.sim.inject_channel_packet(1, 2, junk);
    rig.sim.inject_channel_packet(1, 2, junk);
    CHECK_THROWS_AS(rig.sim.inject_channel_packet(1, 2, junk), ScenarioError);
}

TEST_CASE("sends between unknown endpoints are scenario errors") {
    Rig rig;
    CHECK_THROWS_AS(rig.sim.send(1, 9, probe_msg("m")), ScenarioError);
}
