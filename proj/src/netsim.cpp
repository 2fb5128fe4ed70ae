#include "reconf/netsim.hpp"

#include <algorithm>
#include <cassert>

namespace reconf {

namespace {
const char* kind_name(Packet::Kind k) {
    switch (k) {
        case Packet::Kind::Data: return "data";
        case Packet::Kind::Ack: return "ack";
        case Packet::Kind::Clean: return "clean";
        case Packet::Kind::CleanAck: return "cleanack";
    }
    return "?";
}
}  // namespace

std::string Packet::str() const {
    std::string s = std::string(kind_name(kind)) + ":l" +
                    std::to_string(link_sender) + ":e" + std::to_string(epoch) +
                    ":s" + std::to_string(seq);
    if (payload) s += ":" + describe(*payload);
    return s;
}

bool Channel::insert(Packet p, Rng& rng, const AdversaryPolicy& adv) {
    if (static_cast<int>(packets_.size()) >= cap_) {
        if (rng.permille(adv.drop_new_permille)) return false;
        packets_.erase(packets_.begin() + rng.below(packets_.size()));
    }
    packets_.push_back(std::move(p));
    return true;
}

Packet Channel::take(std::size_t index) {
    Packet p = packets_.at(index);
    packets_.erase(packets_.begin() + index);
    return p;
}

std::size_t Channel::newest_index() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < packets_.size(); ++i) {
        const Packet& a = packets_[i];
        const Packet& b = packets_[best];
        if (a.epoch > b.epoch || (a.epoch == b.epoch && a.seq > b.seq)) best = i;
    }
    return best;
}

void Channel::purge_epoch_mismatch(ProcessorId link_sender, uint64_t epoch) {
    std::erase_if(packets_, [&](const Packet& p) {
        return p.link_sender == link_sender ? p.epoch != epoch : p.preexisting;
    });
}

Simulation::Simulation(SimParams params, Trace* trace)
    : params_(params), trace_(trace), rng_(params.seed) {}

void Simulation::add_processor(ProcessorId id, NodeHost* host) {
    hosts_[id] = host;
    live_[id] = true;
}

void Simulation::crash(ProcessorId id) {
    live_[id] = false;
    trace_->record(now_, id, EventKind::Crash, "crash");
}

bool Simulation::is_live(ProcessorId id) const {
    auto it = live_.find(id);
    return it != live_.end() && it->second;
}

IdSet Simulation::live_set() const {
    IdSet s;
    for (const auto& [id, alive] : live_)
        if (alive) s.insert(id);
    return s;
}

IdSet Simulation::known_ids() const {
    IdSet s;
    for (const auto& [id, h] : hosts_) s.insert(id);
    return s;
}

Channel& Simulation::channel(ProcessorId src, ProcessorId dst) {
    auto it = channels_.find({src, dst});
    if (it == channels_.end())
        it = channels_.emplace(PairKey{src, dst}, Channel(params_.cap)).first;
    return it->second;
}

Simulation::LinkDir& Simulation::link(ProcessorId src, ProcessorId dst) {
    return links_[{src, dst}];
}

void Simulation::send(ProcessorId src, ProcessorId dst, Message m) {
    if (!hosts_.count(src) || !hosts_.count(dst))
        throw ScenarioError("send between unknown endpoints " +
                            std::to_string(src) + "->" + std::to_string(dst));
    LinkDir& l = link(src, dst);
    constexpr std::size_t kOutboxCap = 64;
    if (l.outbox.size() >= kOutboxCap) l.outbox.pop_front();
    l.outbox.push_back(std::move(m));
}

void Simulation::establish_link(ProcessorId a, ProcessorId b) {
    for (auto [s, d] : {PairKey{a, b}, PairKey{b, a}}) {
        LinkDir& l = link(s, d);
        l.phase = LinkPhase::Cleaning;
        l.epoch = ++epoch_counter_;
        l.seq = 1;
        l.acks = 0;
        l.clean_acks = 0;
        l.rx_epoch = 0;
        l.rx_last_seq = 0;
    }
    trace_->record(now_, a, EventKind::LinkClean,
                   "begin pair clean with " + std::to_string(b));
}

void Simulation::inject_channel_packet(ProcessorId src, ProcessorId dst, Packet p) {
    Channel& ch = channel(src, dst);
    if (static_cast<int>(ch.size()) >= ch.cap())
        throw ScenarioError("fault injection exceeds channel capacity");
    p.preexisting = true;
    AdversaryPolicy keep;
    keep.drop_new_permille = 0;
    ch.insert(std::move(p), rng_, keep);
}

void Simulation::inject_link_desync(ProcessorId src, ProcessorId dst, uint64_t seq) {
    LinkDir& l = link(src, dst);
    l.seq += seq;
}

void Simulation::init_established_links() {
    for (const auto& [a, ha] : hosts_) {
        for (const auto& [b, hb] : hosts_) {
            if (a == b) continue;
            LinkDir& l = link(a, b);
            l.phase = LinkPhase::Running;
            l.epoch = ++epoch_counter_;
            l.seq = 1;
            l.acks = 0;
            l.exchanges = 1;
            l.rx_epoch = l.epoch;
            l.rx_last_seq = 0;
        }
    }
}

void Simulation::inject_app_message(ProcessorId src, ProcessorId dst, Message m) {
    LinkDir& l = link(src, dst);
    if (l.phase != LinkPhase::Running)
        throw ScenarioError("inject_app_message on an unestablished link");
    Packet p;
    p.link_sender = src;
    p.kind = Packet::Kind::Data;
    p.epoch = l.epoch;
    p.seq = l.seq;
    p.payload = std::move(m);
    p.preexisting = true;
    AdversaryPolicy keep;
    keep.drop_new_permille = 0;
    channel(src, dst).insert(std::move(p), rng_, keep);
}

NodeHost* Simulation::host(ProcessorId id) {
    auto it = hosts_.find(id);
    return it == hosts_.end() ? nullptr : it->second;
}

int64_t Simulation::exchanges_completed(ProcessorId src, ProcessorId dst) const {
    auto it = links_.find({src, dst});
    return it == links_.end() ? 0 : it->second.exchanges;
}

bool Simulation::link_running(ProcessorId src, ProcessorId dst) const {
    auto it = links_.find({src, dst});
    return it != links_.end() && it->second.phase == LinkPhase::Running;
}

std::size_t Simulation::channel_size(ProcessorId src, ProcessorId dst) const {
    auto it = channels_.find({src, dst});
    return it == channels_.end() ? 0 : it->second.size();
}

bool Simulation::channel_has_preexisting(ProcessorId src, ProcessorId dst) const {
    auto it = channels_.find({src, dst});
    if (it == channels_.end()) return false;
    for (std::size_t i = 0; i < it->second.size(); ++i)
        if (it->second.peek(i).preexisting) return true;
    return false;
}

Step Simulation::fairness_window() const {
    if (params_.fairness_window > 0) return params_.fairness_window;
    // Wide enough that every slot can be visited several times per window.
    std::size_t slots = hosts_.size() * 8 + links_.size() * 2 + 8;
    return static_cast<Step>(slots * 4);
}

SimEvent Simulation::step() {
    if (halted()) return SimEvent{SimEvent::Kind::Halted};

    struct Enabled {
        SlotKey key;
        Step starved;
    };
    std::vector<Enabled> enabled;
    auto consider = [&](SlotKey key) {
        auto it = last_fired_.find(key);
        if (it == last_fired_.end()) it = last_fired_.emplace(key, now_).first;
        enabled.push_back({key, now_ - it->second});
    };

    for (const auto& [id, host] : hosts_) {
        if (!is_live(id)) continue;
        for (int s = 0; s < host->tick_source_count(); ++s)
            consider({0, id, s});
    }
    for (const auto& [pair, l] : links_) {
        if (is_live(pair.first)) consider({1, pair.first, pair.second});
    }
    for (const auto& [pair, ch] : channels_) {
        if (!ch.empty() && is_live(pair.second))
            consider({2, pair.first, pair.second});
    }

    ++now_;
    if (enabled.empty()) return SimEvent{SimEvent::Kind::Noop};

    Step window = fairness_window();
    std::size_t pick = 0;
    bool forced = false;
    Step worst = -1;
    for (std::size_t i = 0; i < enabled.size(); ++i) {
        if (enabled[i].starved > worst) {
            worst = enabled[i].starved;
            pick = i;
        }
    }
    if (worst >= window) {
        forced = true;
    } else {
        pick = rng_.below(enabled.size());
    }
    SlotKey key = enabled[pick].key;
    last_fired_[key] = now_;

    SimEvent ev;
    switch (key.kind) {
        case 0: {
            ev.kind = SimEvent::Kind::Tick;
            ev.proc = key.a;
            ev.detail = "src" + std::to_string(key.b);
            hosts_[key.a]->run_tick(key.b);
            trace_->record(now_, key.a, EventKind::Tick, ev.detail);
            break;
        }
        case 1: {
            ev.kind = SimEvent::Kind::LinkSend;
            ev.proc = key.a;
            ev.peer = static_cast<ProcessorId>(key.b);
            do_transmit(key.a, ev.peer);
            break;
        }
        case 2: {
            ev.kind = SimEvent::Kind::Deliver;
            ev.proc = static_cast<ProcessorId>(key.b);
            ev.peer = key.a;
            do_deliver(key.a, ev.proc, forced);
            break;
        }
    }
    assert_invariants();
    return ev;
}

void Simulation::do_transmit(ProcessorId src, ProcessorId dst) {
    LinkDir& l = link(src, dst);
    Packet p;
    p.link_sender = src;
    p.crd = hosts_[src]->own_crd();
    if (l.phase == LinkPhase::Cleaning) {
        p.kind = Packet::Kind::Clean;
        p.epoch = l.epoch;
        p.seq = 0;
    } else {
        p.kind = Packet::Kind::Data;
        p.epoch = l.epoch;
        p.seq = l.seq;
        if (!l.outbox.empty()) p.payload = l.outbox.front();
    }
    std::string detail = p.str();
    bool kept = channel(src, dst).insert(std::move(p), rng_, params_.adversary);
    trace_->record(now_, src, EventKind::LinkSend,
                   "->" + std::to_string(dst) + " " + detail +
                       (kept ? "" : " (overflow-dropped)"));
}

void Simulation::do_deliver(ProcessorId src, ProcessorId dst, bool forced) {
    Channel& ch = channel(src, dst);
    if (ch.empty()) return;
    std::size_t idx = forced ? ch.newest_index() : ch.size() == 1 ? 0
                                                 : rng_.below(ch.size());
    if (!forced && rng_.permille(params_.adversary.loss_permille)) {
        Packet lost = ch.take(idx);
        trace_->record(now_, dst, EventKind::PacketDrop,
                       "<-" + std::to_string(src) + " " + lost.str());
        return;
    }
    Packet p = ch.peek(idx);
    bool duplicated = !forced && static_cast<int>(ch.size()) <= ch.cap() - 1 &&
                      rng_.permille(params_.adversary.dup_permille);
    if (!duplicated) ch.take(idx);
    trace_->record(now_, dst, EventKind::PacketDeliver,
                   "<-" + std::to_string(src) + " " + p.str() +
                       (duplicated ? " (dup)" : ""));
    process_arrival(src, dst, p);
}

void Simulation::process_arrival(ProcessorId src, ProcessorId dst, const Packet& p) {
    // Anti-parallel link labels: a packet must belong to the data link in
    // which either endpoint is the sender; anything else is ignored.
    if (p.link_sender != src && p.link_sender != dst) return;

    if (p.link_sender == src) {
        // Data direction src -> dst.
        LinkDir& l = link(src, dst);
        if (p.kind == Packet::Kind::Clean) {
            l.rx_epoch = p.epoch;
            l.rx_last_seq = 0;
            Packet ack;
            ack.link_sender = src;
            ack.kind = Packet::Kind::CleanAck;
            ack.epoch = p.epoch;
            ack.crd = hosts_[dst]->own_crd();
            channel(dst, src).insert(std::move(ack), rng_, params_.adversary);
            hosts_[dst]->on_heartbeat(src);
            return;
        }
        if (p.kind != Packet::Kind::Data || p.epoch != l.rx_epoch) return;
        hosts_[dst]->on_heartbeat(src);
        hosts_[dst]->on_peer_crd(src, p.crd);
        if (p.seq > l.rx_last_seq) {
            l.rx_last_seq = p.seq;
            if (p.payload) hosts_[dst]->on_message(src, *p.payload);
        }
        Packet ack;
        ack.link_sender = src;
        ack.kind = Packet::Kind::Ack;
        ack.epoch = p.epoch;
        ack.seq = p.seq;
        ack.crd = hosts_[dst]->own_crd();
        channel(dst, src).insert(std::move(ack), rng_, params_.adversary);
        return;
    }

    // p.link_sender == dst: acknowledgment for the data link dst -> src.
    LinkDir& l = link(dst, src);
    if (p.kind == Packet::Kind::CleanAck) {
        if (l.phase == LinkPhase::Cleaning && p.epoch == l.epoch) {
            // Strictly more than round-trip capacity acknowledgments.
            if (++l.clean_acks > 2 * params_.cap) finish_cleaning(dst, src);
        }
        hosts_[dst]->on_heartbeat(src);
        return;
    }
    if (p.kind != Packet::Kind::Ack) return;
    if (l.phase != LinkPhase::Running || p.epoch != l.epoch || p.seq != l.seq)
        return;
    hosts_[dst]->on_heartbeat(src);
    if (++l.acks > params_.cap) {
        if (!l.outbox.empty()) l.outbox.pop_front();
        l.seq += 1;
        l.acks = 0;
        l.exchanges += 1;
        hosts_[dst]->on_token_exchange(src);
    }
}

void Simulation::finish_cleaning(ProcessorId src, ProcessorId dst) {
    LinkDir& l = link(src, dst);
    l.phase = LinkPhase::Running;
    l.seq = 1;
    l.acks = 0;
    // The snap-stabilizing guarantee: no pre-establishment packet survives on
    // the pair once the cleaning handshake completes.
    channel(src, dst).purge_epoch_mismatch(src, l.epoch);
    channel(dst, src).purge_epoch_mismatch(src, l.epoch);
    trace_->record(now_, src, EventKind::LinkClean,
                   "link to " + std::to_string(dst) + " established");
    hosts_[src]->on_link_established(dst);
}

void Simulation::assert_invariants() const {
    for (const auto& [pair, ch] : channels_)
        assert(static_cast<int>(ch.size()) <= ch.cap());
}

}  // namespace reconf
