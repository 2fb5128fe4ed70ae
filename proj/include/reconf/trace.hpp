#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "reconf/config_value.hpp"
#include "reconf/counter_types.hpp"
#include "reconf/ids.hpp"

namespace reconf {

using Step = int64_t;

inline uint64_t fnv1a(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

enum class EventKind {
    Tick,
    LinkSend,
    PacketDeliver,
    PacketDrop,
    PacketDup,
    LinkClean,
    Crash,
    Boot,
    Inject,
    ConfigSet,
    ConfigChange,
    PhaseChange,
    EstabCall,
    Participate,
    StaleChange,
    RecmaTrigger,
    PassGranted,
    NextLabel,
    QueueFlush,
    IncStart,
    IncComplete,
    IncAbort,
    ViewInstall,
    RoundAdvance,
    SuspendChange,
    Fetch,
    DeliverBatch,
    CheckerNote,
};

const char* event_kind_name(EventKind k);

struct TraceEvent {
    Step step = 0;
    ProcessorId proc = kNoProcessor;
    EventKind kind = EventKind::Tick;
    std::string detail;
};

// Typed records consumed by the property checkers. They duplicate what the
// event stream says, in a shape that keeps the checkers simple and pure.
struct IncrementRecord {
    ProcessorId proc = kNoProcessor;
    Step start_step = 0;
    Step end_step = 0;
    bool completed = false;  // false: aborted (returned Bottom)
    bool member = false;
    CounterTriple result;
};

struct DeliveryRecord {
    ProcessorId proc = kNoProcessor;
    Step step = 0;
    CounterTriple view_id;
    IdSet view_set;
    int64_t rnd = 0;
    std::vector<std::string> msgs;  // delivered messages of this round (non-⊥)
};

struct ViewInstallRecord {
    ProcessorId proc = kNoProcessor;
    Step step = 0;
    CounterTriple view_id;
    IdSet view_set;
    std::string replica_digest;
};

struct StaleSnapshot {
    ProcessorId proc = kNoProcessor;
    Step step = 0;
    unsigned mask = 0;  // bit i-1 set: type-i stale information present
};

struct DegreeSnapshot {
    Step step = 0;
    std::vector<std::pair<ProcessorId, int>> degrees;  // non-default notifications only
};

struct ConfigSnapshot {
    ProcessorId proc = kNoProcessor;
    Step step = 0;
    ConfigValue config;
};

class Trace {
public:
    void record(Step step, ProcessorId proc, EventKind kind, std::string detail) {
        events_.push_back(TraceEvent{step, proc, kind, std::move(detail)});
    }

    const std::vector<TraceEvent>& events() const { return events_; }

    std::vector<IncrementRecord> increments;
    std::vector<DeliveryRecord> deliveries;
    std::vector<ViewInstallRecord> view_installs;
    std::vector<StaleSnapshot> stale_snapshots;    // on-change per processor
    std::vector<DegreeSnapshot> degree_snapshots;  // on-change, global
    std::vector<ConfigSnapshot> config_snapshots;  // on-change per processor

    // One line per event, tab separated: step, processor, kind, payload digest.
    void write_tsv(std::ostream& os) const {
        for (const auto& e : events_) {
            os << e.step << '\t' << e.proc << '\t' << event_kind_name(e.kind)
               << '\t' << std::hex << fnv1a(e.detail) << std::dec << '\t'
               << e.detail << '\n';
        }
    }

    uint64_t digest() const {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (const auto& e : events_) {
            h = fnv1a(std::to_string(e.step), h);
            h = fnv1a(std::to_string(e.proc), h);
            h = fnv1a(event_kind_name(e.kind), h);
            h = fnv1a(e.detail, h);
        }
        return h;
    }

private:
    std::vector<TraceEvent> events_;
};

}  // namespace reconf
