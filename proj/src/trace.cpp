#include "reconf/trace.hpp"

namespace reconf {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Tick: return "tick";
        case EventKind::LinkSend: return "send";
        case EventKind::PacketDeliver: return "deliver";
        case EventKind::PacketDrop: return "drop";
        case EventKind::PacketDup: return "dup";
        case EventKind::LinkClean: return "linkclean";
        case EventKind::Crash: return "crash";
        case EventKind::Boot: return "boot";
        case EventKind::Inject: return "inject";
        case EventKind::ConfigSet: return "configset";
        case EventKind::ConfigChange: return "config";
        case EventKind::PhaseChange: return "phase";
        case EventKind::EstabCall: return "estab";
        case EventKind::Participate: return "participate";
        case EventKind::StaleChange: return "stale";
        case EventKind::RecmaTrigger: return "trigger";
        case EventKind::PassGranted: return "pass";
        case EventKind::NextLabel: return "nextlabel";
        case EventKind::QueueFlush: return "queueflush";
        case EventKind::IncStart: return "incstart";
        case EventKind::IncComplete: return "inccomplete";
        case EventKind::IncAbort: return "incabort";
        case EventKind::ViewInstall: return "viewinstall";
        case EventKind::RoundAdvance: return "round";
        case EventKind::SuspendChange: return "suspend";
        case EventKind::Fetch: return "fetch";
        case EventKind::DeliverBatch: return "deliverbatch";
        case EventKind::CheckerNote: return "note";
    }
    return "?";
}

}  // namespace reconf
