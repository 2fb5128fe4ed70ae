#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reconf/config_value.hpp"
#include "reconf/counter_types.hpp"
#include "reconf/epoch_label.hpp"
#include "reconf/ids.hpp"

namespace reconf {

// Replicated application state: an append log. Every delivered message is
// observable, which is what makes the virtual-synchrony checker mechanical.
struct AppState {
    std::vector<std::string> log;

    friend bool operator==(const AppState&, const AppState&) = default;

    std::string str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < log.size(); ++i) {
            if (i) s += '|';
            s += log[i];
        }
        s += ']';
        return s;
    }
};

struct ViewTag {
    CounterTriple id;
    IdSet set;

    friend bool operator==(const ViewTag&, const ViewTag&) = default;
    std::string str() const { return "V(" + id.str() + ";" + set.str() + ")"; }
};

enum class VsStatus { Multicast, Propose, Install };

inline const char* vs_status_name(VsStatus s) {
    switch (s) {
        case VsStatus::Multicast: return "Multicast";
        case VsStatus::Propose: return "Propose";
        case VsStatus::Install: return "Install";
    }
    return "?";
}

// The full replicated-state record exchanged by the VS SMR algorithm.
struct VsRecord {
    ViewTag view;
    VsStatus status = VsStatus::Multicast;
    int64_t rnd = 0;
    AppState replica;
    std::map<ProcessorId, std::string> msg;  // absent entry = ⊥
    std::optional<std::string> input;
    ViewTag propV;
    bool no_crd = true;
    bool suspend = false;
    bool reconf_ready = false;
    bool admit = true;  // coordinator's joiner-admission flag

    friend bool operator==(const VsRecord&, const VsRecord&) = default;

    std::string str() const {
        std::string s = "VS(" + view.str() + ";" + vs_status_name(status) + ";r" +
                        std::to_string(rnd) + ";" + replica.str() + ";m{";
        bool first = true;
        for (const auto& [k, v] : msg) {
            if (!first) s += ',';
            first = false;
            s += std::to_string(k) + ":" + v;
        }
        s += "};in:" + (input ? *input : "_") + ";" + propV.str() +
             (no_crd ? ";noCrd" : "") + (suspend ? ";susp" : "") +
             (reconf_ready ? ";ready" : "") + (admit ? ";admit" : "") + ")";
        return s;
    }
};

// recSA broadcast: the sender's triple plus the receiver-specific echo triple.
struct RecsaMessage {
    IdSet fd_trusted;
    IdSet fd_part;
    ConfigValue config;
    Proposal prp;
    bool all = false;
    IdSet echo_part;
    Proposal echo_prp;
    bool echo_all = false;

    std::string str() const {
        return "recsa(fd:" + fd_trusted.str() + ";part:" + fd_part.str() +
               ";cfg:" + config.str() + ";prp:" + prp.str() +
               ";all:" + (all ? "1" : "0") + ";echo:(" + echo_part.str() + "," +
               echo_prp.str() + "," + (echo_all ? "1" : "0") + "))";
    }
};

struct RecmaMessage {
    bool no_maj = false;
    bool need_reconf = false;

    std::string str() const {
        return std::string("recma(") + (no_maj ? "noMaj" : "maj") + "," +
               (need_reconf ? "need" : "ok") + ")";
    }
};

struct JoinRequest {
    std::string str() const { return "join?"; }
};

struct JoinReply {
    bool pass = false;
    AppState state;

    std::string str() const {
        return std::string("pass(") + (pass ? "1" : "0") + ";" + state.str() + ")";
    }
};

struct LabelMessage {
    LabelPair sent_max;
    LabelPair last_sent;

    std::string str() const {
        return "lbl(" + sent_max.str() + ";" + last_sent.str() + ")";
    }
};

struct CounterMessage {
    CounterPair sent_max;
    CounterPair last_sent;

    std::string str() const {
        return "cnt(" + sent_max.str() + ";" + last_sent.str() + ")";
    }
};

struct CounterReadRequest {
    int64_t session = 0;
    std::string str() const { return "majRead?" + std::to_string(session); }
};

struct CounterReadReply {
    int64_t session = 0;
    bool abort = false;
    CounterPair value;
    std::string str() const {
        return "majRead!" + std::to_string(session) +
               (abort ? ":Abort" : ":" + value.str());
    }
};

struct CounterWriteRequest {
    int64_t session = 0;
    CounterTriple value;
    std::string str() const {
        return "majWrite?" + std::to_string(session) + ":" + value.str();
    }
};

struct CounterWriteReply {
    int64_t session = 0;
    bool abort = false;
    std::string str() const {
        return "majWrite!" + std::to_string(session) + (abort ? ":Abort" : ":ACK");
    }
};

struct VsMessage {
    VsRecord state;
    std::string str() const { return state.str(); }
};

using Message =
    std::variant<RecsaMessage, RecmaMessage, JoinRequest, JoinReply,
                 LabelMessage, CounterMessage, CounterReadRequest,
                 CounterReadReply, CounterWriteRequest, CounterWriteReply,
                 VsMessage>;

inline std::string describe(const Message& m) {
    return std::visit([](const auto& x) { return x.str(); }, m);
}

}  // namespace reconf
