#include "reconf/node.hpp"

namespace reconf {

Node::Node(ProcessorId id, Simulation* sim, Trace* trace, Options opt, FdMode mode)
    : id_(id),
      sim_(sim),
      trace_(trace),
      opt_(opt),
      fd_mode_(mode),
      hb_(id, sim->n_bound() > 0 ? sim->n_bound() : 64, opt.gap_factor),
      recsa_(id),
      recma_(id),
      joining_(id),
      labels_(id, sim->cap()),
      counters_(id, sim->cap(), opt.seqn_bits),
      vs_(id) {
    recsa_.hooks.on_config_set = [this](const ConfigValue& v) {
        trace_->record(sim_->now(), id_, EventKind::ConfigSet, v.str());
    };
    recsa_.hooks.on_config_changed = [this](const ConfigValue& v) {
        trace_->record(sim_->now(), id_, EventKind::ConfigChange, v.str());
    };
    recsa_.hooks.on_phase_change = [this](const Proposal& p) {
        trace_->record(sim_->now(), id_, EventKind::PhaseChange, p.str());
    };
    recsa_.hooks.on_estab = [this](const IdSet& s, bool effective) {
        trace_->record(sim_->now(), id_, EventKind::EstabCall,
                       s.str() + (effective ? " effective" : " ineffective"));
    };
    recsa_.hooks.on_participate = [this] {
        trace_->record(sim_->now(), id_, EventKind::Participate,
                       recsa_.config().str());
    };
    recma_.hooks.on_trigger = [this](const char* cause, const IdSet& s) {
        trace_->record(sim_->now(), id_, EventKind::RecmaTrigger,
                       std::string(cause) + " " + s.str());
    };
    recma_.eval_conf = [this](const ConfigValue&) { return eval_conf_flag_; };
    joining_.hooks.on_reset_vars = [this] {
        if (opt_.vs)
            vs_.record_mut() = VsRecord{};
        else
            app_ = AppState{};
    };
    joining_.hooks.on_init_vars = [this](const std::vector<AppState>& states) {
        AppState chosen;
        for (const AppState& s : states) {
            if (s.log.size() > chosen.log.size() ||
                (s.log.size() == chosen.log.size() && s.log < chosen.log))
                chosen = s;
        }
        if (opt_.vs)
            vs_.set_replica(chosen);
        else
            app_ = chosen;
    };
    joining_.hooks.on_became_participant = [this] {
        trace_->record(sim_->now(), id_, EventKind::PassGranted, "joined");
    };
    joining_.exchanged_with = [this](ProcessorId peer) {
        return sim_->link_running(id_, peer) &&
               sim_->exchanges_completed(id_, peer) >= 1;
    };
    labels_.hooks.on_next_label = [this](const EpochLabel& l) {
        trace_->record(sim_->now(), id_, EventKind::NextLabel, l.str());
    };
    labels_.hooks.on_queue_flush = [this] {
        trace_->record(sim_->now(), id_, EventKind::QueueFlush, "labels");
    };
    counters_.hooks.on_next_label = [this](const EpochLabel& l) {
        trace_->record(sim_->now(), id_, EventKind::NextLabel,
                       "counter " + l.str());
    };
    counters_.hooks.on_queue_flush = [this] {
        trace_->record(sim_->now(), id_, EventKind::QueueFlush, "counters");
    };
    vs_.eval_config = [this] { return eval_config_flag_; };
    vs_.request_counter = [this] { return vs_counter_request(); };
    vs_.fetch = [this]() -> std::optional<std::string> {
        if (inputs_.empty()) return std::nullopt;
        std::string s = inputs_.front();
        inputs_.pop_front();
        return s;
    };
    vs_.hooks.on_view_install = [this](const ViewTag& v) {
        trace_->record(sim_->now(), id_, EventKind::ViewInstall, v.str());
        trace_->view_installs.push_back(ViewInstallRecord{
            id_, sim_->now(), v.id, v.set, vs_.record().replica.str()});
    };
    vs_.hooks.on_round = [this](int64_t rnd) {
        trace_->record(sim_->now(), id_, EventKind::RoundAdvance,
                       std::to_string(rnd));
    };
    vs_.hooks.on_suspend = [this](bool v) {
        trace_->record(sim_->now(), id_, EventKind::SuspendChange, v ? "1" : "0");
    };
    vs_.hooks.on_fetch = [this](const std::string& s) {
        trace_->record(sim_->now(), id_, EventKind::Fetch, s);
    };
    vs_.hooks.on_deliver = [this](const ViewTag& view, int64_t rnd,
                                  const std::vector<std::string>& msgs) {
        std::string joined;
        for (const auto& m : msgs) joined += m + ";";
        trace_->record(sim_->now(), id_, EventKind::DeliverBatch,
                       view.str() + " r" + std::to_string(rnd) + " " + joined);
        trace_->deliveries.push_back(
            DeliveryRecord{id_, sim_->now(), view.id, view.set, rnd, msgs});
    };
    if (opt_.vs)
        recma_.delicate_override = [this] { return vs_.need_delicate_reconf(); };
}

IdSet Node::current_fd() const {
    if (fd_mode_ == FdMode::Admissible) return sim_->live_set();
    return hb_.trusted();
}

const AppState& Node::app_state() const {
    return opt_.vs ? vs_.record().replica : app_;
}

bool Node::tainted() const {
    for (const std::string& s : app_state().log)
        if (s.find("TAINT") != std::string::npos) return true;
    return false;
}

void Node::inject_taint(const std::string& text) {
    if (opt_.vs)
        vs_.record_mut().replica.log.push_back("TAINT:" + text);
    else
        app_.log.push_back("TAINT:" + text);
}

void Node::init_converged(const IdSet& config_members, const IdSet& live) {
    recsa_.set_fd(live);
    auto& self_slot = recsa_.slot_mut(id_);
    self_slot.config = ConfigValue::set(config_members);
    self_slot.prp = Proposal::dflt();
    self_slot.all = false;
    for (ProcessorId j : live) {
        if (j == id_) continue;
        auto& s = recsa_.slot_mut(j);
        s.have_fd = true;
        s.fd_trusted = live;
        s.fd_part = live;
        s.config = ConfigValue::set(config_members);
        s.prp = Proposal::dflt();
        s.all = false;
        s.have_echo = true;
        s.echo_part = live;
        s.echo_prp = Proposal::dflt();
        s.echo_all = false;
    }
}

ProcessorId Node::own_crd() const {
    return opt_.vs ? vs_.current_crd() : kNoProcessor;
}

void Node::on_heartbeat(ProcessorId from) { hb_.on_heartbeat(from); }

void Node::on_peer_crd(ProcessorId from, ProcessorId crd) {
    fd_crd_[from] = crd;
}

void Node::drain_session(CounterCore::SessionOutput out) {
    for (auto& [dst, msg] : out.messages) dispatch_send(dst, std::move(msg));
    note_session_result();
}

void Node::note_session_result() {
    auto result = counters_.take_result();
    if (!result) return;
    IncrementRecord rec;
    rec.proc = id_;
    rec.start_step = result->started;
    rec.end_step = sim_->now();
    rec.completed = result->completed;
    rec.member = result->member;
    rec.result = result->value;
    trace_->increments.push_back(rec);
    trace_->record(sim_->now(), id_,
                   result->completed ? EventKind::IncComplete : EventKind::IncAbort,
                   result->completed ? result->value.str() : "bottom");
    if (session_for_vs_) {
        if (result->completed) vs_counter_cache_ = result->value;
        session_for_vs_ = false;
    }
}

std::optional<CounterTriple> Node::vs_counter_request() {
    if (vs_counter_cache_) {
        auto ct = vs_counter_cache_;
        vs_counter_cache_.reset();
        return ct;
    }
    if (!counters_.session_active()) {
        auto out = counters_.start_increment(recsa_, sim_->now());
        if (out) {
            session_for_vs_ = true;
            trace_->record(sim_->now(), id_, EventKind::IncStart, "vs");
            drain_session(std::move(*out));
        }
    }
    return std::nullopt;
}

void Node::run_tick(int source) {
    switch (source) {
        case 0: {  // recSA do-forever iteration
            auto msgs = recsa_.loop_iteration(current_fd());
            for (auto& [dst, m] : msgs) dispatch_send(dst, RecsaMessage(m));
            break;
        }
        case 1: {  // recMA
            if (!opt_.recma) break;
            recma_.tick(recsa_);
            for (const auto& [dst, m] : recma_.outbox())
                dispatch_send(dst, RecmaMessage(m));
            break;
        }
        case 2: {  // joining
            if (!opt_.joining) break;
            auto reqs = joining_.tick(recsa_);
            for (auto& [dst, m] : reqs) dispatch_send(dst, m);
            break;
        }
        case 3: {  // label management
            if (!opt_.labels) break;
            labels_.management_tick(recsa_);
            break;
        }
        case 4: {  // label transmission
            if (!opt_.labels) break;
            if (auto tx = labels_.transmit_tick(recsa_))
                dispatch_send(tx->first, tx->second);
            break;
        }
        case 5: {  // counter management
            if (!opt_.counters) break;
            counters_.management_tick(recsa_);
            if (pending_seqn_bump_ &&
                recsa_.config().is_set() &&
                counters_.structures_match(recsa_.config().members())) {
                auto& own = counters_.max_mut()[id_];
                if (own.legit() && own.mct) {
                    own.mct->seqn = std::max(own.mct->seqn, *pending_seqn_bump_);
                    pending_seqn_bump_.reset();
                    trace_->record(sim_->now(), id_, EventKind::Inject,
                                   "counter seqn " + own.mct->str());
                }
            }
            if (pending_increments_ > 0 && !counters_.session_active()) {
                auto out = counters_.start_increment(recsa_, sim_->now());
                if (out) {
                    pending_increments_ -= 1;
                    trace_->record(sim_->now(), id_, EventKind::IncStart,
                                   "scripted");
                    drain_session(std::move(*out));
                }
            }
            break;
        }
        case 6: {  // counter transmission
            if (!opt_.counters) break;
            if (auto tx = counters_.transmit_tick(recsa_))
                dispatch_send(tx->first, tx->second);
            break;
        }
        case 7: {  // VS SMR
            if (!opt_.vs) break;
            auto msgs = vs_.tick(recsa_, fd_crd_);
            for (auto& [dst, m] : msgs) dispatch_send(dst, std::move(m));
            break;
        }
    }
}

void Node::on_message(ProcessorId from, const Message& m) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, RecsaMessage>) {
                recsa_.on_receive(from, msg);
            } else if constexpr (std::is_same_v<T, RecmaMessage>) {
                if (opt_.recma) recma_.on_receive(recsa_, from, msg);
            } else if constexpr (std::is_same_v<T, JoinRequest>) {
                if (!opt_.joining) return;
                bool pass = opt_.vs ? vs_.pass_query() : pass_flag_;
                auto reply = joining_.on_join_request(recsa_, from, pass,
                                                      app_state());
                if (reply) dispatch_send(from, *reply);
            } else if constexpr (std::is_same_v<T, JoinReply>) {
                if (opt_.joining) joining_.on_pass(recsa_, from, msg);
            } else if constexpr (std::is_same_v<T, LabelMessage>) {
                if (opt_.labels) {
                    labels_.on_receive(recsa_, from, msg);
                    ++labels_rx_;
                }
            } else if constexpr (std::is_same_v<T, CounterMessage>) {
                if (opt_.counters) counters_.on_receive(recsa_, from, msg);
            } else if constexpr (std::is_same_v<T, CounterReadRequest>) {
                if (opt_.counters)
                    dispatch_send(from, counters_.serve_read(recsa_, msg));
            } else if constexpr (std::is_same_v<T, CounterReadReply>) {
                if (opt_.counters)
                    drain_session(counters_.on_read_reply(recsa_, from, msg));
            } else if constexpr (std::is_same_v<T, CounterWriteRequest>) {
                if (opt_.counters)
                    dispatch_send(from, counters_.serve_write(recsa_, from, msg));
            } else if constexpr (std::is_same_v<T, CounterWriteReply>) {
                if (opt_.counters)
                    drain_session(counters_.on_write_reply(recsa_, from, msg));
            } else if constexpr (std::is_same_v<T, VsMessage>) {
                if (opt_.vs) vs_.on_receive(from, msg);
            }
        },
        m);
}

}  // namespace reconf
