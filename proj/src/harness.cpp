#include "reconf/harness.hpp"

#include <algorithm>
#include <functional>

#include "reconf/node.hpp"

namespace reconf {

namespace {

IdSet parse_id_list(const std::string& spec) {
    IdSet out;
    std::string cur;
    for (char c : spec + ",") {
        if (c == ',') {
            if (!cur.empty()) out.insert(static_cast<ProcessorId>(std::stol(cur)));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

ConfigValue parse_config_value(const std::string& spec) {
    if (spec == "hash") return ConfigValue::hash();
    if (spec == "bottom") return ConfigValue::bottom();
    if (spec == "empty") return ConfigValue::set(IdSet{});
    return ConfigValue::set(parse_id_list(spec));
}

bool parse_flag(const std::string& s) {
    return s == "on" || s == "true" || s == "1";
}

// Transient corruption used by the brute-force recovery scenarios: stale
// configurations, proposals and channel contents that the paper's stale
// types cover. Proposal sets include dead identifiers so installation paths
// terminate in type-4 resets rather than a legitimate minority replacement.
void inject_random_recsa(Rng& rng, Simulation& sim,
                         std::map<ProcessorId, std::unique_ptr<Node>>& nodes,
                         const IdSet& live) {
    std::vector<ProcessorId> ids(live.begin(), live.end());
    auto rand_id = [&] { return ids[rng.below(ids.size())]; };
    auto dead_id = [&] { return static_cast<ProcessorId>(90 + rng.below(8)); };
    auto rand_set = [&](bool with_dead) {
        IdSet s;
        std::size_t n = 1 + rng.below(ids.size());
        for (std::size_t i = 0; i < n; ++i) s.insert(rand_id());
        if (with_dead) s.insert(dead_id());
        return s;
    };

    for (ProcessorId p : live) {
        Node& node = *nodes.at(p);
        RecsaCore& sa = node.recsa();
        std::size_t corruptions = 1 + rng.below(3);
        for (std::size_t c = 0; c < corruptions; ++c) {
            ProcessorId slot = rng.below(2) == 0 ? p : rand_id();
            auto& s = sa.slot_mut(slot);
            switch (rng.below(6)) {
                case 0: s.config = ConfigValue::bottom(); break;
                case 1: s.config = ConfigValue::set(IdSet{}); break;
                case 2: s.config = ConfigValue::set(rand_set(true)); break;
                case 3:
                    s.prp = Proposal{0, rand_set(false)};  // type-1
                    break;
                case 4:
                    s.prp = Proposal{1, rand_set(true)};
                    break;
                case 5:
                    s.prp = Proposal{2, rand_set(true)};
                    s.all = rng.below(2) == 0;
                    break;
            }
        }
        if (rng.below(2) == 0) {
            IdSet seen;
            for (std::size_t i = 0; i < rng.below(ids.size() + 1); ++i)
                seen.insert(rand_id());
            sa.all_seen_mut() = seen;
        }
    }

    // Stale channel contents: raw garbage plus valid-epoch protocol records.
    for (ProcessorId a : live) {
        for (ProcessorId b : live) {
            if (a == b || rng.below(3) != 0) continue;
            if (rng.below(2) == 0) {
                Packet junk;
                junk.link_sender =
                    rng.below(4) == 0 ? dead_id() : a;  // label mismatch or stale
                junk.kind = Packet::Kind::Data;
                junk.epoch = rng.below(50);
                junk.seq = rng.below(1000);
                sim.inject_channel_packet(a, b, junk);
            } else {
                RecsaMessage m;
                m.fd_trusted = rand_set(rng.below(2) == 0);
                m.fd_part = m.fd_trusted;
                m.config = rng.below(3) == 0 ? ConfigValue::bottom()
                                             : ConfigValue::set(rand_set(true));
                m.prp = rng.below(2) == 0 ? Proposal{2, rand_set(true)}
                                          : Proposal::dflt();
                m.all = rng.below(2) == 0;
                m.echo_part = rand_set(false);
                m.echo_prp = Proposal::dflt();
                sim.inject_app_message(a, b, m);
            }
        }
    }
}

}  // namespace

Harness::Execution Harness::run_once(const Scenario& sc) {
    Execution ex;
    SimParams params;
    params.n_bound = sc.n_bound;
    params.cap = sc.cap;
    params.seed = sc.seed;
    params.step_budget = sc.budget;
    params.fairness_window = sc.window;
    params.adversary.loss_permille = sc.loss_permille;
    params.adversary.dup_permille = sc.dup_permille;
    Simulation sim(params, &ex.trace);
    Rng inject_rng(sc.seed * 0x9E3779B97F4A7C15ULL + 0x243F6A8885A308D3ULL);

    // Processors that join mid-run boot when their join event fires.
    IdSet late;
    for (const ScenarioEvent& ev : sc.events)
        if (ev.kind == "join")
            late.insert(static_cast<ProcessorId>(std::stol(ev.args[0])));

    std::map<ProcessorId, std::unique_ptr<Node>> nodes;
    IdSet initial;
    for (ProcessorId p : sc.nodes)
        if (!late.contains(p)) initial.insert(p);
    for (ProcessorId p : initial) {
        nodes[p] = std::make_unique<Node>(p, &sim, &ex.trace, sc.modules,
                                          sc.fd_mode);
        sim.add_processor(p, nodes[p].get());
        ex.trace.record(0, p, EventKind::Boot, "initial");
    }
    if (sc.init_converged) {
        for (ProcessorId p : initial)
            nodes[p]->init_converged(sc.init_config, initial);
        sim.init_established_links();
    } else {
        for (ProcessorId a : initial)
            for (ProcessorId b : initial)
                if (a < b) sim.establish_link(a, b);
    }

    // Marks the receive count after which a member's label state must again
    // be free of non-member creators (Lemma staleInfo's "first receive").
    std::map<ProcessorId, int64_t> purity_rx_mark;

    auto apply_event = [&](const ScenarioEvent& ev) {
        auto node_of = [&](const std::string& arg) -> Node& {
            ProcessorId p = static_cast<ProcessorId>(std::stol(arg));
            auto it = nodes.find(p);
            if (it == nodes.end())
                throw ScenarioError(sc.name + ":" + std::to_string(ev.line) +
                                    ": processor " + arg + " not active yet");
            return *it->second;
        };
        auto for_targets = [&](const std::function<void(Node&)>& fn) {
            if (!ev.args.empty() && ev.args[0] == "all") {
                for (auto& [p, n] : nodes)
                    if (sim.is_live(p)) fn(*n);
            } else {
                fn(node_of(ev.args[0]));
            }
        };
        if (ev.kind == "crash") {
            sim.crash(static_cast<ProcessorId>(std::stol(ev.args[0])));
        } else if (ev.kind == "crash-crd") {
            // Crashes the processor most participants currently follow.
            std::map<ProcessorId, int> votes;
            for (auto& [p, n] : nodes) {
                if (!sim.is_live(p) || !n->options().vs) continue;
                ProcessorId c = n->vs().current_crd();
                if (c != kNoProcessor) ++votes[c];
            }
            ProcessorId best = kNoProcessor;
            int most = 0;
            for (auto& [c, v] : votes)
                if (v > most || (v == most && c > best)) {
                    best = c;
                    most = v;
                }
            if (best != kNoProcessor && sim.is_live(best)) {
                ex.trace.record(sim.now(), best, EventKind::CheckerNote,
                                "crash-crd");
                sim.crash(best);
            }
        } else if (ev.kind == "join") {
            ProcessorId p = static_cast<ProcessorId>(std::stol(ev.args[0]));
            nodes[p] = std::make_unique<Node>(p, &sim, &ex.trace, sc.modules,
                                              sc.fd_mode);
            sim.add_processor(p, nodes[p].get());
            ex.trace.record(sim.now(), p, EventKind::Boot, "join");
            for (ProcessorId q : sim.live_set())
                if (q != p) sim.establish_link(p, q);
        } else if (ev.kind == "estab") {
            IdSet s;
            for (std::size_t i = 1; i < ev.args.size(); ++i)
                s.insert(static_cast<ProcessorId>(std::stol(ev.args[i])));
            node_of(ev.args[0]).recsa().estab(s);
        } else if (ev.kind == "pass") {
            for_targets([&](Node& n) { n.set_pass_flag(parse_flag(ev.args[1])); });
        } else if (ev.kind == "evalconf") {
            for_targets([&](Node& n) { n.set_eval_conf(parse_flag(ev.args[1])); });
        } else if (ev.kind == "evalconfig") {
            for_targets(
                [&](Node& n) { n.set_eval_config(parse_flag(ev.args[1])); });
        } else if (ev.kind == "admit") {
            for_targets([&](Node& n) { n.set_admit(parse_flag(ev.args[1])); });
        } else if (ev.kind == "input") {
            node_of(ev.args[0]).push_input(ev.args[1]);
        } else if (ev.kind == "increment") {
            node_of(ev.args[0]).request_increment();
        } else if (ev.kind == "fd") {
            FdMode m = ev.args[0] == "admissible" ? FdMode::Admissible
                                                  : FdMode::Unreliable;
            for (auto& [p, n] : nodes) n->set_fd_mode(m);
        } else if (ev.kind == "inject-config") {
            Node& n = node_of(ev.args[0]);
            ProcessorId slot = static_cast<ProcessorId>(std::stol(ev.args[1]));
            n.recsa().slot_mut(slot).config = parse_config_value(ev.args[2]);
            ex.trace.record(sim.now(), n.id(), EventKind::Inject,
                            "config[" + ev.args[1] + "]=" + ev.args[2]);
        } else if (ev.kind == "inject-prp") {
            Node& n = node_of(ev.args[0]);
            ProcessorId slot = static_cast<ProcessorId>(std::stol(ev.args[1]));
            Proposal p;
            p.phase = static_cast<int>(std::stol(ev.args[2]));
            if (ev.args[3] != "bottom") p.set = parse_id_list(ev.args[3]);
            n.recsa().slot_mut(slot).prp = p;
            ex.trace.record(sim.now(), n.id(), EventKind::Inject,
                            "prp[" + ev.args[1] + "]=" + p.str());
        } else if (ev.kind == "inject-flags") {
            Node& n = node_of(ev.args[0]);
            ProcessorId k = static_cast<ProcessorId>(std::stol(ev.args[1]));
            n.recma().inject_flags(k, parse_flag(ev.args[2]),
                                   parse_flag(ev.args[3]));
            ex.trace.record(sim.now(), n.id(), EventKind::Inject,
                            "flags[" + ev.args[1] + "]");
        } else if (ev.kind == "inject-taint") {
            Node& n = node_of(ev.args[0]);
            n.inject_taint(ev.args.size() > 1 ? ev.args[1] : "stale");
            ex.trace.record(sim.now(), n.id(), EventKind::Inject, "taint");
        } else if (ev.kind == "inject-counterseq") {
            Node& n = node_of(ev.args[0]);
            n.pend_counter_seqn(std::stoll(ev.args[1]));
        } else if (ev.kind == "inject-label") {
            Node& n = node_of(ev.args[0]);
            ProcessorId creator =
                static_cast<ProcessorId>(std::stol(ev.args[1]));
            EpochLabel foreign{creator, 1, IdSet{2, 3}};
            LabelPair lp{foreign, std::nullopt};
            auto& maxm = n.labels().max_mut();
            if (!maxm.empty()) maxm.begin()->second = lp;
            auto& stored = n.labels().stored_mut();
            if (!stored.empty()) stored.begin()->second.push_front(lp);
            purity_rx_mark[n.id()] = n.labels_rx() + 1;
            ex.trace.record(sim.now(), n.id(), EventKind::Inject,
                            "label by " + ev.args[1]);
        } else if (ev.kind == "inject-packet") {
            ProcessorId a = static_cast<ProcessorId>(std::stol(ev.args[0]));
            ProcessorId b = static_cast<ProcessorId>(std::stol(ev.args[1]));
            Packet junk;
            junk.link_sender = a;
            junk.kind = Packet::Kind::Data;
            junk.epoch = inject_rng.below(50);
            junk.seq = inject_rng.below(1000);
            sim.inject_channel_packet(a, b, junk);
            ex.trace.record(sim.now(), a, EventKind::Inject,
                            "packet ->" + ev.args[1]);
        } else if (ev.kind == "inject-random-recsa") {
            inject_random_recsa(inject_rng, sim, nodes, sim.live_set());
            ex.trace.record(sim.now(), kNoProcessor, EventKind::Inject,
                            "random recsa state");
        } else {
            throw ScenarioError(sc.name + ":" + std::to_string(ev.line) +
                                ": unknown event '" + ev.kind + "'");
        }
    };

    // Per-step observation caches.
    std::map<ProcessorId, unsigned> stale_cache;
    std::map<ProcessorId, std::string> config_cache;
    std::vector<std::pair<ProcessorId, int>> degree_cache;
    std::map<ProcessorId, bool> purity_cache;
    bool reco_cache = false;
    std::size_t events_seen = 0;

    auto poll = [&]() {
        Step now = sim.now();
        IdSet live = sim.live_set();
        bool reco = false;
        std::vector<std::pair<ProcessorId, int>> degrees;
        for (ProcessorId p : live) {
            Node& n = *nodes.at(p);
            unsigned mask = n.recsa().detect_stale();
            auto it = stale_cache.find(p);
            if (it == stale_cache.end() || it->second != mask) {
                stale_cache[p] = mask;
                ex.trace.stale_snapshots.push_back(StaleSnapshot{p, now, mask});
            }
            ConfigValue cfg = n.recsa().config();
            std::string cs = cfg.str();
            auto ic = config_cache.find(p);
            if (ic == config_cache.end() || ic->second != cs) {
                config_cache[p] = cs;
                ex.trace.config_snapshots.push_back(ConfigSnapshot{p, now, cfg});
            }
            if (!n.recsa().prp().is_default() || cfg.is_bottom()) reco = true;
            if (n.recsa().fd_part().contains(p) && !n.recsa().prp().is_default())
                degrees.emplace_back(p, n.recsa().degree_of(p));
            if (n.options().labels && cfg.is_set() && cfg.members().contains(p)) {
                int64_t mark =
                    purity_rx_mark.count(p) ? purity_rx_mark[p] : 0;
                bool due = n.labels_rx() > mark;
                bool dirty =
                    due && (n.labels().holds_nonmember_label(cfg.members()) ||
                            (n.options().counters &&
                             n.counters().holds_nonmember_label(cfg.members())));
                bool was = purity_cache.count(p) ? purity_cache[p] : false;
                if (dirty && !was)
                    ex.trace.record(now, p, EventKind::CheckerNote,
                                    "nonmember-label in state");
                purity_cache[p] = dirty;
            }
        }
        if (degrees != degree_cache) {
            degree_cache = degrees;
            ex.trace.degree_snapshots.push_back(DegreeSnapshot{now, degrees});
        }
        if (reco != reco_cache) {
            reco_cache = reco;
            ex.trace.record(now, kNoProcessor, EventKind::CheckerNote,
                            reco ? "reco 1" : "reco 0");
        }
        // Capture the replica state at a coordinator-led delicate trigger.
        const auto& evs = ex.trace.events();
        for (; events_seen < evs.size(); ++events_seen) {
            const TraceEvent& e = evs[events_seen];
            if (e.kind == EventKind::RecmaTrigger &&
                e.detail.rfind("delicate", 0) == 0 && nodes.count(e.proc)) {
                ex.trace.record(now, e.proc, EventKind::CheckerNote,
                                "drainstate " +
                                    nodes.at(e.proc)->app_state().str());
            }
        }
    };

    std::size_t next_event = 0;
    poll();
    while (!sim.halted()) {
        while (next_event < sc.events.size() &&
               sc.events[next_event].step <= sim.now()) {
            apply_event(sc.events[next_event]);
            ++next_event;
        }
        sim.step();
        poll();
    }

    ex.final_live = sim.live_set();
    for (const auto& [p, n] : nodes) {
        FinalNode f;
        f.live = sim.is_live(p);
        f.participant = n->recsa().is_participant();
        f.config = n->recsa().config();
        f.prp = n->recsa().prp();
        f.stale_mask = n->recsa().detect_stale();
        f.tainted = n->tainted();
        f.app_log = n->app_state().str();
        f.vs_crd = n->options().vs ? n->vs().current_crd() : kNoProcessor;
        ex.finals[p] = f;
    }
    return ex;
}

Harness::RunResult Harness::run(Scenario sc, const Overrides& overrides) {
    if (overrides.seed) sc.seed = *overrides.seed;
    if (overrides.budget) sc.budget = *overrides.budget;
    std::vector<std::string> selected =
        overrides.checkers.empty() ? sc.checkers : overrides.checkers;
    for (const std::string& c : selected)
        if (!checker_exists(c)) throw ScenarioError("unknown checker '" + c + "'");

    RunResult result;
    Execution ex = run_once(sc);
    result.final_live = ex.final_live;
    result.finals = ex.finals;
    result.trace_digest = ex.trace.digest();

    RunContext ctx;
    ctx.scenario = &sc;
    ctx.final_live = ex.final_live;
    ctx.finals = ex.finals;
    ctx.budget = sc.budget;

    for (const std::string& name : selected) {
        Verdict v;
        if (name == "determinism") {
            Execution again = run_once(sc);
            v.checker = name;
            v.pass = again.trace.digest() == result.trace_digest;
            if (!v.pass) v.witness = "replay digest differs";
            v.measured["digest"] =
                static_cast<int64_t>(result.trace_digest & 0x7fffffffffffffff);
        } else {
            v = run_checker(name, ex.trace, ctx);
        }
        result.all_pass = result.all_pass && v.pass;
        result.verdicts.push_back(std::move(v));
    }
    result.scenario = std::move(sc);
    result.trace = std::move(ex.trace);
    return result;
}

}  // namespace reconf
