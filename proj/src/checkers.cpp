#include "reconf/checkers.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace reconf {

namespace {

using CheckerFn = std::function<Verdict(const Trace&, const RunContext&)>;

std::string step_witness(Step s, ProcessorId p, const std::string& what) {
    return "step " + std::to_string(s) + " p" + std::to_string(p) + ": " + what;
}

// Theorem staleFreeExecution: from an arbitrary injected state there is a
// step after which detect_stale is empty at every live processor forever,
// and the brute-force path leaves every configuration equal to the trusted
// set.
Verdict check_convergence(const Trace& t, const RunContext& ctx) {
    Verdict v{"convergence"};
    Step last_bad = -1;
    ProcessorId bad_proc = kNoProcessor;
    unsigned bad_mask = 0;
    for (const StaleSnapshot& s : t.stale_snapshots) {
        if (s.mask != 0 && s.step > last_bad) {
            last_bad = s.step;
            bad_proc = s.proc;
            bad_mask = s.mask;
        }
    }
    // A nonzero mask "holds forever" if it was never observed returning to
    // zero; on-change snapshots mean the last record per processor tells.
    std::map<ProcessorId, unsigned> final_masks;
    for (const StaleSnapshot& s : t.stale_snapshots) final_masks[s.proc] = s.mask;
    for (ProcessorId p : ctx.final_live) {
        auto it = ctx.finals.find(p);
        if (it != ctx.finals.end() && it->second.stale_mask != 0) {
            v.pass = false;
            v.witness = step_witness(ctx.budget, p,
                                     "stale mask " +
                                         std::to_string(it->second.stale_mask) +
                                         " at budget end");
            return v;
        }
    }
    ConfigValue want = ConfigValue::set(ctx.final_live);
    for (ProcessorId p : ctx.final_live) {
        const FinalNode& f = ctx.finals.at(p);
        if (!(f.config == want)) {
            v.pass = false;
            v.witness = step_witness(ctx.budget, p,
                                     "final config " + f.config.str() +
                                         " != trusted set " + want.str());
            return v;
        }
    }
    v.pass = true;
    v.measured["convergence_step"] = last_bad + 1;
    return v;
}

// Theorem closure: starting stale-free, detect_stale stays empty at every
// step.
Verdict check_closure(const Trace& t, const RunContext& ctx) {
    Verdict v{"closure"};
    for (const StaleSnapshot& s : t.stale_snapshots) {
        if (s.mask != 0) {
            v.pass = false;
            v.witness = step_witness(s.step, s.proc,
                                     "stale mask " + std::to_string(s.mask));
            return v;
        }
    }
    v.pass = true;
    v.measured["violations"] = 0;
    return v;
}

Verdict check_conflict_freedom(const Trace& t, const RunContext& ctx) {
    Verdict v{"conflict_freedom"};
    std::optional<ConfigValue> common;
    for (ProcessorId p : ctx.final_live) {
        const FinalNode& f = ctx.finals.at(p);
        if (!f.participant) continue;
        if (!f.config.is_set()) {
            v.witness = step_witness(ctx.budget, p,
                                     "final config " + f.config.str());
            return v;
        }
        if (common && !(f.config == *common)) {
            v.witness = step_witness(ctx.budget, p,
                                     "config " + f.config.str() + " vs " +
                                         common->str());
            return v;
        }
        common = f.config;
    }
    v.pass = true;
    return v;
}

// Phase unison: any two live participants' non-default notification degrees
// differ by at most one, at every observed state.
Verdict check_unison(const Trace& t, const RunContext& ctx) {
    Verdict v{"unison"};
    for (const DegreeSnapshot& d : t.degree_snapshots) {
        if (d.degrees.size() < 2) continue;
        auto [lo, hi] = std::minmax_element(
            d.degrees.begin(), d.degrees.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
        if (hi->second - lo->second > 1) {
            v.witness = step_witness(
                d.step, hi->first,
                "degree gap " + std::to_string(hi->second) + " vs " +
                    std::to_string(lo->second) + " at p" +
                    std::to_string(lo->first));
            return v;
        }
    }
    v.pass = true;
    return v;
}

// Lemma convDeg / Claim invar: concurrent proposals select exactly one set,
// it is installed everywhere, and the system returns to phase 0.
Verdict check_single_install(const Trace& t, const RunContext& ctx) {
    Verdict v{"single_install"};
    std::vector<IdSet> proposed;
    for (const ScenarioEvent& ev : ctx.scenario->events) {
        if (ev.kind != "estab") continue;
        IdSet s;
        for (std::size_t i = 1; i < ev.args.size(); ++i)
            s.insert(static_cast<ProcessorId>(std::stol(ev.args[i])));
        proposed.push_back(s);
    }
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::ConfigSet &&
            e.detail.find("_|_") != std::string::npos) {
            v.witness = step_witness(e.step, e.proc, "reset during replacement");
            return v;
        }
    }
    std::optional<ConfigValue> common;
    for (ProcessorId p : ctx.final_live) {
        const FinalNode& f = ctx.finals.at(p);
        if (!f.config.is_set()) {
            v.witness = step_witness(ctx.budget, p, "final " + f.config.str());
            return v;
        }
        if (common && !(f.config == *common)) {
            v.witness = step_witness(ctx.budget, p,
                                     f.config.str() + " vs " + common->str());
            return v;
        }
        common = f.config;
        if (!f.prp.is_default()) {
            v.witness = step_witness(ctx.budget, p,
                                     "phase 0 not resumed: " + f.prp.str());
            return v;
        }
    }
    if (!common) {
        v.witness = "no live processors";
        return v;
    }
    bool matches = proposed.empty();
    for (const IdSet& s : proposed)
        if (common->members() == s) matches = true;
    if (!matches) {
        v.witness = "installed " + common->str() + " is not a proposed set";
        return v;
    }
    v.pass = true;
    return v;
}

Verdict check_trigger_liveness(const Trace& t, const RunContext& ctx) {
    Verdict v{"trigger_liveness"};
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::EstabCall &&
            e.detail.find(" effective") != std::string::npos) {
            v.pass = true;
            v.measured["estab_step"] = e.step;
            return v;
        }
    }
    v.witness = "no effective estab call within budget";
    return v;
}

// Lemma triggersControlled: between two installations, each participant
// triggers at most once per cause.
Verdict check_trigger_once(const Trace& t, const RunContext& ctx) {
    Verdict v{"trigger_once"};
    // Segment each processor's timeline by its configuration installations.
    std::map<ProcessorId, std::map<std::string, int>> counts;
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::ConfigChange) {
            counts[e.proc].clear();
        } else if (e.kind == EventKind::RecmaTrigger) {
            std::string cause = e.detail.substr(0, e.detail.find(' '));
            int n = ++counts[e.proc][cause];
            if (n > 1) {
                v.witness = step_witness(e.step, e.proc,
                                         "second '" + cause +
                                             "' trigger in one configuration");
                return v;
            }
        }
    }
    v.pass = true;
    return v;
}

// Lemma noAbruptConfigTriggered: total triggers bounded by N(1 + cap*N).
Verdict check_bounded_triggers(const Trace& t, const RunContext& ctx) {
    Verdict v{"bounded_triggers"};
    int64_t n = ctx.scenario->n_bound;
    int64_t bound = n * (1 + ctx.scenario->cap * n);
    int64_t count = 0;
    for (const TraceEvent& e : t.events)
        if (e.kind == EventKind::RecmaTrigger) ++count;
    v.measured["triggers"] = count;
    v.measured["bound"] = bound;
    if (count > bound) {
        v.witness = std::to_string(count) + " triggers exceed bound " +
                    std::to_string(bound);
        return v;
    }
    v.pass = true;
    return v;
}

Verdict check_join_liveness(const Trace& t, const RunContext& ctx) {
    Verdict v{"join_liveness"};
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::PassGranted && e.detail == "joined") {
            const FinalNode& f = ctx.finals.count(e.proc)
                                     ? ctx.finals.at(e.proc)
                                     : FinalNode{};
            if (!f.participant) {
                v.witness =
                    step_witness(e.step, e.proc, "joined but not a participant");
                return v;
            }
            v.pass = true;
            v.measured["join_step"] = e.step;
            return v;
        }
    }
    v.witness = "no processor completed a join";
    return v;
}

// Claim noReconfJoin: no participate() completes while a reconfiguration is
// observable anywhere.
Verdict check_join_reco_exclusion(const Trace& t, const RunContext& ctx) {
    Verdict v{"join_reco_exclusion"};
    bool reco = false;
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::CheckerNote && e.detail == "reco 1") reco = true;
        if (e.kind == EventKind::CheckerNote && e.detail == "reco 0") reco = false;
        if (e.kind == EventKind::PassGranted && e.detail == "joined" && reco) {
            v.witness = step_witness(e.step, e.proc, "joined mid-reconfiguration");
            return v;
        }
    }
    v.pass = true;
    return v;
}

// Lemma noReconfByJoiner: a completed join never carries injected state.
Verdict check_taint_free(const Trace& t, const RunContext& ctx) {
    Verdict v{"taint_free"};
    for (const auto& [p, f] : ctx.finals) {
        if (f.live && f.tainted) {
            v.witness = step_witness(ctx.budget, p, "tainted state: " + f.app_log);
            return v;
        }
    }
    v.pass = true;
    return v;
}

// Lemma staleInfo: after the first receive-inclusive iteration no member
// state holds a label created by a non-member.
Verdict check_label_purity(const Trace& t, const RunContext& ctx) {
    Verdict v{"label_purity"};
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::CheckerNote &&
            e.detail.rfind("nonmember-label", 0) == 0) {
            v.witness = step_witness(e.step, e.proc, e.detail);
            return v;
        }
    }
    v.pass = true;
    return v;
}

int64_t count_label_creations(const Trace& t, bool counter_module, Step from) {
    int64_t n = 0;
    for (const TraceEvent& e : t.events) {
        if (e.kind != EventKind::NextLabel || e.step < from) continue;
        bool is_counter = e.detail.rfind("counter ", 0) == 0;
        if (is_counter == counter_module) ++n;
    }
    return n;
}

// Theorem thL:uniqueLabel, arbitrary start: creations <= c*N(N^2+m).
Verdict check_label_creation_bound(const Trace& t, const RunContext& ctx) {
    Verdict v{"label_creation_bound"};
    int64_t n = ctx.scenario->n_bound;
    int64_t m = ctx.scenario->cap * std::max<int64_t>(0, n - 1);
    const int64_t c = 2;
    int64_t bound = c * n * (n * n + m);
    int64_t count = count_label_creations(t, false, 0) +
                    count_label_creations(t, true, 0);
    v.measured["creations"] = count;
    v.measured["bound"] = bound;
    if (count > bound) {
        v.witness = std::to_string(count) + " label creations exceed " +
                    std::to_string(bound);
        return v;
    }
    v.pass = true;
    return v;
}

// Theorem thL:uniqueLabel, post-reconfiguration: creations <= c*N^2 counted
// from the replacement trigger.
Verdict check_label_creation_bound_postreconf(const Trace& t,
                                              const RunContext& ctx) {
    Verdict v{"label_creation_bound_postreconf"};
    Step from = 0;
    for (const TraceEvent& e : t.events)
        if (e.kind == EventKind::EstabCall &&
            e.detail.find(" effective") != std::string::npos) {
            from = e.step;
            break;
        }
    int64_t n = ctx.scenario->n_bound;
    const int64_t c = 2;
    int64_t bound = c * n * n;
    int64_t count = count_label_creations(t, false, from) +
                    count_label_creations(t, true, from);
    v.measured["creations"] = count;
    v.measured["bound"] = bound;
    v.measured["from_step"] = from;
    if (count > bound) {
        v.witness = std::to_string(count) + " post-reconfiguration creations exceed " +
                    std::to_string(bound);
        return v;
    }
    v.pass = true;
    return v;
}

// Theorem thCNT:finalApp: sequentially ordered completed increments are
// strictly ≺_ct ordered; aborted calls return Bottom and are excluded.
Verdict check_counter_monotonicity(const Trace& t, const RunContext& ctx) {
    Verdict v{"counter_monotonicity"};
    std::vector<const IncrementRecord*> done;
    int64_t aborted = 0;
    for (const IncrementRecord& r : t.increments)
        if (r.completed)
            done.push_back(&r);
        else
            ++aborted;
    for (const IncrementRecord* a : done) {
        for (const IncrementRecord* b : done) {
            if (a->end_step >= b->start_step) continue;
            if (counter_cmp(a->result, b->result) != Cmp::Less) {
                v.witness = "p" + std::to_string(a->proc) + " " +
                            a->result.str() + " (ends " +
                            std::to_string(a->end_step) + ") !< p" +
                            std::to_string(b->proc) + " " + b->result.str() +
                            " (starts " + std::to_string(b->start_step) + ")";
                return v;
            }
        }
    }
    v.measured["completed"] = static_cast<int64_t>(done.size());
    v.measured["aborted"] = aborted;
    v.pass = true;
    return v;
}

// Concurrent completed increments from the same maximum are ordered by wid.
Verdict check_counter_wid_order(const Trace& t, const RunContext& ctx) {
    Verdict v{"counter_wid_order"};
    std::vector<const IncrementRecord*> done;
    for (const IncrementRecord& r : t.increments)
        if (r.completed) done.push_back(&r);
    for (std::size_t i = 0; i < done.size(); ++i) {
        for (std::size_t j = i + 1; j < done.size(); ++j) {
            if (counter_cmp(done[i]->result, done[j]->result) == Cmp::Equal) {
                v.witness = "equal counters " + done[i]->result.str() +
                            " returned to p" + std::to_string(done[i]->proc) +
                            " and p" + std::to_string(done[j]->proc);
                return v;
            }
        }
    }
    v.pass = true;
    return v;
}

// Virtual synchrony: processors present in two consecutive installed views
// deliver equal message multisets in the earlier view.
Verdict check_vs_synchrony(const Trace& t, const RunContext& ctx) {
    Verdict v{"vs_synchrony"};
    // Installed views in order of first installation.
    std::vector<std::pair<std::string, const ViewInstallRecord*>> views;
    for (const ViewInstallRecord& r : t.view_installs) {
        std::string key = r.view_id.str();
        bool known = false;
        for (auto& [k, rec] : views) known = known || k == key;
        if (!known) views.emplace_back(key, &r);
    }
    auto delivered = [&](ProcessorId p, const std::string& view_key) {
        std::vector<std::string> out;
        for (const DeliveryRecord& d : t.deliveries)
            if (d.proc == p && d.view_id.str() == view_key)
                for (const std::string& m : d.msgs) out.push_back(m);
        std::sort(out.begin(), out.end());
        return out;
    };
    for (std::size_t i = 0; i + 1 < views.size(); ++i) {
        const ViewInstallRecord* v1 = views[i].second;
        const ViewInstallRecord* v2 = views[i + 1].second;
        IdSet both = v1->view_set.intersect(v2->view_set);
        std::optional<std::vector<std::string>> expect;
        ProcessorId first = kNoProcessor;
        for (ProcessorId p : both) {
            auto got = delivered(p, views[i].first);
            if (!expect) {
                expect = got;
                first = p;
            } else if (got != *expect) {
                v.witness = "view " + views[i].first + ": p" +
                            std::to_string(p) + " delivered " +
                            std::to_string(got.size()) + " msgs vs p" +
                            std::to_string(first) + " " +
                            std::to_string(expect->size());
                return v;
            }
        }
    }
    v.measured["views"] = static_cast<int64_t>(views.size());
    v.pass = true;
    return v;
}

// Replica state survives a coordinator-initiated delicate reconfiguration.
Verdict check_vs_state_preservation(const Trace& t, const RunContext& ctx) {
    Verdict v{"vs_state_preservation"};
    Step trigger = -1;
    std::string drained;
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::CheckerNote &&
            e.detail.rfind("drainstate ", 0) == 0) {
            trigger = e.step;
            drained = e.detail.substr(std::string("drainstate ").size());
        }
    }
    if (trigger < 0) {
        v.witness = "no coordinator-led reconfiguration observed";
        return v;
    }
    for (const ViewInstallRecord& r : t.view_installs) {
        if (r.step <= trigger) continue;
        if (r.replica_digest != drained) {
            v.witness = step_witness(r.step, r.proc,
                                     "installed replica " + r.replica_digest +
                                         " != drained " + drained);
            return v;
        }
        v.pass = true;
        v.measured["reinstall_step"] = r.step;
        return v;
    }
    v.witness = "no view installed after the reconfiguration";
    return v;
}

// Suspension safety: no fetch between the drain completing and the first
// post-reconfiguration installation.
Verdict check_vs_no_fetch_drain(const Trace& t, const RunContext& ctx) {
    Verdict v{"vs_no_fetch_drain"};
    Step ready = -1, install = -1, estab = -1;
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::CheckerNote && e.detail == "reconfready 1" &&
            ready < 0)
            ready = e.step;
        if (ready >= 0 && estab < 0 && e.kind == EventKind::EstabCall &&
            e.detail.find(" effective") != std::string::npos)
            estab = e.step;
        if (estab >= 0 && e.kind == EventKind::ViewInstall) {
            install = e.step;
            break;
        }
    }
    if (ready < 0) {
        v.witness = "drain never completed";
        return v;
    }
    Step end = install >= 0 ? install : ctx.budget;
    for (const TraceEvent& e : t.events) {
        if (e.kind == EventKind::Fetch && e.step > ready && e.step < end) {
            v.witness = step_witness(e.step, e.proc, "fetch during drain");
            return v;
        }
    }
    v.pass = true;
    v.measured["drain_from"] = ready;
    v.measured["drain_to"] = end;
    return v;
}

Verdict check_vs_single_coordinator(const Trace& t, const RunContext& ctx) {
    Verdict v{"vs_single_coordinator"};
    ProcessorId crd = kNoProcessor;
    for (ProcessorId p : ctx.final_live) {
        const FinalNode& f = ctx.finals.at(p);
        if (!f.participant) continue;
        if (f.vs_crd == kNoProcessor) {
            v.witness = step_witness(ctx.budget, p, "no coordinator");
            return v;
        }
        if (crd != kNoProcessor && crd != f.vs_crd) {
            v.witness = step_witness(ctx.budget, p,
                                     "coordinator " + std::to_string(f.vs_crd) +
                                         " vs " + std::to_string(crd));
            return v;
        }
        crd = f.vs_crd;
    }
    v.pass = crd != kNoProcessor;
    if (!v.pass) v.witness = "no participants";
    return v;
}

const std::map<std::string, CheckerFn>& registry() {
    static const std::map<std::string, CheckerFn> r = {
        {"convergence", check_convergence},
        {"closure", check_closure},
        {"conflict_freedom", check_conflict_freedom},
        {"unison", check_unison},
        {"single_install", check_single_install},
        {"trigger_liveness", check_trigger_liveness},
        {"trigger_once", check_trigger_once},
        {"bounded_triggers", check_bounded_triggers},
        {"join_liveness", check_join_liveness},
        {"join_reco_exclusion", check_join_reco_exclusion},
        {"taint_free", check_taint_free},
        {"label_purity", check_label_purity},
        {"label_creation_bound", check_label_creation_bound},
        {"label_creation_bound_postreconf", check_label_creation_bound_postreconf},
        {"counter_monotonicity", check_counter_monotonicity},
        {"counter_wid_order", check_counter_wid_order},
        {"vs_synchrony", check_vs_synchrony},
        {"vs_state_preservation", check_vs_state_preservation},
        {"vs_no_fetch_drain", check_vs_no_fetch_drain},
        {"vs_single_coordinator", check_vs_single_coordinator},
    };
    return r;
}

}  // namespace

bool checker_exists(const std::string& name) {
    return name == "determinism" || registry().count(name) > 0;
}

std::vector<std::string> checker_names() {
    std::vector<std::string> out;
    for (const auto& [k, fn] : registry()) out.push_back(k);
    out.push_back("determinism");
    return out;
}

Verdict run_checker(const std::string& name, const Trace& trace,
                    const RunContext& ctx) {
    auto it = registry().find(name);
    if (it == registry().end())
        throw ScenarioError("unknown checker '" + name + "'");
    Verdict v = it->second(trace, ctx);
    v.checker = name;
    return v;
}

}  // namespace reconf
