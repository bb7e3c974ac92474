/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esg/dispatch.hpp"
#include "esg/model.hpp"
#include "esg/rand.hpp"
#include "esg/workload.hpp"

// Deterministic discrete-event simulation of a GPU-sharing serverless
// cluster. Controller behavior per queue (one queue per application function):
// search for configuration paths, place the head batch on a node preferring
// warm containers and data locality, and fall back to a bounded recheck loop
// that ends in a forced minimal-configuration dispatch so every job
// eventually runs.

namespace esg {

struct SimConfig {
    int nodes = 16;
    int vcpus_per_node = 16;
    int vgpus_per_node = 7;
    double keepalive_ms = 600000.0;
    double transfer_fixed_ms = 5.0;
    double transfer_per_mb_ms = 1.0;
    double noise_sigma = 0.05;
    bool prewarm = true;
    double prewarm_lambda = 0.3;  // EWMA weight of the newest arrival gap
    int recheck_rounds = 3;       // failed rounds before the forced dispatch
    double recheck_poll_ms = 5.0;
    uint64_t seed = 1;
    DispatchConfig dispatch;
};

struct JobRecord {
    uint64_t instance = 0;
    std::string app, fn;
    uint64_t task_id = 0;
    double ready_ms = 0.0, dispatch_ms = 0.0, complete_ms = 0.0, queue_wait_ms = 0.0;
    int node = -1;
    Configuration cfg;
    bool cold = false;
    bool config_miss = false;
    bool forced = false;
};

struct TaskRecord {
    uint64_t id = 0;
    std::string app, fn;
    int node = -1;
    Configuration cfg;
    int qlen_at_dispatch = 0;
    double launch_ms = 0.0, overhead_ms = 0.0, transfer_ms = 0.0, cold_ms = 0.0, exec_ms = 0.0,
           complete_ms = 0.0;
    bool cold = false, config_miss = false, forced = false;
    std::vector<uint64_t> instances;
};

struct InstanceRecord {
    uint64_t seq = 0;
    std::string app;
    double arrival_ms = 0.0, complete_ms = 0.0, latency_ms = 0.0, slo_ms = 0.0;
    bool hit = false;
};

struct SimTotals {
    uint64_t decisions = 0;       // scheduler invocations
    uint64_t search_work = 0;     // summed work units behind the decisions
    uint64_t rechecks = 0;        // placement stalls entering the recheck loop
    uint64_t forced_dispatches = 0;
    uint64_t prewarms_issued = 0;
    uint64_t cold_starts = 0;
    uint64_t config_misses = 0;   // tasks whose preplanned batch was clamped
    uint64_t dispatch_ticks = 0;
};

struct SimResult {
    std::vector<InstanceRecord> instances;
    std::vector<JobRecord> jobs;
    std::vector<TaskRecord> tasks;
    SimTotals totals;
};

class Simulation {
  public:
    Simulation(const SimConfig& config, const std::vector<ApplicationDag>& apps,
               const std::vector<FunctionSpec>& functions, const ProfileTable& profiles,
               const Pricing& pricing, const ConfigGrid& grid, const Trace& trace)
        : cfg_(config),
          profiles_(profiles),
          trace_(trace),
          planner_(apps, profiles_, pricing, grid, config.dispatch),
          noise_(split_seed(config.seed, "noise")) {
        if (cfg_.nodes < 1 || cfg_.vcpus_per_node < 1 || cfg_.vgpus_per_node < 1)
            throw std::invalid_argument("simulation: cluster must have nodes with capacity");
        for (const auto& f : functions) functions_[f.id] = f;
        for (const auto& [id, app] : planner_.apps()) {
            for (const auto& fn : app.nodes)
                if (!functions_.count(fn))
                    throw std::invalid_argument("simulation: no function spec for " + fn);
            adj_[id] = adjacency(app);
            entry_[id] = entry_of(app);
            exit_[id] = exit_of(app);
            for (const auto& fn : planner_.topo(id)) keys_.push_back({id, fn});
        }
        std::sort(keys_.begin(), keys_.end());
        queues_.resize(keys_.size());
        for (size_t i = 0; i < keys_.size(); ++i) qindex_[keys_[i]] = i;
        free_vcpus_.assign(cfg_.nodes, cfg_.vcpus_per_node);
        free_vgpus_.assign(cfg_.nodes, cfg_.vgpus_per_node);
        warm_.resize(cfg_.nodes);
    }

    SimResult run() {
        for (size_t i = 0; i < trace_.arrivals.size(); ++i)
            push_event(trace_.arrivals[i].t_ms, kArrival, i);
        while (!events_.empty()) {
            Event e = events_.top();
            events_.pop();
            switch (e.kind) {
                case kComplete: on_complete(e.payload); break;
                case kArrival: on_arrival(e.payload); break;
                case kTick:
                    if (e.t != last_tick_ms_) tick(e.t);
                    break;
            }
        }
        for (const auto& q : queues_)
            if (!q.jobs.empty() || q.recheck_active)
                throw std::runtime_error("simulation: drain left queued jobs behind");
        if (!flight_.empty()) throw std::runtime_error("simulation: drain left tasks in flight");
        if (result_.instances.size() != trace_.arrivals.size())
            throw std::runtime_error("simulation: not every workflow instance completed");
        std::sort(result_.instances.begin(), result_.instances.end(),
                  [](const InstanceRecord& a, const InstanceRecord& b) { return a.seq < b.seq; });
        std::sort(result_.jobs.begin(), result_.jobs.end(), [](const JobRecord& a, const JobRecord& b) {
            if (a.instance != b.instance) return a.instance < b.instance;
            if (a.dispatch_ms != b.dispatch_ms) return a.dispatch_ms < b.dispatch_ms;
            return a.fn < b.fn;
        });
        return std::move(result_);
    }

  private:
    static constexpr int kComplete = 0;  // same-time order: completions free
    static constexpr int kArrival = 1;   // resources before arrivals queue up,
    static constexpr int kTick = 2;      // and the controller runs last

    struct Event {
        double t;
        int kind;
        uint64_t seq;
        uint64_t payload;
    };
    struct EventAfter {
        bool operator()(const Event& a, const Event& b) const {
            if (a.t != b.t) return a.t > b.t;
            if (a.kind != b.kind) return a.kind > b.kind;
            return a.seq > b.seq;
        }
    };

    struct PendingJob {
        uint64_t instance = 0;
        double ready_ms = 0.0;
        double arrival_ms = 0.0;
        int pred_node = -1;  // node of the latest-finishing predecessor
        bool planned = false;  // configuration already fixed at the group head
        Configuration planned_cfg{};
        std::vector<std::pair<std::string, Configuration>> plan_rest;  // stages further down the group
    };

    struct QueueState {
        std::deque<PendingJob> jobs;
        bool recheck_active = false;
        std::vector<ConfigPath> stored;  // candidate paths kept across rounds
        double stored_overhead_ms = 0.0;
        bool stored_miss = false;
        int rounds = 0;
        double next_round_at = 0.0;
    };

    struct JobDone {
        double complete_ms = 0.0;
        int node = -1;
    };
    struct InstanceRuntime {
        std::string app;
        double arrival_ms = 0.0;
        std::map<std::string, JobDone> done;
    };

    struct MemberJob {
        uint64_t instance = 0;
        double ready_ms = 0.0;
        double arrival_ms = 0.0;
        int pred_node = -1;
    };
    struct FlightTask {
        TaskRecord rec;
        std::vector<MemberJob> members;
        std::vector<std::pair<std::string, Configuration>> plan_rest;  // rides to successors
    };

    struct WarmEntry {
        double ready_ms = 0.0;
        double expiry_ms = 0.0;
    };
    // A container's identity is its resource slice. The batch size is an
    // invocation argument, so a warm container serves any batch.
    using WarmKey = std::tuple<std::string, int, int>;  // fn, vcpus, vgpus
    static WarmKey warm_key(const std::string& fn, const Configuration& cfg) {
        return {fn, cfg.vcpus, cfg.vgpus};
    }

    struct PrewarmState {
        double last_arrival_ms = -1.0;
        double est_gap_ms = -1.0;
    };

    void push_event(double t, int kind, uint64_t payload) {
        events_.push(Event{t, kind, event_seq_++, payload});
    }
    void push_tick(double t) { push_event(t, kTick, 0); }

    void on_arrival(uint64_t idx) {
        const auto& a = trace_.arrivals[idx];
        InstanceRuntime rt;
        rt.app = a.app_id;
        rt.arrival_ms = a.t_ms;
        instances_.emplace(a.seq, std::move(rt));
        const std::string& entry = entry_.at(a.app_id);
        queues_[qindex_.at({a.app_id, entry})].jobs.push_back(PendingJob{a.seq, a.t_ms, a.t_ms, -1});
        if (cfg_.prewarm) observe_arrival(a.app_id, entry, a.t_ms);
        push_tick(a.t_ms);
    }

    // EWMA over this application's arrival gaps; once a gap estimate exists,
    // lay a grid-minimal container on the entry function's home node timed to
    // be warm at the predicted next arrival.
    void observe_arrival(const std::string& app_id, const std::string& entry, double now) {
        auto& ps = prewarm_[app_id];
        if (ps.last_arrival_ms >= 0.0) {
            double gap = now - ps.last_arrival_ms;
            ps.est_gap_ms = ps.est_gap_ms < 0.0
                                ? gap
                                : cfg_.prewarm_lambda * gap + (1.0 - cfg_.prewarm_lambda) * ps.est_gap_ms;
        }
        ps.last_arrival_ms = now;
        if (ps.est_gap_ms > 0.0) {
            double cold = functions_.at(entry).cold_start_ms;
            double predicted = now + ps.est_gap_ms;
            double ready = std::max(now, predicted - cold) + cold;
            int node = home_invoker(app_id, entry, cfg_.nodes);
            warm_[node][warm_key(entry, planner_.minimal_config())].push_back(
                WarmEntry{ready, ready + cfg_.keepalive_ms});
            ++result_.totals.prewarms_issued;
        }
    }

    void on_complete(uint64_t task_id) {
        auto it = flight_.find(task_id);
        FlightTask ft = std::move(it->second);
        flight_.erase(it);
        const double now = ft.rec.complete_ms;
        const std::string& app_id = ft.rec.app;
        const std::string& fn = ft.rec.fn;
        free_vcpus_[ft.rec.node] += ft.rec.cfg.vcpus;
        free_vgpus_[ft.rec.node] += ft.rec.cfg.vgpus;
        warm_[ft.rec.node][warm_key(fn, ft.rec.cfg)].push_back(WarmEntry{now, now + cfg_.keepalive_ms});

        const auto& adj = adj_.at(app_id);
        for (const auto& m : ft.members) {
            auto& inst = instances_.at(m.instance);
            inst.done[fn] = JobDone{now, ft.rec.node};
            JobRecord jr;
            jr.instance = m.instance;
            jr.app = app_id;
            jr.fn = fn;
            jr.task_id = ft.rec.id;
            jr.ready_ms = m.ready_ms;
            jr.dispatch_ms = ft.rec.launch_ms;
            jr.complete_ms = now;
            jr.queue_wait_ms = ft.rec.launch_ms - m.ready_ms;
            jr.node = ft.rec.node;
            jr.cfg = ft.rec.cfg;
            jr.cold = ft.rec.cold;
            jr.config_miss = ft.rec.config_miss;
            jr.forced = ft.rec.forced;
            result_.jobs.push_back(std::move(jr));

            if (fn == exit_.at(app_id)) {
                InstanceRecord ir;
                ir.seq = m.instance;
                ir.app = app_id;
                ir.arrival_ms = inst.arrival_ms;
                ir.complete_ms = now;
                ir.latency_ms = now - inst.arrival_ms;
                ir.slo_ms = planner_.app(app_id).slo_ms;
                ir.hit = ir.latency_ms <= ir.slo_ms;
                result_.instances.push_back(std::move(ir));
                instances_.erase(m.instance);
                continue;
            }
            for (const auto& succ : adj.succs.at(fn)) {
                bool ready = true;
                for (const auto& p : adj.preds.at(succ))
                    if (!inst.done.count(p)) {
                        ready = false;
                        break;
                    }
                if (!ready) continue;
                // hand the successor the node of its latest-finishing input
                double best_t = -1.0;
                int best_node = -1;
                for (const auto& p : adj.preds.at(succ)) {
                    const auto& d = inst.done.at(p);
                    if (d.complete_ms > best_t ||
                        (d.complete_ms == best_t && d.node < best_node)) {
                        best_t = d.complete_ms;
                        best_node = d.node;
                    }
                }
                PendingJob nj{m.instance, now, inst.arrival_ms, best_node};
                // stamp the successor with its group-head plan, if any
                for (const auto& [pfn, pcfg] : ft.plan_rest) {
                    if (pfn != succ) continue;
                    nj.planned = true;
                    nj.planned_cfg = pcfg;
                    for (const auto& e : ft.plan_rest)
                        if (e.first != succ) nj.plan_rest.push_back(e);
                    break;
                }
                queues_[qindex_.at({app_id, succ})].jobs.push_back(std::move(nj));
            }
        }
        result_.tasks.push_back(std::move(ft.rec));
        push_tick(now);
    }

    void tick(double now) {
        last_tick_ms_ = now;
        if (now >= next_poll_ms_) next_poll_ms_ = kNoPoll;
        ++result_.totals.dispatch_ticks;
        for (size_t qi = 0; qi < queues_.size(); ++qi)
            if (queues_[qi].recheck_active) attempt_recheck(qi, now);
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t off = 0; off < queues_.size(); ++off) {
                size_t qi = (cursor_ + off) % queues_.size();
                auto& q = queues_[qi];
                if (q.recheck_active || q.jobs.empty()) continue;
                if (fresh_attempt(qi, now)) progress = true;
            }
        }
        cursor_ = (cursor_ + 1) % queues_.size();
        for (const auto& q : queues_)
            if (q.recheck_active) {
                schedule_poll(now + cfg_.recheck_poll_ms);
                break;
            }
    }

    // One shared poll cadence. Every completion already drops a tick at its
    // own timestamp, so rescheduling from each of those would fan out into
    // thousands of interleaved 5 ms chains that never merge.
    void schedule_poll(double t) {
        if (next_poll_ms_ <= t) return;
        next_poll_ms_ = t;
        push_tick(t);
    }

    // Jobs at the queue front that still need a scheduling decision. Planned
    // jobs behind them belong to batches fixed upstream and must not be
    // swallowed into a searched batch.
    int unplanned_run(const QueueState& q) const {
        int n = 0;
        for (const auto& j : q.jobs) {
            if (j.planned) break;
            ++n;
        }
        return n;
    }

    DispatchDecision decide_for(size_t qi, double now) {
        const auto& key = keys_[qi];
        const auto& q = queues_[qi];
        const auto& oldest = q.jobs.front();
        auto d = planner_.decide(key.first, key.second, unplanned_run(q), now,
                                 oldest.ready_ms, oldest.arrival_ms);
        ++result_.totals.decisions;
        result_.totals.search_work += d.work;
        return d;
    }

    bool fresh_attempt(size_t qi, double now) {
        auto& q = queues_[qi];
        if (q.jobs.front().planned) return planned_attempt(qi, now);
        DispatchDecision d = decide_for(qi, now);
        if (!d.paths.empty() && try_paths(qi, d.paths, d.overhead_ms, d.config_miss, false, now))
            return true;
        q.recheck_active = true;
        q.stored = std::move(d.paths);
        q.stored_overhead_ms = d.overhead_ms;
        q.stored_miss = d.config_miss;
        q.rounds = 0;
        q.next_round_at = 0.0;
        bump_round(q, now);
        ++result_.totals.rechecks;
        return false;
    }

    // The group head already chose this batch's configuration; dispatch it as
    // planned without another search. The batch entered the queue whole, so
    // its members are contiguous at the front. Scheduling cost was charged
    // once at the head, hence no decision or overhead here.
    bool planned_attempt(size_t qi, double now) {
        auto& q = queues_[qi];
        ConfigPath path = planner_.single_stage_path(keys_[qi].second, q.jobs.front().planned_cfg);
        if (try_paths(qi, {path}, 0.0, false, false, now)) return true;
        q.recheck_active = true;
        q.stored.clear();
        q.stored.push_back(std::move(path));
        q.stored_overhead_ms = 0.0;
        q.stored_miss = false;
        q.rounds = 0;
        q.next_round_at = 0.0;
        bump_round(q, now);
        ++result_.totals.rechecks;
        return false;
    }

    void attempt_recheck(size_t qi, double now) {
        auto& q = queues_[qi];
        if (q.jobs.empty()) {
            clear_recheck(q);
            return;
        }
        if (q.rounds >= cfg_.recheck_rounds) {
            const auto& front = q.jobs.front();
            Configuration cfg = planner_.minimal_config();
            // A planned front keeps its batch: the whole batch is contiguous
            // here and splitting it would orphan jobs mid-group.
            cfg.batch = front.planned ? front.planned_cfg.batch
                                      : planner_.largest_batch_at_most(unplanned_run(q));
            ConfigPath path = planner_.single_stage_path(keys_[qi].second, cfg);
            if (try_paths(qi, {path}, q.stored_overhead_ms, q.stored_miss, true, now)) {
                ++result_.totals.forced_dispatches;
                clear_recheck(q);
            }
            return;
        }
        if (!q.stored.empty()) {
            if (try_paths(qi, q.stored, q.stored_overhead_ms, q.stored_miss, false, now))
                clear_recheck(q);
            else
                bump_round(q, now);
            return;
        }
        // nothing feasible last time: re-search at round pace, not every tick
        if (now < q.next_round_at) return;
        DispatchDecision d = decide_for(qi, now);
        q.stored_overhead_ms += d.overhead_ms;
        q.stored_miss = q.stored_miss || d.config_miss;
        if (!d.paths.empty() && try_paths(qi, d.paths, q.stored_overhead_ms, q.stored_miss, false, now)) {
            clear_recheck(q);
            return;
        }
        q.stored = std::move(d.paths);
        bump_round(q, now);
    }

    static void clear_recheck(QueueState& q) {
        q.recheck_active = false;
        q.stored.clear();
        q.stored_overhead_ms = 0.0;
        q.stored_miss = false;
        q.rounds = 0;
        q.next_round_at = 0.0;
    }

    void bump_round(QueueState& q, double now) {
        if (now >= q.next_round_at) {
            ++q.rounds;
            q.next_round_at = now + cfg_.recheck_poll_ms;
        }
    }

    bool try_paths(size_t qi, const std::vector<ConfigPath>& paths, double overhead_ms, bool miss,
                   bool forced, double now) {
        auto& q = queues_[qi];
        const auto& [app_id, fn] = keys_[qi];
        const auto& oldest = q.jobs.front();
        int preferred = oldest.pred_node >= 0 ? oldest.pred_node : home_invoker(app_id, fn, cfg_.nodes);
        for (const auto& path : paths) {
            const Configuration& cfg = path.configs[0];
            int node = select_node(fn, cfg, preferred, now);
            if (node < 0) continue;
            // Configurations chosen for the rest of the group ride with the
            // batch so downstream queues dispatch without a new search. A
            // forced dispatch abandons the plan; successors re-search.
            std::vector<std::pair<std::string, Configuration>> rest;
            if (!forced) {
                if (path.configs.size() > 1) {
                    const auto& fns = planner_.group_fns(app_id, fn);
                    for (size_t i = 1; i < path.configs.size(); ++i)
                        rest.emplace_back(fns[i], path.configs[i]);
                } else if (oldest.planned) {
                    rest = oldest.plan_rest;
                }
            }
            launch_task(qi, cfg, node, overhead_ms, miss, forced, now, std::move(rest));
            return true;
        }
        return false;
    }

    // Warm capacity first (preferred node, then lowest index), then the
    // preferred node cold, then the emptiest node cold.
    int select_node(const std::string& fn, const Configuration& cfg, int preferred, double now) {
        auto fits = [&](int n) {
            return free_vcpus_[n] >= cfg.vcpus && free_vgpus_[n] >= cfg.vgpus;
        };
        if (fits(preferred) && warm_available(preferred, fn, cfg, now)) return preferred;
        for (int n = 0; n < cfg_.nodes; ++n)
            if (fits(n) && warm_available(n, fn, cfg, now)) return n;
        if (fits(preferred)) return preferred;
        int best = -1, best_free = -1;
        for (int n = 0; n < cfg_.nodes; ++n) {
            if (!fits(n)) continue;
            int free = free_vcpus_[n] + free_vgpus_[n];
            if (free > best_free) {
                best = n;
                best_free = free;
            }
        }
        return best;
    }

    bool warm_available(int node, const std::string& fn, const Configuration& cfg, double now) {
        auto it = warm_[node].find(warm_key(fn, cfg));
        if (it == warm_[node].end()) return false;
        prune_expired(it->second, now);
        for (const auto& e : it->second)
            if (e.ready_ms <= now) return true;
        return false;
    }

    static void prune_expired(std::vector<WarmEntry>& entries, double now) {
        std::erase_if(entries, [&](const WarmEntry& e) { return e.expiry_ms <= now; });
    }

    // consume the usable entry closest to expiring, keeping fresher ones
    bool consume_warm(int node, const std::string& fn, const Configuration& cfg, double now) {
        auto it = warm_[node].find(warm_key(fn, cfg));
        if (it == warm_[node].end()) return false;
        prune_expired(it->second, now);
        int best = -1;
        for (size_t i = 0; i < it->second.size(); ++i) {
            const auto& e = it->second[i];
            if (e.ready_ms > now) continue;
            if (best < 0 || e.expiry_ms < it->second[best].expiry_ms ||
                (e.expiry_ms == it->second[best].expiry_ms && e.ready_ms < it->second[best].ready_ms))
                best = static_cast<int>(i);
        }
        if (best < 0) return false;
        it->second.erase(it->second.begin() + best);
        return true;
    }

    void launch_task(size_t qi, const Configuration& cfg, int node, double overhead_ms, bool miss,
                     bool forced, double now,
                     std::vector<std::pair<std::string, Configuration>> plan_rest) {
        auto& q = queues_[qi];
        const auto& [app_id, fn] = keys_[qi];
        const int qlen = static_cast<int>(q.jobs.size());
        if (cfg.batch > qlen) throw std::logic_error("simulation: batch exceeds queue");

        FlightTask ft;
        ft.plan_rest = std::move(plan_rest);
        ft.rec.id = next_task_id_++;
        ft.rec.app = app_id;
        ft.rec.fn = fn;
        ft.rec.node = node;
        ft.rec.cfg = cfg;
        ft.rec.qlen_at_dispatch = qlen;
        ft.rec.launch_ms = now;
        ft.rec.overhead_ms = overhead_ms;
        ft.rec.config_miss = miss;
        ft.rec.forced = forced;

        const auto& spec = functions_.at(fn);
        double transfer = 0.0;
        for (int i = 0; i < cfg.batch; ++i) {
            const PendingJob& j = q.jobs.front();
            ft.members.push_back(MemberJob{j.instance, j.ready_ms, j.arrival_ms, j.pred_node});
            ft.rec.instances.push_back(j.instance);
            if (j.pred_node >= 0 && j.pred_node != node)
                transfer = std::max(transfer,
                                    cfg_.transfer_fixed_ms + cfg_.transfer_per_mb_ms * spec.input_size_mb);
            q.jobs.pop_front();
        }
        ft.rec.transfer_ms = transfer;

        ft.rec.cold = !consume_warm(node, fn, cfg, now);
        ft.rec.cold_ms = ft.rec.cold ? spec.cold_start_ms : 0.0;
        if (ft.rec.cold) ++result_.totals.cold_starts;
        if (miss) ++result_.totals.config_misses;

        double factor = std::max(0.05, noise_.gaussian(1.0, cfg_.noise_sigma));
        ft.rec.exec_ms = profiles_.exec_ms(fn, cfg) * factor;
        ft.rec.complete_ms =
            now + ft.rec.overhead_ms + ft.rec.transfer_ms + ft.rec.cold_ms + ft.rec.exec_ms;

        free_vcpus_[node] -= cfg.vcpus;
        free_vgpus_[node] -= cfg.vgpus;
        push_event(ft.rec.complete_ms, kComplete, ft.rec.id);
        flight_.emplace(ft.rec.id, std::move(ft));
    }

    SimConfig cfg_;
    const ProfileTable& profiles_;
    Trace trace_;
    Planner planner_;
    Rng noise_;

    std::map<std::string, FunctionSpec> functions_;
    std::map<std::string, Adjacency> adj_;
    std::map<std::string, std::string> entry_, exit_;

    std::vector<std::pair<std::string, std::string>> keys_;
    std::map<std::pair<std::string, std::string>, size_t> qindex_;
    std::vector<QueueState> queues_;
    size_t cursor_ = 0;

    std::vector<int> free_vcpus_, free_vgpus_;
    std::vector<std::map<WarmKey, std::vector<WarmEntry>>> warm_;
    std::map<std::string, PrewarmState> prewarm_;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events_;
    uint64_t event_seq_ = 0;
    static constexpr double kNoPoll = std::numeric_limits<double>::infinity();
    double last_tick_ms_ = -1.0;
    double next_poll_ms_ = kNoPoll;
    uint64_t next_task_id_ = 0;

    std::map<uint64_t, InstanceRuntime> instances_;
    std::map<uint64_t, FlightTask> flight_;
    SimResult result_;
};

// Convenience runner used by the command line tool and the tests.
inline SimResult run_simulation(const SimConfig& config, const std::vector<ApplicationDag>& apps,
                                const std::vector<FunctionSpec>& functions, const ProfileTable& profiles,
                                const Pricing& pricing, const ConfigGrid& grid, const Trace& trace) {
    Simulation sim(config, apps, functions, profiles, pricing, grid, trace);
    return sim.run();
}

}  // namespace esg
