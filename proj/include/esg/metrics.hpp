/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "esg/cluster_sim.hpp"
#include "esg/model.hpp"

namespace esg {

// nearest-rank percentile over a copy; q in (0, 100]
inline double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double rank = std::ceil(q / 100.0 * static_cast<double>(v.size()));
    size_t idx = static_cast<size_t>(std::max(1.0, rank)) - 1;
    return v[std::min(idx, v.size() - 1)];
}

struct ScopeSummary {
    std::string scope;
    uint64_t instances = 0;
    uint64_t hits = 0;
    double hit_rate = 0.0;
    double mean_ms = 0.0, p50_ms = 0.0, p95_ms = 0.0, p99_ms = 0.0;
};

struct Summary {
    ScopeSummary overall;
    std::vector<ScopeSummary> per_app;
    double total_cost_usd = 0.0;   // node resources held by tasks, priced per hour
    double weighted_cost = 0.0;    // abstract (alpha, beta) blend over exec time
    double usd_per_1k_jobs = 0.0;
    uint64_t jobs = 0, tasks = 0;
    double mean_batch = 0.0;
    uint64_t cold_starts = 0, config_misses = 0, forced_dispatches = 0, rechecks = 0, decisions = 0;
    uint64_t search_work = 0, dispatch_ticks = 0;
    double config_miss_rate = 0.0;  // per task
    double mean_queue_wait_ms = 0.0, p95_queue_wait_ms = 0.0;
    double mean_overhead_ms = 0.0, max_overhead_ms = 0.0;
};

inline ScopeSummary scope_summary(const std::string& scope, const std::vector<const InstanceRecord*>& rows) {
    ScopeSummary s;
    s.scope = scope;
    s.instances = rows.size();
    std::vector<double> lat;
    lat.reserve(rows.size());
    double sum = 0.0;
    for (const auto* r : rows) {
        if (r->hit) ++s.hits;
        lat.push_back(r->latency_ms);
        sum += r->latency_ms;
    }
    if (!rows.empty()) {
        s.hit_rate = static_cast<double>(s.hits) / static_cast<double>(s.instances);
        s.mean_ms = sum / static_cast<double>(rows.size());
        s.p50_ms = percentile(lat, 50.0);
        s.p95_ms = percentile(lat, 95.0);
        s.p99_ms = percentile(lat, 99.0);
    }
    return s;
}

inline Summary summarize(const SimResult& r, const Pricing& pricing) {
    Summary s;
    std::vector<const InstanceRecord*> all;
    std::map<std::string, std::vector<const InstanceRecord*>> by_app;
    for (const auto& i : r.instances) {
        all.push_back(&i);
        by_app[i.app].push_back(&i);
    }
    s.overall = scope_summary("overall", all);
    for (const auto& [app, rows] : by_app) s.per_app.push_back(scope_summary(app, rows));

    for (const auto& t : r.tasks) {
        double held_h = (t.complete_ms - t.launch_ms) / 3.6e6;
        s.total_cost_usd += (t.cfg.vcpus * pricing.vcpu_per_hour + t.cfg.vgpus * pricing.vgpu_per_hour) * held_h;
        s.weighted_cost += (pricing.alpha * t.cfg.vcpus + pricing.beta * t.cfg.vgpus) * t.exec_ms;
        s.max_overhead_ms = std::max(s.max_overhead_ms, t.overhead_ms);
        s.mean_overhead_ms += t.overhead_ms;
    }
    s.jobs = r.jobs.size();
    s.tasks = r.tasks.size();
    if (s.tasks > 0) {
        s.mean_batch = static_cast<double>(s.jobs) / static_cast<double>(s.tasks);
        s.mean_overhead_ms /= static_cast<double>(s.tasks);
        s.config_miss_rate = static_cast<double>(r.totals.config_misses) / static_cast<double>(s.tasks);
    }
    if (s.jobs > 0) s.usd_per_1k_jobs = s.total_cost_usd / static_cast<double>(s.jobs) * 1000.0;
    std::vector<double> waits;
    waits.reserve(r.jobs.size());
    for (const auto& j : r.jobs) {
        waits.push_back(j.queue_wait_ms);
        s.mean_queue_wait_ms += j.queue_wait_ms;
    }
    if (!waits.empty()) {
        s.mean_queue_wait_ms /= static_cast<double>(waits.size());
        s.p95_queue_wait_ms = percentile(waits, 95.0);
    }
    s.cold_starts = r.totals.cold_starts;
    s.config_misses = r.totals.config_misses;
    s.forced_dispatches = r.totals.forced_dispatches;
    s.rechecks = r.totals.rechecks;
    s.decisions = r.totals.decisions;
    s.search_work = r.totals.search_work;
    s.dispatch_ticks = r.totals.dispatch_ticks;
    return s;
}

// Independent consistency audit over a finished run: every workflow node ran
// exactly once per instance, precedence and timing add up, batches fit the
// queue they were cut from, and no node ever exceeds its capacity.
inline std::vector<std::string> validate_schedule(const SimResult& r, const SimConfig& cfg,
                                                  const std::vector<ApplicationDag>& apps,
                                                  size_t max_violations = 50) {
    std::vector<std::string> out;
    auto report = [&](const std::string& msg) {
        if (out.size() < max_violations) out.push_back(msg);
    };
    std::map<std::string, const ApplicationDag*> dag;
    for (const auto& a : apps) dag[a.id] = &a;

    std::map<uint64_t, const TaskRecord*> task_by_id;
    for (const auto& t : r.tasks) task_by_id[t.id] = &t;

    std::map<std::pair<uint64_t, std::string>, const JobRecord*> job_by_key;
    for (const auto& j : r.jobs) {
        if (!job_by_key.emplace(std::make_pair(j.instance, j.fn), &j).second)
            report("duplicate job for instance " + std::to_string(j.instance) + " fn " + j.fn);
        auto t = task_by_id.find(j.task_id);
        if (t == task_by_id.end()) {
            report("job points at unknown task " + std::to_string(j.task_id));
            continue;
        }
        const TaskRecord& task = *t->second;
        if (task.fn != j.fn || task.app != j.app) report("job/task identity mismatch on task " + std::to_string(task.id));
        if (j.dispatch_ms != task.launch_ms) report("job dispatch disagrees with task launch on task " + std::to_string(task.id));
        if (j.dispatch_ms + 1e-9 < j.ready_ms)
            report("job dispatched before ready: instance " + std::to_string(j.instance) + " fn " + j.fn);
    }

    for (const auto& i : r.instances) {
        auto d = dag.find(i.app);
        if (d == dag.end()) {
            report("instance of unknown app " + i.app);
            continue;
        }
        double max_complete = 0.0;
        for (const auto& fn : d->second->nodes) {
            auto j = job_by_key.find({i.seq, fn});
            if (j == job_by_key.end()) {
                report("instance " + std::to_string(i.seq) + " missing job for " + fn);
                continue;
            }
            max_complete = std::max(max_complete, j->second->complete_ms);
        }
        for (const auto& e : d->second->edges) {
            auto u = job_by_key.find({i.seq, e.first});
            auto v = job_by_key.find({i.seq, e.second});
            if (u == job_by_key.end() || v == job_by_key.end()) continue;
            if (v->second->dispatch_ms + 1e-9 < u->second->complete_ms)
                report("precedence violated for instance " + std::to_string(i.seq) + " edge " + e.first +
                       " -> " + e.second);
            if (v->second->ready_ms + 1e-9 < u->second->complete_ms)
                report("successor ready before predecessor completion for instance " + std::to_string(i.seq));
        }
        if (std::abs(i.latency_ms - (i.complete_ms - i.arrival_ms)) > 1e-6)
            report("latency arithmetic off for instance " + std::to_string(i.seq));
        if (std::abs(i.complete_ms - max_complete) > 1e-6)
            report("instance completion is not its last job completion: " + std::to_string(i.seq));
        if (i.hit != (i.latency_ms <= i.slo_ms)) report("hit flag wrong for instance " + std::to_string(i.seq));
    }

    for (const auto& t : r.tasks) {
        if (static_cast<int>(t.instances.size()) != t.cfg.batch)
            report("task " + std::to_string(t.id) + " batch does not match its member count");
        if (t.cfg.batch > t.qlen_at_dispatch)
            report("task " + std::to_string(t.id) + " batched more jobs than were queued");
        double expected = t.launch_ms + t.overhead_ms + t.transfer_ms + t.cold_ms + t.exec_ms;
        if (std::abs(expected - t.complete_ms) > 1e-6)
            report("task " + std::to_string(t.id) + " timing components do not add up");
        if (t.node < 0 || t.node >= cfg.nodes) report("task " + std::to_string(t.id) + " ran on an unknown node");
        if (t.exec_ms <= 0.0) report("task " + std::to_string(t.id) + " has nonpositive exec time");
    }

    // capacity sweep: releases apply before acquisitions at equal timestamps
    struct Delta {
        double t;
        int phase;  // 0 release, 1 acquire
        int vcpus, vgpus;
    };
    std::vector<std::vector<Delta>> deltas(static_cast<size_t>(std::max(cfg.nodes, 1)));
    for (const auto& t : r.tasks) {
        if (t.node < 0 || t.node >= cfg.nodes) continue;
        deltas[t.node].push_back({t.launch_ms, 1, t.cfg.vcpus, t.cfg.vgpus});
        deltas[t.node].push_back({t.complete_ms, 0, t.cfg.vcpus, t.cfg.vgpus});
    }
    for (int n = 0; n < cfg.nodes; ++n) {
        auto& v = deltas[n];
        std::sort(v.begin(), v.end(), [](const Delta& a, const Delta& b) {
            if (a.t != b.t) return a.t < b.t;
            return a.phase < b.phase;
        });
        int used_c = 0, used_g = 0;
        for (const auto& d : v) {
            if (d.phase == 0) {
                used_c -= d.vcpus;
                used_g -= d.vgpus;
            } else {
                used_c += d.vcpus;
                used_g += d.vgpus;
            }
            if (used_c < 0 || used_g < 0) {
                report("node " + std::to_string(n) + " released more than it held");
                break;
            }
            if (used_c > cfg.vcpus_per_node || used_g > cfg.vgpus_per_node) {
                report("node " + std::to_string(n) + " capacity exceeded");
                break;
            }
        }
    }
    return out;
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

// one row per job, joined with its task's timing components
inline std::string trace_csv(const SimResult& r) {
    std::map<uint64_t, const TaskRecord*> task_by_id;
    for (const auto& t : r.tasks) task_by_id[t.id] = &t;
    std::string out =
        "instance,app,fn,task,node,batch,vcpus,vgpus,ready_ms,dispatch_ms,complete_ms,"
        "queue_wait_ms,exec_ms,transfer_ms,cold_ms,overhead_ms,cold,config_miss,forced\n";
    for (const auto& j : r.jobs) {
        const TaskRecord& t = *task_by_id.at(j.task_id);
        out += std::to_string(j.instance) + ',' + j.app + ',' + j.fn + ',' + std::to_string(j.task_id) +
               ',' + std::to_string(j.node) + ',' + std::to_string(j.cfg.batch) + ',' +
               std::to_string(j.cfg.vcpus) + ',' + std::to_string(j.cfg.vgpus) + ',' +
               detail::fmt(j.ready_ms) + ',' + detail::fmt(j.dispatch_ms) + ',' +
               detail::fmt(j.complete_ms) + ',' + detail::fmt(j.queue_wait_ms) + ',' +
               detail::fmt(t.exec_ms) + ',' + detail::fmt(t.transfer_ms) + ',' + detail::fmt(t.cold_ms) +
               ',' + detail::fmt(t.overhead_ms) + ',' + (j.cold ? '1' : '0') + ',' +
               (j.config_miss ? '1' : '0') + ',' + (j.forced ? '1' : '0') + '\n';
    }
    return out;
}

// long-format scope,metric,value rows
inline std::string summary_csv(const Summary& s) {
    std::string out = "scope,metric,value\n";
    auto row = [&](const std::string& scope, const std::string& metric, const std::string& v) {
        out += scope + ',' + metric + ',' + v + '\n';
    };
    auto scope_rows = [&](const ScopeSummary& sc) {
        row(sc.scope, "instances", std::to_string(sc.instances));
        row(sc.scope, "hits", std::to_string(sc.hits));
        row(sc.scope, "hit_rate", detail::fmt(sc.hit_rate));
        row(sc.scope, "mean_ms", detail::fmt(sc.mean_ms));
        row(sc.scope, "p50_ms", detail::fmt(sc.p50_ms));
        row(sc.scope, "p95_ms", detail::fmt(sc.p95_ms));
        row(sc.scope, "p99_ms", detail::fmt(sc.p99_ms));
    };
    scope_rows(s.overall);
    for (const auto& sc : s.per_app) scope_rows(sc);
    row("totals", "total_cost_usd", detail::fmt(s.total_cost_usd));
    row("totals", "weighted_cost", detail::fmt(s.weighted_cost));
    row("totals", "usd_per_1k_jobs", detail::fmt(s.usd_per_1k_jobs));
    row("totals", "jobs", std::to_string(s.jobs));
    row("totals", "tasks", std::to_string(s.tasks));
    row("totals", "mean_batch", detail::fmt(s.mean_batch));
    row("totals", "cold_starts", std::to_string(s.cold_starts));
    row("totals", "config_misses", std::to_string(s.config_misses));
    row("totals", "config_miss_rate", detail::fmt(s.config_miss_rate));
    row("totals", "forced_dispatches", std::to_string(s.forced_dispatches));
    row("totals", "rechecks", std::to_string(s.rechecks));
    row("totals", "decisions", std::to_string(s.decisions));
    row("totals", "search_work", std::to_string(s.search_work));
    row("totals", "dispatch_ticks", std::to_string(s.dispatch_ticks));
    row("totals", "mean_queue_wait_ms", detail::fmt(s.mean_queue_wait_ms));
    row("totals", "p95_queue_wait_ms", detail::fmt(s.p95_queue_wait_ms));
    row("totals", "mean_overhead_ms", detail::fmt(s.mean_overhead_ms));
    row("totals", "max_overhead_ms", detail::fmt(s.max_overhead_ms));
    return out;
}

}  // namespace esg
