/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "esg/baselines.hpp"
#include "esg/model.hpp"
#include "esg/rand.hpp"
#include "esg/search.hpp"
#include "esg/slo_dist.hpp"

// Scheduler-side decision logic: which configuration paths to try for the
// head of a queue, at what modeled decision latency. Placement and resource
// bookkeeping live with the cluster simulation.

namespace esg {

enum class SchedulerKind { esg, best_first, enum_per_function, oracle };

inline const char* to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::esg: return "esg";
        case SchedulerKind::best_first: return "best_first";
        case SchedulerKind::enum_per_function: return "enum_per_function";
        case SchedulerKind::oracle: return "oracle";
    }
    return "?";
}

inline SchedulerKind parse_scheduler(const std::string& s) {
    if (s == "esg") return SchedulerKind::esg;
    if (s == "best_first") return SchedulerKind::best_first;
    if (s == "enum_per_function") return SchedulerKind::enum_per_function;
    if (s == "oracle") return SchedulerKind::oracle;
    throw std::invalid_argument("unknown scheduler: " + s);
}

// Stable default placement for a function's first stage and prewarm target.
inline int home_invoker(const std::string& app, const std::string& fn, int n_nodes) {
    return static_cast<int>(fnv1a64(app + "/" + fn) % static_cast<uint64_t>(n_nodes));
}

struct DispatchConfig {
    SchedulerKind scheduler = SchedulerKind::esg;
    int k = 5;
    int max_group_size = 3;
    double sigma = 0.05;  // exec noise the preplanner hedges against
    // modeled controller decision latency: base plus a linear term in the
    // amount of search work, capped
    double overhead_base_ms = 0.1;
    double overhead_per_unit_ms = 0.00025;
    double overhead_cap_ms = 100.0;
};

struct DispatchDecision {
    std::vector<ConfigPath> paths;  // candidates in preference order; empty = try again later
    double overhead_ms = 0.0;
    bool config_miss = false;  // a preplanned batch had to be clamped to the queue
    uint64_t work = 0;         // units behind overhead_ms (extensions, pops, options scanned)
};

// Precomputed per-application planning state shared by every scheduler kind.
// All of it is a pure function of the application set and the profiles, so it
// is built once up front.
class Planner {
  public:
    Planner(const std::vector<ApplicationDag>& apps, const ProfileTable& profiles, const Pricing& pricing,
            const ConfigGrid& grid, const DispatchConfig& cfg)
        : profiles_(profiles), pricing_(pricing), grid_(grid), cfg_(cfg) {
        validate_grid(grid_);
        if (cfg_.k < 1) throw std::invalid_argument("dispatch: k must be >= 1");
        if (cfg_.max_group_size < 1) throw std::invalid_argument("dispatch: group size must be >= 1");
        for (const auto& app : apps) {
            validate_dag(app);
            if (!(app.slo_ms > 0.0)) throw std::invalid_argument("dispatch: app without SLO: " + app.id);
            if (!apps_.emplace(app.id, app).second)
                throw std::invalid_argument("dispatch: duplicate app id: " + app.id);
        }
        for (const auto& [id, app] : apps_) {
            auto order = topo_order(app);
            for (size_t i = 0; i < order.size(); ++i) {
                topo_index_[id][order[i]] = static_cast<int>(i);
                if (!options_.count(order[i]))
                    options_.emplace(order[i], build_stage_options(profiles_, order[i], pricing_));
            }
            topo_[id] = std::move(order);
            for (const auto& fn : topo_[id]) {
                auto sub = suffix_dag(app, fn);
                auto plan = plan_slo_distribution(sub, profiles_, cfg_.max_group_size, app.slo_ms);
                const auto& head = plan.groups[plan.group_of.at(fn)];
                suffix_plans_[{id, fn}] = SuffixPlan{head.fns, head.ratio};
            }
            if (cfg_.scheduler == SchedulerKind::best_first) {
                BestFirstStats stats;
                auto plan = best_first_preplan(topo_[id], app.slo_ms, profiles_, pricing_, grid_,
                                               cfg_.sigma, &stats);
                bf_plans_[id] = BfState{std::move(plan), stats, false};
            }
            if (cfg_.scheduler == SchedulerKind::enum_per_function)
                budgets_[id] = mean_split_budgets(topo_[id], app.slo_ms, profiles_);
        }
    }

    const ApplicationDag& app(const std::string& id) const { return apps_.at(id); }
    const std::map<std::string, ApplicationDag>& apps() const { return apps_; }
    const StageOptions& options(const std::string& fn) const { return options_.at(fn); }
    const std::vector<std::string>& topo(const std::string& app_id) const { return topo_.at(app_id); }
    const std::vector<std::string>& group_fns(const std::string& app_id, const std::string& fn) const {
        return suffix_plans_.at({app_id, fn}).group_fns;
    }
    double group_ratio(const std::string& app_id, const std::string& fn) const {
        return suffix_plans_.at({app_id, fn}).ratio;
    }

    // Decide what to run for the head of queue (app_id, fn) holding qlen
    // jobs, the oldest of which became ready at oldest_ready_ms within an
    // instance that arrived at oldest_arrival_ms.
    DispatchDecision decide(const std::string& app_id, const std::string& fn, int qlen, double now_ms,
                            double oldest_ready_ms, double oldest_arrival_ms, SearchStats* totals = nullptr) {
        if (qlen < 1) throw std::invalid_argument("dispatch: empty queue");
        const auto& dag = apps_.at(app_id);
        DispatchDecision d;
        switch (cfg_.scheduler) {
            case SchedulerKind::esg:
            case SchedulerKind::oracle: {
                const auto& sp = suffix_plans_.at({app_id, fn});
                SearchBudget budget{dag.slo_ms - (oldest_ready_ms - oldest_arrival_ms),
                                    now_ms - oldest_ready_ms, sp.ratio};
                std::vector<const StageOptions*> stages;
                for (const auto& f : sp.group_fns) stages.push_back(&options_.at(f));
                std::vector<int> caps(stages.size(), 0);
                caps[0] = qlen;
                SearchStats stats;
                if (cfg_.scheduler == SchedulerKind::esg) {
                    d.paths = esg_1q_over_options(stages, budget.g_slo_ms(), cfg_.k, &stats, caps);
                    d.work = stats.extensions;
                    d.overhead_ms = overhead(d.work);
                } else {
                    d.paths = oracle_top_k_over_options(stages, budget.g_slo_ms(), cfg_.k, caps);
                    d.work = 0;
                    d.overhead_ms = 0.0;  // idealized reference scheduler
                }
                if (totals) {
                    totals->extensions += stats.extensions;
                    totals->kept += stats.kept;
                }
                break;
            }
            case SchedulerKind::best_first: {
                auto& bf = bf_plans_.at(app_id);
                int idx = topo_index_.at(app_id).at(fn);
                Configuration cfg = bf.plan.configs[idx];
                if (cfg.batch > qlen) {
                    d.config_miss = true;
                    cfg.batch = largest_batch_at_most(qlen);
                }
                d.paths = {single_stage_path(fn, cfg)};
                // the lattice walk ran once per workflow; its budget lands on
                // the first decision, later ones are plain plan lookups. A
                // walk that hit its cutoff consumed the full time budget.
                if (!bf.charged) {
                    bf.charged = true;
                    d.work = bf.stats.pops;
                    d.overhead_ms = bf.stats.hit_cutoff ? cfg_.overhead_cap_ms : overhead(d.work);
                } else {
                    d.overhead_ms = overhead(d.work);
                }
                break;
            }
            case SchedulerKind::enum_per_function: {
                int idx = topo_index_.at(app_id).at(fn);
                double share = budgets_.at(app_id)[idx];
                Configuration cfg = enum_per_function(profiles_, fn, pricing_, share, qlen);
                d.paths = {single_stage_path(fn, cfg)};
                d.work = options_.at(fn).cfgs.size();
                d.overhead_ms = overhead(d.work);
                break;
            }
        }
        return d;
    }

    int largest_batch_at_most(int qlen) const {
        int best = 0;
        for (int b : grid_.batches)
            if (b <= qlen) best = b;
        if (best == 0) throw std::invalid_argument("dispatch: no grid batch fits the queue");
        return best;
    }

    Configuration minimal_config() const {
        return Configuration{grid_.batches.front(), grid_.vcpus.front(), grid_.vgpus.front()};
    }

    ConfigPath single_stage_path(const std::string& fn, const Configuration& cfg) const {
        double exec = profiles_.exec_ms(fn, cfg);
        ConfigPath p;
        p.configs = {cfg};
        p.time_ms = exec;
        p.cost = per_job_cost_usd(cfg, exec, pricing_);
        return p;
    }

    const DispatchConfig& config() const { return cfg_; }

  private:
    struct SuffixPlan {
        std::vector<std::string> group_fns;  // chain searched together, starting at fn
        double ratio = 0.0;                  // share of the remaining deadline
    };

    double overhead(uint64_t work) const {
        return std::min(cfg_.overhead_cap_ms,
                        cfg_.overhead_base_ms + static_cast<double>(work) * cfg_.overhead_per_unit_ms);
    }

    const ProfileTable& profiles_;
    Pricing pricing_;
    ConfigGrid grid_;
    DispatchConfig cfg_;
    std::map<std::string, ApplicationDag> apps_;
    std::map<std::string, std::vector<std::string>> topo_;
    std::map<std::string, std::map<std::string, int>> topo_index_;
    struct BfState {
        BestFirstPlan plan;
        BestFirstStats stats;
        bool charged = false;
    };

    std::map<std::string, StageOptions> options_;
    std::map<std::pair<std::string, std::string>, SuffixPlan> suffix_plans_;
    std::map<std::string, BfState> bf_plans_;
    std::map<std::string, std::vector<double>> budgets_;
};

}  // namespace esg
