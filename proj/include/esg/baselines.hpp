/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "esg/model.hpp"
#include "esg/search.hpp"

namespace esg {

// Exhaustive reference search. Enumerates every full configuration path of
// the group that carries one batch size through all stages, checks
// feasibility on the complete path only, and keeps the top K under the same
// (cost, time, configs) order as the pruned search. Guarded against
// combinatorial blowup; meant for validation and timing comparisons, not for
// dispatch.
inline std::vector<ConfigPath> oracle_top_k_over_options(const std::vector<const StageOptions*>& stages,
                                                         double g_slo_ms, int k,
                                                         const std::vector<int>& batch_caps = {}) {
    if (k < 1) throw std::invalid_argument("oracle: k must be >= 1");
    const size_t n = stages.size();
    if (n == 0) throw std::invalid_argument("oracle: empty group");
    if (n > 4) throw std::invalid_argument("oracle intractable: more than 4 stages");
    for (const auto* s : stages)
        if (s->cfgs.size() > 256)
            throw std::invalid_argument("oracle intractable: stage with more than 256 options");
    if (!batch_caps.empty() && batch_caps.size() != n)
        throw std::invalid_argument("oracle: batch_caps size mismatch");
    if (!(g_slo_ms > 0.0)) return {};

    detail::BoundedPathSet pq(k);
    std::vector<int32_t> pick(n, 0);
    std::function<void(size_t, double, double, int)> walk = [&](size_t s, double t, double c, int batch) {
        const auto& o = *stages[s];
        const int cap = batch_caps.empty() ? 0 : batch_caps[s];
        const bool last = (s + 1 == n);
        for (size_t i = 0; i < o.cfgs.size(); ++i) {
            if (cap > 0 && o.cfgs[i].batch > cap) continue;
            if (s > 0 && o.cfgs[i].batch != batch) continue;  // batch rides through the group
            double tt = t + o.exec[i];
            double cc = c + o.cost[i];
            pick[s] = static_cast<int32_t>(i);
            if (!last) {
                walk(s + 1, tt, cc, s == 0 ? o.cfgs[i].batch : batch);
            } else if (tt < g_slo_ms && pq.may_admit(cc, tt)) {
                std::vector<Configuration> cfgs(n);
                for (size_t j = 0; j < n; ++j) cfgs[j] = stages[j]->cfgs[pick[j]];
                pq.admit(cc, tt, std::move(cfgs));
            }
        }
    };
    walk(0, 0.0, 0.0, 0);
    return pq.take();
}

inline std::vector<ConfigPath> oracle_top_k(const std::vector<std::string>& group_fns, const SearchBudget& budget,
                                            const ProfileTable& profiles, const Pricing& pricing, int k,
                                            const std::vector<int>& batch_caps = {}) {
    std::vector<StageOptions> owned;
    owned.reserve(group_fns.size());
    for (const auto& fn : group_fns) owned.push_back(build_stage_options(profiles, fn, pricing));
    std::vector<const StageOptions*> stages;
    for (const auto& o : owned) stages.push_back(&o);
    return oracle_top_k_over_options(stages, budget.g_slo_ms(), k, batch_caps);
}

// Whole-workflow preplanner. Walks the configuration lattice from the
// all-minimal state, bumping one dimension of one stage at a time. The
// frontier is ordered by how far the plan's tail-latency estimate overshoots
// the deadline, then by per-job cost, so infeasible states race toward the
// deadline while feasible ones cheapen; the cheapest feasible plan popped
// before the walk ends (cut off or exhausted) wins. Ordering by cost alone
// does not work here: batch and vCPU bumps lower per-job cost, so a pure
// cost walk sinks into the cheap high-batch corner and never surfaces a
// deadline-fitting plan within any practical cutoff. The estimate inflates
// the nominal (summed profiled) latency by a normal tail factor. The plan
// fixes one configuration per workflow stage up front; it is not revised as
// the workflow progresses, so a planned batch can exceed the queue on later
// stages.

struct BestFirstStats {
    uint64_t pops = 0;
    uint64_t pushes = 0;
    bool hit_cutoff = false;
    bool feasible = false;
};

struct BestFirstPlan {
    std::vector<Configuration> configs;  // one per workflow stage
    double nominal_ms = 0.0;
    double p95_ms = 0.0;
    double cost = 0.0;
};

inline double p95_inflation(double sigma) { return 1.0 + 1.645 * sigma; }

inline BestFirstPlan best_first_preplan(const std::vector<std::string>& fns, double slo_ms,
                                        const ProfileTable& profiles, const Pricing& pricing,
                                        const ConfigGrid& grid, double sigma,
                                        BestFirstStats* stats = nullptr, uint64_t max_pops = 50000) {
    if (fns.empty()) throw std::invalid_argument("preplan: empty workflow");
    validate_grid(grid);
    const size_t n = fns.size();
    const size_t nb = grid.batches.size(), nc = grid.vcpus.size(), ng = grid.vgpus.size();
    const size_t per_stage = nb * nc * ng;

    // dense per-stage tables indexed by (ib, ic, ig)
    std::vector<std::vector<double>> exec(n, std::vector<double>(per_stage));
    std::vector<std::vector<double>> cost(n, std::vector<double>(per_stage));
    auto flat = [&](size_t ib, size_t ic, size_t ig) { return (ib * nc + ic) * ng + ig; };
    for (size_t s = 0; s < n; ++s) {
        for (size_t ib = 0; ib < nb; ++ib)
            for (size_t ic = 0; ic < nc; ++ic)
                for (size_t ig = 0; ig < ng; ++ig) {
                    Configuration cfg{grid.batches[ib], grid.vcpus[ic], grid.vgpus[ig]};
                    double e = profiles.exec_ms(fns[s], cfg);
                    exec[s][flat(ib, ic, ig)] = e;
                    cost[s][flat(ib, ic, ig)] = per_job_cost_usd(cfg, e, pricing);
                }
    }

    const double inflate = p95_inflation(sigma);
    // state key: 3 grid indexes per stage, flattened
    auto evaluate = [&](const std::vector<int>& key, double& nominal, double& c) {
        nominal = 0.0;
        c = 0.0;
        for (size_t s = 0; s < n; ++s) {
            size_t idx = flat(key[3 * s], key[3 * s + 1], key[3 * s + 2]);
            nominal += exec[s][idx];
            c += cost[s][idx];
        }
    };
    auto to_plan = [&](const std::vector<int>& key) {
        BestFirstPlan p;
        p.configs.resize(n);
        for (size_t s = 0; s < n; ++s)
            p.configs[s] = Configuration{grid.batches[key[3 * s]], grid.vcpus[key[3 * s + 1]],
                                         grid.vgpus[key[3 * s + 2]]};
        evaluate(key, p.nominal_ms, p.cost);
        p.p95_ms = p.nominal_ms * inflate;
        return p;
    };

    struct Entry {
        double gap;  // deadline overshoot of the tail estimate; 0 when it fits
        double cost;
        double nominal;
        std::vector<int> key;
    };
    auto later = [](const Entry& a, const Entry& b) {
        if (a.gap != b.gap) return a.gap > b.gap;
        if (a.cost != b.cost) return a.cost > b.cost;
        if (a.nominal != b.nominal) return a.nominal > b.nominal;
        return a.key > b.key;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> frontier(later);
    std::set<std::vector<int>> seen;

    BestFirstStats local;
    BestFirstStats& st = stats ? *stats : local;

    auto push_state = [&](std::vector<int> key) {
        double nom, c;
        evaluate(key, nom, c);
        double gap = std::max(0.0, nom * inflate - slo_ms);
        frontier.push(Entry{gap, c, nom, std::move(key)});
        ++st.pushes;
    };
    std::vector<int> start(3 * n, 0);
    seen.insert(start);
    push_state(start);

    // cheapest deadline-fitting plan popped so far, plus the nearest miss
    // for the case where nothing fits
    bool have_best = false;
    std::vector<int> best_key;
    double best_cost = 0.0, best_nominal = 0.0;
    bool have_closest = false;
    std::vector<int> closest_key;
    double closest_gap = 0.0, closest_cost = 0.0;
    const std::array<size_t, 3> axis_len{nb, nc, ng};

    while (!frontier.empty()) {
        if (st.pops >= max_pops) {
            st.hit_cutoff = true;
            break;
        }
        Entry cur = frontier.top();
        frontier.pop();
        ++st.pops;
        if (cur.gap <= 0.0) {
            st.feasible = true;
            if (!have_best || cur.cost < best_cost ||
                (cur.cost == best_cost &&
                 (cur.nominal < best_nominal || (cur.nominal == best_nominal && cur.key < best_key)))) {
                have_best = true;
                best_key = cur.key;
                best_cost = cur.cost;
                best_nominal = cur.nominal;
            }
        } else if (!have_closest || cur.gap < closest_gap ||
                   (cur.gap == closest_gap &&
                    (cur.cost < closest_cost || (cur.cost == closest_cost && cur.key < closest_key)))) {
            have_closest = true;
            closest_key = cur.key;
            closest_gap = cur.gap;
            closest_cost = cur.cost;
        }
        for (size_t s = 0; s < n; ++s) {
            for (size_t d = 0; d < 3; ++d) {
                size_t pos = 3 * s + d;
                if (cur.key[pos] + 1 >= static_cast<int>(axis_len[d])) continue;
                std::vector<int> nk = cur.key;
                ++nk[pos];
                if (seen.insert(nk).second) push_state(std::move(nk));
            }
        }
    }
    if (have_best) return to_plan(best_key);
    // nothing fit the deadline (or the walk was cut off first): hand back
    // the explored plan whose tail estimate lands nearest the deadline
    return to_plan(closest_key);
}

// Static per-function latency split. Each function receives a share of the
// workflow deadline proportional to its mean profiled exec time, fixed once
// per application. At dispatch the cheapest option that fits both the share
// and the queue is taken; when nothing fits, the latency-minimal option is.
inline std::vector<double> mean_split_budgets(const std::vector<std::string>& fns, double slo_ms,
                                              const ProfileTable& profiles) {
    if (fns.empty()) throw std::invalid_argument("mean split: empty workflow");
    std::vector<double> means(fns.size());
    double total = 0.0;
    for (size_t i = 0; i < fns.size(); ++i) {
        const auto& view = profiles.sorted_view(fns[i]);
        double sum = 0.0;
        for (const auto& e : view) sum += e.exec_ms;
        means[i] = sum / static_cast<double>(view.size());
        total += means[i];
    }
    std::vector<double> budgets(fns.size());
    for (size_t i = 0; i < fns.size(); ++i) budgets[i] = slo_ms * means[i] / total;
    return budgets;
}

inline Configuration enum_per_function(const ProfileTable& profiles, const std::string& fn, const Pricing& pricing,
                                 double budget_ms, int max_batch) {
    const auto& view = profiles.sorted_view(fn);
    bool have_best = false, have_fallback = false;
    Configuration best{}, fallback{};
    double best_cost = 0.0;
    for (const auto& e : view) {
        if (max_batch > 0 && e.cfg.batch > max_batch) continue;
        if (!have_fallback) {
            fallback = e.cfg;  // latency-minimal admissible option
            have_fallback = true;
        }
        if (e.exec_ms > budget_ms) continue;
        double c = per_job_cost_usd(e.cfg, e.exec_ms, pricing);
        if (!have_best || c < best_cost || (c == best_cost && e.cfg < best)) {
            have_best = true;
            best = e.cfg;
            best_cost = c;
        }
    }
    if (have_best) return best;
    if (have_fallback) return fallback;
    throw std::invalid_argument("budget pick: no option admissible under the batch cap");
}

}  // namespace esg
