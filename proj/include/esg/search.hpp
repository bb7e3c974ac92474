/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "esg/model.hpp"

// Top-K cheapest configuration sequences for a group of pipelined functions
// under a latency budget. A batch formed at the first stage rides through the
// whole group, so every stage of a path must use the same batch size; later
// stages are pre-split per batch value and all bounds below are computed per
// batch so they stay exact for locked paths. Partial paths are extended stage
// by stage in cost order and cut by two pruning blades:
//   - time: a lower bound on total latency (current time plus the sum of the
//     per-stage minimum latencies ahead); since each stage's options iterate
//     in increasing latency, the first violation breaks the whole loop,
//   - cost: a lower bound on total cost (current cost plus the sum of the
//     per-stage minimum costs ahead) pruned against the K-th smallest
//     achievable full-path cost seen so far, where "achievable" means the
//     cost of completing a kept partial with the latency-minimal suffix of
//     its own batch, which the time blade has already proven feasible.

namespace esg {

struct SearchBudget {
    double slo_ms = 0.0;  // deadline available to the remaining workflow
    double w_ms = 0.0;    // longest queue wait among jobs in the head batch
    double quota = 1.0;   // this group's share of the SLO

    double g_slo_ms() const { return (slo_ms - w_ms) * quota; }
};

struct ConfigPath {
    std::vector<Configuration> configs;  // one per group stage
    double time_ms = 0.0;                // summed profiled exec times
    double cost = 0.0;                   // summed per-job cost
};

struct SearchStats {
    uint64_t extensions = 0;  // (partial path, candidate config) pairs examined
    uint64_t kept = 0;        // partials admitted to the next frontier
};

// Options of one stage, sorted by increasing exec_ms (ties by configuration).
struct StageOptions {
    std::string fn;
    std::vector<Configuration> cfgs;
    std::vector<double> exec;
    std::vector<double> cost;
};

inline StageOptions build_stage_options(const ProfileTable& profiles, const std::string& fn,
                                        const Pricing& pricing) {
    StageOptions o;
    o.fn = fn;
    const auto& view = profiles.sorted_view(fn);
    o.cfgs.reserve(view.size());
    o.exec.reserve(view.size());
    o.cost.reserve(view.size());
    for (const auto& e : view) {
        o.cfgs.push_back(e.cfg);
        o.exec.push_back(e.exec_ms);
        o.cost.push_back(per_job_cost_usd(e.cfg, e.exec_ms, pricing));
    }
    return o;
}

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The K smallest achievable full-path costs observed in the current stage.
// Conceptually a K-vector initialized to +infinity whose largest entry is the
// pruning threshold.
class MinRsc {
  public:
    explicit MinRsc(int k) : k_(k) {}
    void reset() { heap_ = {}; }
    double threshold() const { return static_cast<int>(heap_.size()) == k_ ? heap_.top() : kInf; }
    void offer(double v) {
        if (static_cast<int>(heap_.size()) < k_) {
            heap_.push(v);
        } else if (v < heap_.top()) {
            heap_.pop();
            heap_.push(v);
        }
    }

  private:
    int k_;
    std::priority_queue<double> heap_;
};

// At most K full paths ordered by (cost, time, lexicographic configs). The
// oracle shares this so both sides break ties identically.
class BoundedPathSet {
  public:
    explicit BoundedPathSet(int k) : k_(k) {}

    // cheap gate callable before materializing the config sequence
    bool may_admit(double cost, double time) const {
        if (static_cast<int>(entries_.size()) < k_) return true;
        const auto& w = entries_.back();
        if (cost != w.cost) return cost < w.cost;
        if (time != w.time_ms) return time < w.time_ms;
        return true;  // full comparison decides on exact ties
    }

    void admit(double cost, double time, std::vector<Configuration> cfgs) {
        ConfigPath p;
        p.cost = cost;
        p.time_ms = time;
        p.configs = std::move(cfgs);
        auto less = [](const ConfigPath& a, const ConfigPath& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.time_ms != b.time_ms) return a.time_ms < b.time_ms;
            return a.configs < b.configs;
        };
        auto it = std::upper_bound(entries_.begin(), entries_.end(), p, less);
        entries_.insert(it, std::move(p));
        if (static_cast<int>(entries_.size()) > k_) entries_.pop_back();
    }

    std::vector<ConfigPath> take() { return std::move(entries_); }
    bool full() const { return static_cast<int>(entries_.size()) == k_; }

  private:
    int k_;
    std::vector<ConfigPath> entries_;  // ascending
};

struct PartialNode {
    double time = 0.0;
    double cost = 0.0;
    int32_t cfg = -1;     // option index at this stage
    int32_t parent = -1;  // index into the previous stage's arena
    int32_t b0 = -1;      // index of the batch value locked in at stage 0
};

}  // namespace detail

// Best-first top-K search over one group's configuration paths. batch_caps,
// when non-empty, limits the batch dimension per stage (e.g. stage 0 cannot
// batch more jobs than are queued). Every returned path satisfies
// time_ms < g_slo_ms strictly and uses one batch size across all its stages;
// an empty result signals the caller's recheck / minimum-configuration
// fallback.
inline std::vector<ConfigPath> esg_1q_over_options(const std::vector<const StageOptions*>& stages,
                                                   double g_slo_ms, int k, SearchStats* stats = nullptr,
                                                   const std::vector<int>& batch_caps = {}) {
    if (k < 1) throw std::invalid_argument("search: k must be >= 1");
    const size_t n = stages.size();
    if (n == 0) throw std::invalid_argument("search: empty group");
    if (!batch_caps.empty() && batch_caps.size() != n)
        throw std::invalid_argument("search: batch_caps size mismatch");

    SearchStats local;
    SearchStats& st = stats ? *stats : local;
    if (!(g_slo_ms > 0.0)) return {};  // budget already spent

    for (const auto* sp : stages) {
        double prev_exec = -detail::kInf;
        for (double e : sp->exec) {
            if (e < prev_exec) throw std::logic_error("search: stage options not sorted by exec time");
            prev_exec = e;
        }
    }

    detail::BoundedPathSet pq(k);

    if (n == 1) {
        const auto& o = *stages[0];
        const int cap = batch_caps.empty() ? 0 : batch_caps[0];
        for (size_t i = 0; i < o.cfgs.size(); ++i) {
            ++st.extensions;
            if (o.exec[i] >= g_slo_ms) break;  // options are latency-sorted
            if (cap > 0 && o.cfgs[i].batch > cap) continue;
            if (!pq.may_admit(o.cost[i], o.exec[i])) continue;
            pq.admit(o.cost[i], o.exec[i], {o.cfgs[i]});
        }
        return pq.take();
    }

    // batch values stage 0 may lock in
    std::vector<int> bvals;
    {
        const auto& o = *stages[0];
        const int cap = batch_caps.empty() ? 0 : batch_caps[0];
        for (size_t i = 0; i < o.cfgs.size(); ++i)
            if (!(cap > 0 && o.cfgs[i].batch > cap)) bvals.push_back(o.cfgs[i].batch);
        std::sort(bvals.begin(), bvals.end());
        bvals.erase(std::unique(bvals.begin(), bvals.end()), bvals.end());
    }
    if (bvals.empty()) return {};
    const size_t nb = bvals.size();
    auto bindex = [&](int b) {
        auto it = std::lower_bound(bvals.begin(), bvals.end(), b);
        return (it != bvals.end() && *it == b) ? static_cast<int32_t>(it - bvals.begin()) : -1;
    };

    // later stages split per batch value (each list stays exec-sorted), with
    // per-batch minima suffix-summed for the blades
    std::vector<std::vector<std::vector<int32_t>>> by_batch(n);
    std::vector<std::vector<double>> min_exec(n, std::vector<double>(nb, detail::kInf));
    std::vector<std::vector<double>> min_cost(n, std::vector<double>(nb, detail::kInf));
    std::vector<std::vector<double>> fastest_cost(n, std::vector<double>(nb, detail::kInf));
    for (size_t s = 1; s < n; ++s) {
        const auto& o = *stages[s];
        const int cap = batch_caps.empty() ? 0 : batch_caps[s];
        by_batch[s].assign(nb, {});
        for (size_t i = 0; i < o.cfgs.size(); ++i) {
            if (cap > 0 && o.cfgs[i].batch > cap) continue;
            int32_t bi = bindex(o.cfgs[i].batch);
            if (bi < 0) continue;
            by_batch[s][bi].push_back(static_cast<int32_t>(i));
            if (o.exec[i] < min_exec[s][bi]) {
                min_exec[s][bi] = o.exec[i];
                fastest_cost[s][bi] = o.cost[i];
            } else if (o.exec[i] == min_exec[s][bi] && o.cost[i] < fastest_cost[s][bi]) {
                fastest_cost[s][bi] = o.cost[i];
            }
            if (o.cost[i] < min_cost[s][bi]) min_cost[s][bi] = o.cost[i];
        }
    }
    std::vector<std::vector<double>> suf_time(n + 1, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> suf_cost(n + 1, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> suf_fast(n + 1, std::vector<double>(nb, 0.0));
    for (size_t s = n; s-- > 1;) {
        for (size_t b = 0; b < nb; ++b) {
            suf_time[s][b] = suf_time[s + 1][b] + min_exec[s][b];
            suf_cost[s][b] = suf_cost[s + 1][b] + min_cost[s][b];
            suf_fast[s][b] = suf_fast[s + 1][b] + fastest_cost[s][b];
        }
    }
    // batch-agnostic latency floor, valid for every stage-0 option
    double any_suffix = detail::kInf;
    for (size_t b = 0; b < nb; ++b) any_suffix = std::min(any_suffix, suf_time[1][b]);

    detail::MinRsc minrsc(k);
    // arena[s] holds the finalized partials ending at stage s; the last
    // stage's candidates are materialized immediately instead of stored
    std::vector<std::vector<detail::PartialNode>> arena(n - 1);

    auto materialize = [&](size_t last_stage, int32_t cfg, int32_t parent) {
        std::vector<Configuration> cfgs(last_stage + 1);
        cfgs[last_stage] = stages[last_stage]->cfgs[cfg];
        int32_t p = parent;
        for (size_t s = last_stage; s-- > 0;) {
            cfgs[s] = stages[s]->cfgs[arena[s][p].cfg];
            p = arena[s][p].parent;
        }
        return cfgs;
    };

    auto by_cost = [](const detail::PartialNode& a, const detail::PartialNode& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.time < b.time;
    };

    {
        const auto& o = *stages[0];
        const int cap = batch_caps.empty() ? 0 : batch_caps[0];
        std::vector<detail::PartialNode> next;
        for (size_t i = 0; i < o.cfgs.size(); ++i) {
            ++st.extensions;
            double t = o.exec[i];
            if (t + any_suffix >= g_slo_ms) break;  // options are latency-sorted
            if (cap > 0 && o.cfgs[i].batch > cap) continue;
            int32_t bi = bindex(o.cfgs[i].batch);
            if (t + suf_time[1][bi] >= g_slo_ms) continue;  // this batch is floored slower
            double c = o.cost[i];
            if (c + suf_cost[1][bi] >= minrsc.threshold()) continue;
            minrsc.offer(c + suf_fast[1][bi]);
            next.push_back(detail::PartialNode{t, c, static_cast<int32_t>(i), -1, bi});
            ++st.kept;
        }
        if (next.empty()) return {};
        // extend cheap partials first so they tighten the cost bound early;
        // sorting happens before any child records an index into this array
        std::stable_sort(next.begin(), next.end(), by_cost);
        arena[0] = std::move(next);
    }

    for (size_t s = 1; s < n; ++s) {
        const bool last = (s + 1 == n);
        const auto& prev = arena[s - 1];
        const auto& o = *stages[s];
        minrsc.reset();
        std::vector<detail::PartialNode> next;
        for (size_t f = 0; f < prev.size(); ++f) {
            const auto& node = prev[f];
            for (int32_t i : by_batch[s][node.b0]) {
                ++st.extensions;
                double t = node.time + o.exec[i];
                if (t + suf_time[s + 1][node.b0] >= g_slo_ms) break;  // same-batch list, latency-sorted
                double c = node.cost + o.cost[i];
                if (last) {
                    if (!pq.may_admit(c, t)) continue;
                    pq.admit(c, t, materialize(s, i, static_cast<int32_t>(f)));
                } else {
                    if (c + suf_cost[s + 1][node.b0] >= minrsc.threshold()) continue;
                    minrsc.offer(c + suf_fast[s + 1][node.b0]);
                    next.push_back(detail::PartialNode{t, c, i, static_cast<int32_t>(f), node.b0});
                    ++st.kept;
                }
            }
        }
        if (last) break;
        if (next.empty()) return {};
        std::stable_sort(next.begin(), next.end(), by_cost);
        arena[s] = std::move(next);
    }
    return pq.take();
}

// Convenience form over a profile table: stages are the group's functions in
// chain order; costs come from the monetary per-job model.
inline std::vector<ConfigPath> esg_1q(const std::vector<std::string>& group_fns, const SearchBudget& budget,
                                      const ProfileTable& profiles, const Pricing& pricing, int k,
                                      SearchStats* stats = nullptr, const std::vector<int>& batch_caps = {}) {
    std::vector<StageOptions> owned;
    owned.reserve(group_fns.size());
    for (const auto& fn : group_fns) owned.push_back(build_stage_options(profiles, fn, pricing));
    std::vector<const StageOptions*> stages;
    for (const auto& o : owned) stages.push_back(&o);
    return esg_1q_over_options(stages, budget.g_slo_ms(), k, stats, batch_caps);
}

}  // namespace esg
