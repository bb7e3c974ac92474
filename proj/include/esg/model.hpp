/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace esg {

// Coefficients of the multiplicative speedup model (see synth_exec_time).
// Models differ widely here: some batch almost for free, some are GPU bound,
// some lean on CPU pre/post processing.
struct SynthParams {
    double kappa_batch = 0.6;
    double kappa_vcpu = 0.15;
    double kappa_vgpu = 0.35;
};

// A deployable DNN inference function. base_exec_ms anchors the synthetic
// profile model at configuration (batch=1, vcpus=1, vgpus=1). scaling, when
// set, replaces the table-wide speedup coefficients for this function.
struct FunctionSpec {
    std::string id;
    double base_exec_ms = 0.0;
    double cold_start_ms = 0.0;
    double input_size_mb = 0.0;
    std::optional<SynthParams> scaling;
};

// Container sizing for one function invocation: request batch size, vCPU
// cores and vGPU slices (MIG-style fractions of a physical GPU).
struct Configuration {
    int batch = 1;
    int vcpus = 1;
    int vgpus = 1;

    auto operator<=>(const Configuration&) const = default;
};

// Candidate values per dimension, each ascending and unique.
struct ConfigGrid {
    std::vector<int> batches;
    std::vector<int> vcpus;
    std::vector<int> vgpus;
};

inline ConfigGrid default_grid() {
    return ConfigGrid{{1, 2, 4, 8}, {1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4}};
}

namespace detail {
inline void check_dimension(const std::vector<int>& v, const char* name) {
    if (v.empty()) throw std::invalid_argument(std::string("config grid: empty ") + name + " dimension");
    int prev = 0;
    for (int x : v) {
        if (x <= 0) throw std::invalid_argument(std::string("config grid: nonpositive ") + name + " value");
        if (x <= prev) throw std::invalid_argument(std::string("config grid: ") + name + " values must be ascending and unique");
        prev = x;
    }
}
}  // namespace detail

inline void validate_grid(const ConfigGrid& grid) {
    detail::check_dimension(grid.batches, "batch");
    detail::check_dimension(grid.vcpus, "vcpus");
    detail::check_dimension(grid.vgpus, "vgpus");
}

// Batch-major enumeration; the order is part of the contract because profile
// tables and search views are built from it.
inline std::vector<Configuration> enumerate_configs(const ConfigGrid& grid) {
    validate_grid(grid);
    std::vector<Configuration> out;
    out.reserve(grid.batches.size() * grid.vcpus.size() * grid.vgpus.size());
    for (int b : grid.batches)
        for (int c : grid.vcpus)
            for (int g : grid.vgpus) out.push_back(Configuration{b, c, g});
    return out;
}

// Multiplicative speedup model anchored at t(1,1,1) = base_exec_ms:
//   t(b,c,g) = base * (1 + kb*(b-1)) / (1 + kc*(c-1) + kg*(g-1))
// Nondecreasing in batch, nonincreasing in vcpus/vgpus as long as the
// coefficients are nonnegative.
inline double synth_exec_time(double base_exec_ms, const Configuration& cfg, const SynthParams& p = {}) {
    if (base_exec_ms <= 0.0) throw std::invalid_argument("synth_exec_time: base_exec_ms must be positive");
    if (cfg.batch < 1 || cfg.vcpus < 1 || cfg.vgpus < 1)
        throw std::invalid_argument("synth_exec_time: configuration dimensions must be >= 1");
    if (p.kappa_batch < 0.0 || p.kappa_vcpu < 0.0 || p.kappa_vgpu < 0.0)
        throw std::invalid_argument("synth_exec_time: negative speedup coefficient");
    double num = 1.0 + p.kappa_batch * (cfg.batch - 1);
    double den = 1.0 + p.kappa_vcpu * (cfg.vcpus - 1) + p.kappa_vgpu * (cfg.vgpus - 1);
    return base_exec_ms * num / den;
}

// Hourly resource prices plus the weights of the abstract cost objective.
struct Pricing {
    double vcpu_per_hour = 0.034;
    double vgpu_per_hour = 0.67;
    double alpha = 0.5;  // weight of vCPU usage in the abstract objective
    double beta = 0.5;   // weight of vGPU usage; alpha + beta must be 1
};

inline void validate_pricing(const Pricing& p) {
    if (p.vcpu_per_hour < 0.0 || p.vgpu_per_hour < 0.0)
        throw std::invalid_argument("pricing: negative hourly price");
    if (std::abs(p.alpha + p.beta - 1.0) > 1e-9)
        throw std::invalid_argument("pricing: alpha + beta must equal 1");
}

// Monetary cost of one job when `batch` jobs share an invocation that holds
// the configured resources for exec_ms.
inline double per_job_cost_usd(const Configuration& cfg, double exec_ms, const Pricing& p) {
    double hourly = cfg.vcpus * p.vcpu_per_hour + cfg.vgpus * p.vgpu_per_hour;
    return hourly * (exec_ms / 3'600'000.0) / cfg.batch;
}

// Abstract weighted resource usage per job (vcpu-equivalents times ms).
inline double per_job_cost_weighted(const Configuration& cfg, double exec_ms, const Pricing& p) {
    return (p.alpha * cfg.vcpus + p.beta * cfg.vgpus) * exec_ms / cfg.batch;
}

// One profiled point. Sorted views order by (exec_ms, batch, vcpus, vgpus) so
// every downstream traversal is deterministic.
struct ProfileEntry {
    Configuration cfg;
    double exec_ms = 0.0;
};

class ProfileTable {
  public:
    ProfileTable() = default;

    void add(const std::string& fn, const Configuration& cfg, double exec_ms) {
        if (exec_ms <= 0.0) throw std::invalid_argument("profile: nonpositive exec_ms for " + fn);
        auto [it, inserted] = exact_[fn].emplace(cfg, exec_ms);
        if (!inserted) throw std::invalid_argument("profile: duplicate entry for " + fn);
        sorted_[fn].push_back(ProfileEntry{cfg, exec_ms});
        dirty_ = true;
    }

    bool has(const std::string& fn) const { return exact_.count(fn) != 0; }

    double exec_ms(const std::string& fn, const Configuration& cfg) const {
        auto f = exact_.find(fn);
        if (f == exact_.end()) throw std::out_of_range("profile: unknown function " + fn);
        auto c = f->second.find(cfg);
        if (c == f->second.end()) throw std::out_of_range("profile: no entry for requested configuration of " + fn);
        return c->second;
    }

    // View sorted by increasing exec_ms (ties by configuration). The search
    // relies on this monotonicity for its early break.
    const std::vector<ProfileEntry>& sorted_view(const std::string& fn) const {
        finalize();
        auto f = sorted_.find(fn);
        if (f == sorted_.end()) throw std::out_of_range("profile: unknown function " + fn);
        return f->second;
    }

    std::vector<std::string> functions() const {
        std::vector<std::string> out;
        for (const auto& [fn, _] : exact_) out.push_back(fn);
        return out;
    }

    // Every function must cover every grid point; gaps are configuration bugs.
    void validate_against(const std::vector<std::string>& fns, const ConfigGrid& grid) const {
        auto cfgs = enumerate_configs(grid);
        std::string missing;
        for (const auto& fn : fns) {
            auto f = exact_.find(fn);
            for (const auto& cfg : cfgs) {
                if (f == exact_.end() || !f->second.count(cfg)) {
                    missing += " (" + fn + ", b" + std::to_string(cfg.batch) + " c" + std::to_string(cfg.vcpus) +
                               " g" + std::to_string(cfg.vgpus) + ")";
                }
            }
        }
        if (!missing.empty()) throw std::invalid_argument("profile gaps:" + missing);
    }

  private:
    void finalize() const {
        if (!dirty_) return;
        for (auto& [fn, v] : sorted_) {
            std::sort(v.begin(), v.end(), [](const ProfileEntry& a, const ProfileEntry& b) {
                return std::tie(a.exec_ms, a.cfg.batch, a.cfg.vcpus, a.cfg.vgpus) <
                       std::tie(b.exec_ms, b.cfg.batch, b.cfg.vcpus, b.cfg.vgpus);
            });
        }
        dirty_ = false;
    }

    std::map<std::string, std::map<Configuration, double>> exact_;
    mutable std::map<std::string, std::vector<ProfileEntry>> sorted_;
    mutable bool dirty_ = false;
};

inline ProfileTable build_synthetic_profiles(const std::vector<FunctionSpec>& fns, const ConfigGrid& grid,
                                             const SynthParams& params = {}) {
    ProfileTable t;
    auto cfgs = enumerate_configs(grid);
    for (const auto& f : fns) {
        const SynthParams& p = f.scaling ? *f.scaling : params;
        for (const auto& cfg : cfgs) t.add(f.id, cfg, synth_exec_time(f.base_exec_ms, cfg, p));
    }
    return t;
}

// A workflow: a DAG over function ids with one entry and one exit. slo_ms is
// the end-to-end deadline of each invocation of the workflow.
struct ApplicationDag {
    std::string id;
    std::vector<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    double slo_ms = 0.0;
};

struct Adjacency {
    std::map<std::string, std::vector<std::string>> succs;
    std::map<std::string, std::vector<std::string>> preds;
};

inline Adjacency adjacency(const ApplicationDag& dag) {
    Adjacency adj;
    for (const auto& n : dag.nodes) {
        adj.succs[n];
        adj.preds[n];
    }
    for (const auto& [u, v] : dag.edges) {
        adj.succs.at(u).push_back(v);
        adj.preds.at(v).push_back(u);
    }
    for (auto& [_, v] : adj.succs) std::sort(v.begin(), v.end());
    for (auto& [_, v] : adj.preds) std::sort(v.begin(), v.end());
    return adj;
}

// Kahn topological order, smallest id first among ready nodes. Throws on
// cycles, which also serves as the acyclicity check.
inline std::vector<std::string> topo_order(const ApplicationDag& dag) {
    auto adj = adjacency(dag);
    std::map<std::string, int> indeg;
    for (const auto& n : dag.nodes) indeg[n] = static_cast<int>(adj.preds.at(n).size());
    std::set<std::string> ready;
    for (const auto& [n, d] : indeg)
        if (d == 0) ready.insert(n);
    std::vector<std::string> order;
    while (!ready.empty()) {
        std::string n = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(n);
        for (const auto& s : adj.succs.at(n))
            if (--indeg.at(s) == 0) ready.insert(s);
    }
    if (order.size() != dag.nodes.size()) throw std::invalid_argument("application " + dag.id + ": cycle detected");
    return order;
}

inline void validate_dag(const ApplicationDag& dag) {
    if (dag.nodes.empty()) throw std::invalid_argument("application " + dag.id + ": no nodes");
    std::set<std::string> seen(dag.nodes.begin(), dag.nodes.end());
    if (seen.size() != dag.nodes.size()) throw std::invalid_argument("application " + dag.id + ": duplicate node ids");
    for (const auto& [u, v] : dag.edges) {
        if (!seen.count(u) || !seen.count(v))
            throw std::invalid_argument("application " + dag.id + ": edge references unknown node");
        if (u == v) throw std::invalid_argument("application " + dag.id + ": self edge on " + u);
    }
    auto adj = adjacency(dag);
    int entries = 0, exits = 0;
    for (const auto& n : dag.nodes) {
        if (adj.preds.at(n).empty()) ++entries;
        if (adj.succs.at(n).empty()) ++exits;
    }
    if (entries != 1) throw std::invalid_argument("application " + dag.id + ": must have exactly one entry node");
    if (exits != 1) throw std::invalid_argument("application " + dag.id + ": must have exactly one exit node");
    topo_order(dag);  // throws on cycles
}

inline std::string entry_of(const ApplicationDag& dag) {
    auto adj = adjacency(dag);
    for (const auto& n : dag.nodes)
        if (adj.preds.at(n).empty()) return n;
    throw std::invalid_argument("application " + dag.id + ": no entry node");
}

inline std::string exit_of(const ApplicationDag& dag) {
    auto adj = adjacency(dag);
    for (const auto& n : dag.nodes)
        if (adj.succs.at(n).empty()) return n;
    throw std::invalid_argument("application " + dag.id + ": no exit node");
}

// Induced subgraph on the nodes reachable from `from` (inclusive). Used to
// rebuild deadline budgets for the not-yet-executed remainder of a workflow.
inline ApplicationDag suffix_dag(const ApplicationDag& dag, const std::string& from) {
    auto adj = adjacency(dag);
    if (!adj.succs.count(from)) throw std::invalid_argument("application " + dag.id + ": unknown node " + from);
    std::set<std::string> keep;
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
        std::string n = stack.back();
        stack.pop_back();
        if (!keep.insert(n).second) continue;
        for (const auto& s : adj.succs.at(n)) stack.push_back(s);
    }
    ApplicationDag out;
    out.id = dag.id;
    out.slo_ms = dag.slo_ms;
    for (const auto& n : dag.nodes)
        if (keep.count(n)) out.nodes.push_back(n);
    for (const auto& [u, v] : dag.edges)
        if (keep.count(u) && keep.count(v)) out.edges.emplace_back(u, v);
    return out;
}

}  // namespace esg
