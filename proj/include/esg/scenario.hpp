/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <algorithm>
#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "esg/cluster_sim.hpp"
#include "esg/model.hpp"
#include "esg/rand.hpp"
#include "esg/workload.hpp"

// JSON scenario documents: one file describes the workload, the cluster, the
// scheduler and the arrival process, and resolves to a ready-to-run Scenario.
// Resolution is one way: presets are expanded, missing SLOs are derived from
// the slo_mode factor, and ablation switches are folded into the grid,
// pricing and cluster fields, so an emitted scenario reloads to the same run.

namespace esg {

struct ArrivalSpec {
    bool generated = true;
    LoadRegime regime = LoadRegime::normal;
    SloMode slo_mode = SloMode::moderate;
    double horizon_ms = 60000.0;
    std::vector<ArrivalEvent> times;  // used when generated is false
};

struct Scenario {
    std::string name = "scenario";
    std::vector<FunctionSpec> functions;
    std::vector<ApplicationDag> apps;
    ConfigGrid grid = default_grid();
    SynthParams synth;
    Pricing pricing;
    SimConfig sim;
    ArrivalSpec arrivals;
};

namespace detail {

using json = nlohmann::json;

inline void expect_keys(const json& o, const std::string& path,
                        std::initializer_list<const char*> allowed) {
    if (!o.is_object()) throw std::invalid_argument("scenario: '" + path + "' must be an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("scenario: unknown key '" + path + "." + it.key() + "'");
    }
}

template <typename T>
void read_field(const json& o, const char* key, T& out, const std::string& path) {
    auto it = o.find(key);
    if (it == o.end()) return;
    try {
        it->get_to(out);
    } catch (const json::exception& e) {
        throw std::invalid_argument("scenario: bad value at '" + path + "." + key + "': " + e.what());
    }
}

inline std::vector<FunctionSpec> parse_functions(const json& arr, const std::string& path,
                                                 const SynthParams& table_synth) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("scenario: '" + path + "' must be a nonempty array");
    std::vector<FunctionSpec> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        std::string p = path + "[" + std::to_string(i) + "]";
        expect_keys(arr[i], p,
                    {"id", "base_exec_ms", "cold_start_ms", "input_size_mb", "kappa_batch",
                     "kappa_vcpu", "kappa_vgpu"});
        FunctionSpec f;
        read_field(arr[i], "id", f.id, p);
        read_field(arr[i], "base_exec_ms", f.base_exec_ms, p);
        read_field(arr[i], "cold_start_ms", f.cold_start_ms, p);
        read_field(arr[i], "input_size_mb", f.input_size_mb, p);
        // per-function speedup shape, seeded from the table-wide coefficients
        if (arr[i].contains("kappa_batch") || arr[i].contains("kappa_vcpu") ||
            arr[i].contains("kappa_vgpu")) {
            SynthParams sp = table_synth;
            read_field(arr[i], "kappa_batch", sp.kappa_batch, p);
            read_field(arr[i], "kappa_vcpu", sp.kappa_vcpu, p);
            read_field(arr[i], "kappa_vgpu", sp.kappa_vgpu, p);
            f.scaling = sp;
        }
        if (f.id.empty()) throw std::invalid_argument("scenario: '" + p + ".id' is required");
        if (f.base_exec_ms <= 0.0)
            throw std::invalid_argument("scenario: '" + p + ".base_exec_ms' must be positive");
        out.push_back(std::move(f));
    }
    return out;
}

inline std::vector<ApplicationDag> parse_apps(const json& arr, const std::string& path) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("scenario: '" + path + "' must be a nonempty array");
    std::vector<ApplicationDag> out;
    for (size_t i = 0; i < arr.size(); ++i) {
        std::string p = path + "[" + std::to_string(i) + "]";
        expect_keys(arr[i], p, {"id", "nodes", "edges", "slo_ms"});
        ApplicationDag a;
        read_field(arr[i], "id", a.id, p);
        read_field(arr[i], "nodes", a.nodes, p);
        read_field(arr[i], "slo_ms", a.slo_ms, p);
        if (a.id.empty()) throw std::invalid_argument("scenario: '" + p + ".id' is required");
        if (a.nodes.empty()) throw std::invalid_argument("scenario: '" + p + ".nodes' is required");
        if (arr[i].contains("edges")) {
            std::vector<std::vector<std::string>> edges;
            read_field(arr[i], "edges", edges, p);
            for (const auto& e : edges) {
                if (e.size() != 2)
                    throw std::invalid_argument("scenario: '" + p + ".edges' entries must be pairs");
                a.edges.emplace_back(e[0], e[1]);
            }
        } else {
            for (size_t k = 0; k + 1 < a.nodes.size(); ++k)
                a.edges.emplace_back(a.nodes[k], a.nodes[k + 1]);
        }
        out.push_back(std::move(a));
    }
    return out;
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& root) {
    using detail::expect_keys;
    using detail::read_field;
    Scenario s;
    expect_keys(root, "$",
                {"name", "seed", "workload", "grid", "synth", "pricing", "cluster", "scheduler",
                 "arrivals", "ablations"});
    read_field(root, "name", s.name, "$");
    read_field(root, "seed", s.sim.seed, "$");

    // synth comes first: per-function scaling overrides are seeded from it
    if (root.contains("synth")) {
        const auto& g = root.at("synth");
        expect_keys(g, "synth", {"kappa_batch", "kappa_vcpu", "kappa_vgpu"});
        read_field(g, "kappa_batch", s.synth.kappa_batch, "synth");
        read_field(g, "kappa_vcpu", s.synth.kappa_vcpu, "synth");
        read_field(g, "kappa_vgpu", s.synth.kappa_vgpu, "synth");
    }

    if (!root.contains("workload"))
        throw std::invalid_argument("scenario: '$.workload' is required");
    const auto& w = root.at("workload");
    expect_keys(w, "workload", {"preset", "functions", "apps"});
    if (w.contains("preset")) {
        std::string preset;
        read_field(w, "preset", preset, "workload");
        if (preset != "builtin")
            throw std::invalid_argument("scenario: unknown workload preset '" + preset + "'");
        if (w.contains("functions") || w.contains("apps"))
            throw std::invalid_argument(
                "scenario: 'workload.preset' excludes explicit functions/apps");
        s.functions = builtin_functions();
        s.apps = builtin_apps();
    } else {
        if (!w.contains("functions") || !w.contains("apps"))
            throw std::invalid_argument(
                "scenario: 'workload' needs a preset or functions plus apps");
        s.functions = detail::parse_functions(w.at("functions"), "workload.functions", s.synth);
        s.apps = detail::parse_apps(w.at("apps"), "workload.apps");
    }

    if (root.contains("grid")) {
        const auto& g = root.at("grid");
        expect_keys(g, "grid", {"batches", "vcpus", "vgpus"});
        read_field(g, "batches", s.grid.batches, "grid");
        read_field(g, "vcpus", s.grid.vcpus, "grid");
        read_field(g, "vgpus", s.grid.vgpus, "grid");
    }
    if (root.contains("pricing")) {
        const auto& g = root.at("pricing");
        expect_keys(g, "pricing", {"vcpu_per_hour", "vgpu_per_hour", "alpha", "beta"});
        read_field(g, "vcpu_per_hour", s.pricing.vcpu_per_hour, "pricing");
        read_field(g, "vgpu_per_hour", s.pricing.vgpu_per_hour, "pricing");
        read_field(g, "alpha", s.pricing.alpha, "pricing");
        read_field(g, "beta", s.pricing.beta, "pricing");
    }
    if (root.contains("cluster")) {
        const auto& g = root.at("cluster");
        expect_keys(g, "cluster",
                    {"nodes", "vcpus_per_node", "vgpus_per_node", "keepalive_ms",
                     "transfer_fixed_ms", "transfer_per_mb_ms", "noise_sigma", "prewarm",
                     "prewarm_lambda", "recheck_rounds", "recheck_poll_ms"});
        read_field(g, "nodes", s.sim.nodes, "cluster");
        read_field(g, "vcpus_per_node", s.sim.vcpus_per_node, "cluster");
        read_field(g, "vgpus_per_node", s.sim.vgpus_per_node, "cluster");
        read_field(g, "keepalive_ms", s.sim.keepalive_ms, "cluster");
        read_field(g, "transfer_fixed_ms", s.sim.transfer_fixed_ms, "cluster");
        read_field(g, "transfer_per_mb_ms", s.sim.transfer_per_mb_ms, "cluster");
        read_field(g, "noise_sigma", s.sim.noise_sigma, "cluster");
        read_field(g, "prewarm", s.sim.prewarm, "cluster");
        read_field(g, "prewarm_lambda", s.sim.prewarm_lambda, "cluster");
        read_field(g, "recheck_rounds", s.sim.recheck_rounds, "cluster");
        read_field(g, "recheck_poll_ms", s.sim.recheck_poll_ms, "cluster");
    }
    bool scheduler_sigma_given = false;
    if (root.contains("scheduler")) {
        const auto& g = root.at("scheduler");
        expect_keys(g, "scheduler",
                    {"kind", "k", "max_group_size", "sigma", "overhead_base_ms",
                     "overhead_per_unit_ms", "overhead_cap_ms"});
        if (g.contains("kind")) {
            std::string kind;
            read_field(g, "kind", kind, "scheduler");
            s.sim.dispatch.scheduler = parse_scheduler(kind);
        }
        read_field(g, "k", s.sim.dispatch.k, "scheduler");
        read_field(g, "max_group_size", s.sim.dispatch.max_group_size, "scheduler");
        scheduler_sigma_given = g.contains("sigma");
        read_field(g, "sigma", s.sim.dispatch.sigma, "scheduler");
        read_field(g, "overhead_base_ms", s.sim.dispatch.overhead_base_ms, "scheduler");
        read_field(g, "overhead_per_unit_ms", s.sim.dispatch.overhead_per_unit_ms, "scheduler");
        read_field(g, "overhead_cap_ms", s.sim.dispatch.overhead_cap_ms, "scheduler");
    }
    // unless pinned, the preplanner hedges against the noise the cluster has
    if (!scheduler_sigma_given) s.sim.dispatch.sigma = s.sim.noise_sigma;

    if (root.contains("arrivals")) {
        const auto& g = root.at("arrivals");
        expect_keys(g, "arrivals", {"regime", "slo_mode", "horizon_ms", "times"});
        if (g.contains("times")) {
            if (g.contains("regime"))
                throw std::invalid_argument(
                    "scenario: 'arrivals.times' excludes 'arrivals.regime'");
            s.arrivals.generated = false;
            const auto& times = g.at("times");
            if (!times.is_array() || times.empty())
                throw std::invalid_argument("scenario: 'arrivals.times' must be a nonempty array");
            for (size_t i = 0; i < times.size(); ++i) {
                std::string p = "arrivals.times[" + std::to_string(i) + "]";
                expect_keys(times[i], p, {"t_ms", "app"});
                ArrivalEvent e;
                read_field(times[i], "t_ms", e.t_ms, p);
                read_field(times[i], "app", e.app_id, p);
                if (e.t_ms < 0.0)
                    throw std::invalid_argument("scenario: '" + p + ".t_ms' must be >= 0");
                s.arrivals.times.push_back(std::move(e));
            }
            s.arrivals.horizon_ms = 0.0;
            for (const auto& e : s.arrivals.times)
                s.arrivals.horizon_ms = std::max(s.arrivals.horizon_ms, e.t_ms + 1.0);
        }
        if (g.contains("regime")) {
            std::string r;
            read_field(g, "regime", r, "arrivals");
            s.arrivals.regime = parse_regime(r);
        }
        if (g.contains("slo_mode")) {
            std::string m;
            read_field(g, "slo_mode", m, "arrivals");
            s.arrivals.slo_mode = parse_slo_mode(m);
        }
        read_field(g, "horizon_ms", s.arrivals.horizon_ms, "arrivals");
    }

    if (root.contains("ablations")) {
        const auto& g = root.at("ablations");
        expect_keys(g, "ablations", {"no_gpu_sharing", "no_batching", "no_prewarm"});
        bool no_gpu_sharing = false, no_batching = false, no_prewarm = false;
        read_field(g, "no_gpu_sharing", no_gpu_sharing, "ablations");
        read_field(g, "no_batching", no_batching, "ablations");
        read_field(g, "no_prewarm", no_prewarm, "ablations");
        if (no_gpu_sharing) {
            // one indivisible accelerator per node, priced as the whole card
            s.grid.vgpus = {1};
            s.sim.vgpus_per_node = 1;
            s.pricing.vgpu_per_hour *= 7.0;
        }
        if (no_batching) s.grid.batches = {1};
        if (no_prewarm) s.sim.prewarm = false;
    }

    validate_grid(s.grid);
    validate_pricing(s.pricing);

    // derive each missing SLO from the unaccelerated critical path
    ProfileTable base;
    for (const auto& f : s.functions)
        base.add(f.id, Configuration{1, 1, 1}, synth_exec_time(f.base_exec_ms, {1, 1, 1}, s.synth));
    for (auto& a : s.apps)
        if (a.slo_ms <= 0.0) a.slo_ms = slo_for(a, base, s.arrivals.slo_mode);

    if (!s.arrivals.generated) {
        std::set<std::string> ids;
        for (const auto& a : s.apps) ids.insert(a.id);
        for (const auto& e : s.arrivals.times)
            if (!ids.count(e.app_id))
                throw std::invalid_argument("scenario: arrival references unknown app '" +
                                            e.app_id + "'");
    }
    return s;
}

inline Scenario parse_scenario(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    return scenario_from_json(root);
}

// resolved echo; feeding it back through scenario_from_json reproduces the run
inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json root;
    root["name"] = s.name;
    root["seed"] = s.sim.seed;
    auto& w = root["workload"];
    for (const auto& f : s.functions)
        w["functions"].push_back({{"id", f.id},
                                  {"base_exec_ms", f.base_exec_ms},
                                  {"cold_start_ms", f.cold_start_ms},
                                  {"input_size_mb", f.input_size_mb}});
    for (const auto& a : s.apps) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : a.edges) edges.push_back({e.first, e.second});
        w["apps"].push_back(
            {{"id", a.id}, {"nodes", a.nodes}, {"edges", edges}, {"slo_ms", a.slo_ms}});
    }
    root["grid"] = {{"batches", s.grid.batches}, {"vcpus", s.grid.vcpus}, {"vgpus", s.grid.vgpus}};
    root["synth"] = {{"kappa_batch", s.synth.kappa_batch},
                     {"kappa_vcpu", s.synth.kappa_vcpu},
                     {"kappa_vgpu", s.synth.kappa_vgpu}};
    root["pricing"] = {{"vcpu_per_hour", s.pricing.vcpu_per_hour},
                       {"vgpu_per_hour", s.pricing.vgpu_per_hour},
                       {"alpha", s.pricing.alpha},
                       {"beta", s.pricing.beta}};
    root["cluster"] = {{"nodes", s.sim.nodes},
                       {"vcpus_per_node", s.sim.vcpus_per_node},
                       {"vgpus_per_node", s.sim.vgpus_per_node},
                       {"keepalive_ms", s.sim.keepalive_ms},
                       {"transfer_fixed_ms", s.sim.transfer_fixed_ms},
                       {"transfer_per_mb_ms", s.sim.transfer_per_mb_ms},
                       {"noise_sigma", s.sim.noise_sigma},
                       {"prewarm", s.sim.prewarm},
                       {"prewarm_lambda", s.sim.prewarm_lambda},
                       {"recheck_rounds", s.sim.recheck_rounds},
                       {"recheck_poll_ms", s.sim.recheck_poll_ms}};
    root["scheduler"] = {{"kind", to_string(s.sim.dispatch.scheduler)},
                         {"k", s.sim.dispatch.k},
                         {"max_group_size", s.sim.dispatch.max_group_size},
                         {"sigma", s.sim.dispatch.sigma},
                         {"overhead_base_ms", s.sim.dispatch.overhead_base_ms},
                         {"overhead_per_unit_ms", s.sim.dispatch.overhead_per_unit_ms},
                         {"overhead_cap_ms", s.sim.dispatch.overhead_cap_ms}};
    auto& arr = root["arrivals"];
    arr["slo_mode"] = to_string(s.arrivals.slo_mode);
    arr["horizon_ms"] = s.arrivals.horizon_ms;
    if (s.arrivals.generated) {
        arr["regime"] = to_string(s.arrivals.regime);
    } else {
        arr["times"] = nlohmann::json::array();
        for (const auto& e : s.arrivals.times)
            arr["times"].push_back({{"t_ms", e.t_ms}, {"app", e.app_id}});
    }
    return root;
}

inline Trace make_trace(const Scenario& s) {
    if (s.arrivals.generated) {
        std::vector<std::string> ids;
        for (const auto& a : s.apps) ids.push_back(a.id);
        return generate_trace(ids, s.arrivals.regime, s.arrivals.horizon_ms,
                              split_seed(s.sim.seed, "trace"));
    }
    Trace t;
    t.horizon_ms = s.arrivals.horizon_ms;
    t.arrivals = s.arrivals.times;
    std::stable_sort(t.arrivals.begin(), t.arrivals.end(),
                     [](const ArrivalEvent& a, const ArrivalEvent& b) { return a.t_ms < b.t_ms; });
    for (size_t i = 0; i < t.arrivals.size(); ++i) t.arrivals[i].seq = i;
    return t;
}

inline SimResult run_scenario(const Scenario& s) {
    ProfileTable profiles = build_synthetic_profiles(s.functions, s.grid, s.synth);
    return run_simulation(s.sim, s.apps, s.functions, profiles, s.pricing, s.grid, make_trace(s));
}

// ready-made scenario documents; each is a complete, parseable example
inline std::string preset_scenario_text(const std::string& name) {
    auto doc = [](const char* nm, const char* regime, const char* slo_mode) {
        return std::string("{\n"
                           "  \"name\": \"") +
               nm +
               "\",\n"
               "  \"seed\": 1,\n"
               "  \"workload\": {\"preset\": \"builtin\"},\n"
               "  \"cluster\": {\"nodes\": 64},\n"
               "  \"arrivals\": {\"regime\": \"" +
               regime + "\", \"slo_mode\": \"" + slo_mode +
               "\", \"horizon_ms\": 60000}\n"
               "}\n";
    };
    if (name == "strict-light") return doc("strict-light", "light", "strict");
    if (name == "moderate-normal") return doc("moderate-normal", "normal", "moderate");
    if (name == "relaxed-heavy") return doc("relaxed-heavy", "heavy", "relaxed");
    throw std::invalid_argument("scenario: unknown preset '" + name + "'");
}

inline std::vector<std::string> preset_scenario_names() {
    return {"strict-light", "moderate-normal", "relaxed-heavy"};
}

}  // namespace esg
