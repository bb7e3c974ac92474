/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "esg/model.hpp"
#include "esg/rand.hpp"

namespace esg {

enum class LoadRegime { heavy, normal, light };
enum class SloMode { strict, moderate, relaxed };

inline const char* to_string(LoadRegime r) {
    switch (r) {
        case LoadRegime::heavy: return "heavy";
        case LoadRegime::normal: return "normal";
        case LoadRegime::light: return "light";
    }
    return "?";
}

inline const char* to_string(SloMode m) {
    switch (m) {
        case SloMode::strict: return "strict";
        case SloMode::moderate: return "moderate";
        case SloMode::relaxed: return "relaxed";
    }
    return "?";
}

inline LoadRegime parse_regime(const std::string& s) {
    if (s == "heavy") return LoadRegime::heavy;
    if (s == "normal") return LoadRegime::normal;
    if (s == "light") return LoadRegime::light;
    throw std::invalid_argument("unknown load regime: " + s);
}

inline SloMode parse_slo_mode(const std::string& s) {
    if (s == "strict") return SloMode::strict;
    if (s == "moderate") return SloMode::moderate;
    if (s == "relaxed") return SloMode::relaxed;
    throw std::invalid_argument("unknown slo mode: " + s);
}

// Inter-arrival gaps are drawn uniformly from a per-regime window.
struct GapRange {
    double lo_ms = 0.0;
    double hi_ms = 0.0;
};

inline GapRange regime_gaps(LoadRegime r) {
    switch (r) {
        case LoadRegime::heavy: return {10.0, 16.8};
        case LoadRegime::normal: return {20.0, 33.6};
        case LoadRegime::light: return {40.0, 67.2};
    }
    return {};
}

inline double slo_factor(SloMode m) {
    switch (m) {
        case SloMode::strict: return 0.8;
        case SloMode::moderate: return 1.0;
        case SloMode::relaxed: return 1.2;
    }
    return 0.0;
}

// Reference model zoo: single-job exec time at the minimal configuration,
// container cold start, input payload size, and per-model speedup shape.
// The shapes differ on purpose. Pixel-level models (super resolution, depth)
// ride the GPU and batch poorly because activations blow up; the compact
// classifier batches almost for free; deconvolution (deblur) is memory bound,
// so extra GPU slices help less than elsewhere. Those asymmetries are what a
// whole-pipeline planner can exploit and a per-stage one cannot.
inline std::vector<FunctionSpec> builtin_functions() {
    return {
        {"super_resolution", 86.0, 3503.0, 2.7, SynthParams{0.75, 0.05, 0.50}},
        {"segmentation", 293.0, 16510.0, 2.5, SynthParams{0.30, 0.08, 0.45}},
        {"deblur", 319.0, 22343.0, 1.1, SynthParams{0.85, 0.20, 0.30}},
        {"classification", 147.0, 18299.0, 0.147, SynthParams{0.15, 0.25, 0.25}},
        {"background_removal", 1047.0, 3729.0, 2.5, SynthParams{0.50, 0.12, 0.40}},
        {"depth_recognition", 828.0, 16479.0, 0.648, SynthParams{0.60, 0.06, 0.48}},
    };
}

inline ApplicationDag chain_app(std::string id, const std::vector<std::string>& fns) {
    ApplicationDag dag;
    dag.id = std::move(id);
    dag.nodes = fns;
    for (size_t i = 0; i + 1 < fns.size(); ++i) dag.edges.push_back({fns[i], fns[i + 1]});
    return dag;
}

inline std::vector<ApplicationDag> builtin_apps() {
    return {
        chain_app("image_classification", {"super_resolution", "segmentation", "classification"}),
        chain_app("depth_recognition", {"deblur", "super_resolution", "depth_recognition"}),
        chain_app("background_elimination", {"super_resolution", "deblur", "background_removal"}),
        chain_app("expanded_image_classification",
                  {"deblur", "super_resolution", "background_removal", "segmentation", "classification"}),
    };
}

// Longest entry-to-exit path weighted by each function's exec time at the
// minimal configuration. This is the unaccelerated end-to-end latency the
// SLO is expressed against.
inline double base_critical_path_ms(const ApplicationDag& dag, const ProfileTable& profiles) {
    validate_dag(dag);
    const Configuration base{1, 1, 1};
    auto adj = adjacency(dag);
    auto order = topo_order(dag);
    std::map<std::string, double> finish;
    double best = 0.0;
    for (const auto& id : order) {
        double start = 0.0;
        for (const auto& p : adj.preds.at(id)) start = std::max(start, finish.at(p));
        double f = start + profiles.exec_ms(id, base);
        finish[id] = f;
        best = std::max(best, f);
    }
    return best;
}

inline double slo_for(const ApplicationDag& dag, const ProfileTable& profiles, SloMode mode) {
    return slo_factor(mode) * base_critical_path_ms(dag, profiles);
}

struct ArrivalEvent {
    double t_ms = 0.0;
    std::string app_id;
    uint64_t seq = 0;  // global arrival index
};

struct Trace {
    std::vector<ArrivalEvent> arrivals;
    double horizon_ms = 0.0;
};

// One shared arrival process: gaps accumulate from zero, each arrival picks
// an application uniformly. Per arrival the gap is drawn before the app so
// the stream is reproducible from the seed alone.
inline Trace generate_trace(const std::vector<std::string>& app_ids, LoadRegime regime, double horizon_ms,
                            uint64_t seed) {
    if (app_ids.empty()) throw std::invalid_argument("trace: no applications");
    if (!(horizon_ms > 0.0)) throw std::invalid_argument("trace: nonpositive horizon");
    GapRange gaps = regime_gaps(regime);
    Rng rng(seed);
    Trace trace;
    trace.horizon_ms = horizon_ms;
    double t = 0.0;
    uint64_t seq = 0;
    for (;;) {
        t += rng.uniform(gaps.lo_ms, gaps.hi_ms);
        if (t >= horizon_ms) break;
        const auto& app = app_ids[rng.below(app_ids.size())];
        trace.arrivals.push_back(ArrivalEvent{t, app, seq++});
    }
    return trace;
}

}  // namespace esg
