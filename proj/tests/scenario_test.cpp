/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#include <gtest/gtest.h>

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "esg/metrics.hpp"
#include "esg/scenario.hpp"

namespace {

using namespace esg;
using nlohmann::json;

std::string error_of(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

TEST(Scenario, PresetDocumentsParseAndResolve) {
    for (const auto& name : preset_scenario_names()) {
        Scenario s = parse_scenario(preset_scenario_text(name));
        EXPECT_EQ(s.name, name);
        EXPECT_EQ(s.functions.size(), 6u);
        EXPECT_EQ(s.apps.size(), 4u);
        for (const auto& a : s.apps) EXPECT_GT(a.slo_ms, 0.0);
    }
    Scenario strict = parse_scenario(preset_scenario_text("strict-light"));
    for (const auto& a : strict.apps)
        if (a.id == "image_classification") EXPECT_NEAR(a.slo_ms, 0.8 * 526.0, 1e-9);
    EXPECT_THROW(preset_scenario_text("nope"), std::invalid_argument);
}

TEST(Scenario, ChainShorthandAndExplicitSlo) {
    Scenario s = parse_scenario(R"({
        "workload": {
            "functions": [
                {"id": "f", "base_exec_ms": 100, "cold_start_ms": 1000, "input_size_mb": 2},
                {"id": "g", "base_exec_ms": 200, "cold_start_ms": 1500, "input_size_mb": 3}
            ],
            "apps": [
                {"id": "pipe", "nodes": ["f", "g"]},
                {"id": "solo", "nodes": ["f"], "slo_ms": 1234}
            ]
        },
        "arrivals": {"slo_mode": "relaxed"}
    })");
    ASSERT_EQ(s.apps.size(), 2u);
    EXPECT_EQ(s.apps[0].edges,
              (std::vector<std::pair<std::string, std::string>>{{"f", "g"}}));
    EXPECT_NEAR(s.apps[0].slo_ms, 1.2 * 300.0, 1e-9);  // derived from the mode
    EXPECT_DOUBLE_EQ(s.apps[1].slo_ms, 1234.0);        // explicit value wins
}

TEST(Scenario, UnknownKeysReportTheirPath) {
    EXPECT_NE(error_of(R"({"bogus": 1, "workload": {"preset": "builtin"}})").find("$.bogus"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"workload": {"preset": "builtin"}, "cluster": {"nodez": 1}})")
                  .find("cluster.nodez"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"workload": {"preset": "builtin"}, "cluster": {"nodes": "many"}})")
                  .find("cluster.nodes"),
              std::string::npos);
}

TEST(Scenario, WorkloadSectionIsStrict) {
    EXPECT_NE(error_of(R"({"name": "x"})").find("workload"), std::string::npos);
    EXPECT_NE(error_of(R"({"workload": {"preset": "unknown"}})").find("preset"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"workload": {"preset": "builtin", "apps": []}})").find("excludes"),
              std::string::npos);
    EXPECT_NE(error_of("not json").find("invalid JSON"), std::string::npos);
}

TEST(Scenario, ExplicitArrivalTimesSortAndValidate) {
    Scenario s = parse_scenario(R"({
        "workload": {"preset": "builtin"},
        "arrivals": {"times": [
            {"t_ms": 50, "app": "image_classification"},
            {"t_ms": 10, "app": "depth_recognition"}
        ]}
    })");
    EXPECT_FALSE(s.arrivals.generated);
    Trace t = make_trace(s);
    ASSERT_EQ(t.arrivals.size(), 2u);
    EXPECT_DOUBLE_EQ(t.arrivals[0].t_ms, 10.0);
    EXPECT_EQ(t.arrivals[0].seq, 0u);
    EXPECT_EQ(t.arrivals[1].seq, 1u);
    EXPECT_DOUBLE_EQ(t.horizon_ms, 51.0);

    EXPECT_NE(error_of(R"({"workload": {"preset": "builtin"},
                           "arrivals": {"times": [{"t_ms": 0, "app": "nope"}]}})")
                  .find("unknown app"),
              std::string::npos);
    EXPECT_NE(error_of(R"({"workload": {"preset": "builtin"},
                           "arrivals": {"regime": "normal",
                                        "times": [{"t_ms": 0, "app": "image_classification"}]}})")
                  .find("excludes"),
              std::string::npos);
}

TEST(Scenario, AblationsFoldIntoResolvedFields) {
    Scenario s = parse_scenario(R"({
        "workload": {"preset": "builtin"},
        "ablations": {"no_gpu_sharing": true, "no_batching": true, "no_prewarm": true}
    })");
    EXPECT_EQ(s.grid.vgpus, (std::vector<int>{1}));
    EXPECT_EQ(s.grid.batches, (std::vector<int>{1}));
    EXPECT_EQ(s.sim.vgpus_per_node, 1);
    EXPECT_NEAR(s.pricing.vgpu_per_hour, 4.69, 1e-12);
    EXPECT_FALSE(s.sim.prewarm);
}

TEST(Scenario, PreplannerSigmaTracksClusterNoise) {
    Scenario tracked = parse_scenario(R"({
        "workload": {"preset": "builtin"},
        "cluster": {"noise_sigma": 0.2}
    })");
    EXPECT_DOUBLE_EQ(tracked.sim.dispatch.sigma, 0.2);
    Scenario pinned = parse_scenario(R"({
        "workload": {"preset": "builtin"},
        "cluster": {"noise_sigma": 0.2},
        "scheduler": {"sigma": 0.01}
    })");
    EXPECT_DOUBLE_EQ(pinned.sim.dispatch.sigma, 0.01);
}

TEST(Scenario, ResolvedEchoReproducesTheRun) {
    json doc = json::parse(preset_scenario_text("moderate-normal"));
    doc["arrivals"]["horizon_ms"] = 2000;
    doc["cluster"] = {{"nodes", 4}};
    Scenario first = scenario_from_json(doc);
    SimResult a = run_scenario(first);
    Scenario second = scenario_from_json(scenario_to_json(first));
    SimResult b = run_scenario(second);
    EXPECT_FALSE(a.instances.empty());
    EXPECT_EQ(trace_csv(a), trace_csv(b));
}

}  // namespace
