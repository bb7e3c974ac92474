/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "esg/model.hpp"
#include "esg/workload.hpp"

namespace {

using namespace esg;

TEST(Workload, BuiltinFunctionFixtures) {
    auto fns = builtin_functions();
    ASSERT_EQ(fns.size(), 6u);
    const FunctionSpec* deblur = nullptr;
    for (const auto& f : fns)
        if (f.id == "deblur") deblur = &f;
    ASSERT_NE(deblur, nullptr);
    EXPECT_DOUBLE_EQ(deblur->base_exec_ms, 319.0);
    EXPECT_DOUBLE_EQ(deblur->cold_start_ms, 22343.0);
    EXPECT_DOUBLE_EQ(deblur->input_size_mb, 1.1);
}

TEST(Workload, BuiltinAppsAreValidChains) {
    auto apps = builtin_apps();
    ASSERT_EQ(apps.size(), 4u);
    std::set<std::string> known;
    for (const auto& f : builtin_functions()) known.insert(f.id);
    for (const auto& app : apps) {
        EXPECT_NO_THROW(validate_dag(app));
        for (const auto& n : app.nodes) EXPECT_TRUE(known.count(n)) << app.id << " / " << n;
        EXPECT_EQ(app.edges.size(), app.nodes.size() - 1);
    }
    EXPECT_EQ(apps[0].id, "image_classification");
    EXPECT_EQ(apps[0].nodes,
              (std::vector<std::string>{"super_resolution", "segmentation", "classification"}));
    EXPECT_EQ(apps[3].nodes.size(), 5u);
}

TEST(Workload, SloScalesTheUnacceleratedCriticalPath) {
    auto profiles = build_synthetic_profiles(builtin_functions(), default_grid(), SynthParams{});
    auto apps = builtin_apps();
    // image_classification at the minimal configuration: 86 + 293 + 147
    EXPECT_DOUBLE_EQ(base_critical_path_ms(apps[0], profiles), 526.0);
    EXPECT_DOUBLE_EQ(slo_for(apps[0], profiles, SloMode::strict), 420.8);
    EXPECT_DOUBLE_EQ(slo_for(apps[0], profiles, SloMode::moderate), 526.0);
    EXPECT_DOUBLE_EQ(slo_for(apps[0], profiles, SloMode::relaxed), 631.2);
}

TEST(Workload, CriticalPathTakesTheLongerBranch) {
    ApplicationDag dag;
    dag.id = "diamond";
    dag.nodes = {"a", "b", "c", "d"};
    dag.edges = {{"a", "b"}, {"a", "c"}, {"b", "d"}, {"c", "d"}};
    ProfileTable profiles;
    const Configuration base{1, 1, 1};
    profiles.add("a", base, 10.0);
    profiles.add("b", base, 50.0);
    profiles.add("c", base, 30.0);
    profiles.add("d", base, 5.0);
    EXPECT_DOUBLE_EQ(base_critical_path_ms(dag, profiles), 65.0);
}

TEST(Workload, RegimeGapWindows) {
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::heavy).lo_ms, 10.0);
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::heavy).hi_ms, 16.8);
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::normal).lo_ms, 20.0);
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::normal).hi_ms, 33.6);
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::light).lo_ms, 40.0);
    EXPECT_DOUBLE_EQ(regime_gaps(LoadRegime::light).hi_ms, 67.2);
}

TEST(Workload, ParseRoundTrips) {
    EXPECT_EQ(parse_regime("heavy"), LoadRegime::heavy);
    EXPECT_EQ(parse_slo_mode("relaxed"), SloMode::relaxed);
    EXPECT_STREQ(to_string(LoadRegime::light), "light");
    EXPECT_STREQ(to_string(SloMode::strict), "strict");
    EXPECT_THROW(parse_regime("bursty"), std::invalid_argument);
    EXPECT_THROW(parse_slo_mode("loose"), std::invalid_argument);
}

TEST(Workload, TraceRespectsWindowAndHorizon) {
    std::vector<std::string> apps{"x", "y", "z"};
    auto trace = generate_trace(apps, LoadRegime::normal, 60000.0, 7);
    ASSERT_FALSE(trace.arrivals.empty());
    auto gaps = regime_gaps(LoadRegime::normal);
    double prev = 0.0;
    std::set<std::string> seen;
    for (size_t i = 0; i < trace.arrivals.size(); ++i) {
        const auto& a = trace.arrivals[i];
        EXPECT_EQ(a.seq, i);
        EXPECT_GE(a.t_ms - prev, gaps.lo_ms);
        EXPECT_LE(a.t_ms - prev, gaps.hi_ms);
        EXPECT_LT(a.t_ms, 60000.0);
        prev = a.t_ms;
        seen.insert(a.app_id);
    }
    EXPECT_EQ(seen.size(), 3u);
    // mean gap is 26.8 ms, so about 2239 arrivals fit the minute
    EXPECT_GT(trace.arrivals.size(), 1800u);
    EXPECT_LT(trace.arrivals.size(), 2700u);
}

TEST(Workload, TraceIsSeedDeterministic) {
    std::vector<std::string> apps{"x", "y"};
    auto a = generate_trace(apps, LoadRegime::heavy, 30000.0, 11);
    auto b = generate_trace(apps, LoadRegime::heavy, 30000.0, 11);
    ASSERT_EQ(a.arrivals.size(), b.arrivals.size());
    for (size_t i = 0; i < a.arrivals.size(); ++i) {
        EXPECT_EQ(a.arrivals[i].t_ms, b.arrivals[i].t_ms);
        EXPECT_EQ(a.arrivals[i].app_id, b.arrivals[i].app_id);
    }
    auto c = generate_trace(apps, LoadRegime::heavy, 30000.0, 12);
    bool differs = c.arrivals.size() != a.arrivals.size();
    for (size_t i = 0; !differs && i < a.arrivals.size(); ++i)
        differs = a.arrivals[i].t_ms != c.arrivals[i].t_ms || a.arrivals[i].app_id != c.arrivals[i].app_id;
    EXPECT_TRUE(differs);
    EXPECT_THROW(generate_trace({}, LoadRegime::heavy, 1000.0, 1), std::invalid_argument);
    EXPECT_THROW(generate_trace(apps, LoadRegime::heavy, 0.0, 1), std::invalid_argument);
}

}  // namespace
