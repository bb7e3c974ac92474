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

#include "esg/dispatch.hpp"
#include "esg/model.hpp"
#include "esg/workload.hpp"

namespace {

using namespace esg;

struct World {
    std::vector<FunctionSpec> fns;
    std::vector<ApplicationDag> apps;
    ConfigGrid grid;
    ProfileTable profiles;
    Pricing pricing;
};

World make_world(SloMode mode = SloMode::moderate) {
    World w;
    w.fns = builtin_functions();
    w.grid = default_grid();
    w.profiles = build_synthetic_profiles(w.fns, w.grid, SynthParams{});
    w.apps = builtin_apps();
    for (auto& app : w.apps) app.slo_ms = slo_for(app, w.profiles, mode);
    return w;
}

TEST(HomeInvoker, DeterministicAndInRange) {
    std::set<int> seen;
    for (const auto& app : builtin_apps())
        for (const auto& fn : app.nodes) {
            int n = home_invoker(app.id, fn, 16);
            EXPECT_GE(n, 0);
            EXPECT_LT(n, 16);
            EXPECT_EQ(n, home_invoker(app.id, fn, 16));
            seen.insert(n);
        }
    EXPECT_GT(seen.size(), 1u);  // the hash spreads keys over nodes
}

TEST(Planner, RejectsBadInputs) {
    World w = make_world();
    DispatchConfig cfg;
    cfg.k = 0;
    EXPECT_THROW(Planner(w.apps, w.profiles, w.pricing, w.grid, cfg), std::invalid_argument);
    cfg = DispatchConfig{};
    cfg.max_group_size = 0;
    EXPECT_THROW(Planner(w.apps, w.profiles, w.pricing, w.grid, cfg), std::invalid_argument);
    cfg = DispatchConfig{};
    auto dup = w.apps;
    dup.push_back(w.apps[0]);
    EXPECT_THROW(Planner(dup, w.profiles, w.pricing, w.grid, cfg), std::invalid_argument);
    auto noslo = w.apps;
    noslo[0].slo_ms = 0.0;
    EXPECT_THROW(Planner(noslo, w.profiles, w.pricing, w.grid, cfg), std::invalid_argument);
}

TEST(Planner, SuffixGroupsFollowTheRemainingChain) {
    World w = make_world();
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, DispatchConfig{});
    const std::string app = "expanded_image_classification";
    EXPECT_EQ(planner.group_fns(app, "deblur"),
              (std::vector<std::string>{"deblur", "super_resolution", "background_removal"}));
    EXPECT_EQ(planner.group_fns(app, "segmentation"),
              (std::vector<std::string>{"segmentation", "classification"}));
    EXPECT_EQ(planner.group_fns(app, "background_removal"),
              (std::vector<std::string>{"background_removal", "segmentation", "classification"}));
    EXPECT_LT(planner.group_ratio(app, "deblur"), 1.0);
    EXPECT_DOUBLE_EQ(planner.group_ratio(app, "segmentation"), 1.0);
    EXPECT_DOUBLE_EQ(planner.group_ratio(app, "background_removal"), 1.0);
    // a chain no longer than the group bound searches as one group
    EXPECT_DOUBLE_EQ(planner.group_ratio("image_classification", "super_resolution"), 1.0);
}

TEST(Planner, SearchDecisionMatchesDirectSearch) {
    World w = make_world();
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, DispatchConfig{});
    const std::string app = "image_classification";
    const std::string fn = "super_resolution";
    double slo = 0.0;
    for (const auto& a : w.apps)
        if (a.id == app) slo = a.slo_ms;

    auto d = planner.decide(app, fn, 3, 0.0, 0.0, 0.0);
    ASSERT_FALSE(d.paths.empty());
    EXPECT_GT(d.work, 0u);
    EXPECT_GE(d.overhead_ms, 0.1);

    std::vector<const StageOptions*> stages;
    for (const auto& f : planner.group_fns(app, fn)) stages.push_back(&planner.options(f));
    std::vector<int> caps(stages.size(), 0);
    caps[0] = 3;
    double g_slo = slo * planner.group_ratio(app, fn);
    auto direct = esg_1q_over_options(stages, g_slo, DispatchConfig{}.k, nullptr, caps);
    ASSERT_EQ(d.paths.size(), direct.size());
    for (size_t i = 0; i < direct.size(); ++i) {
        EXPECT_EQ(d.paths[i].cost, direct[i].cost);
        EXPECT_EQ(d.paths[i].configs, direct[i].configs);
    }
    for (const auto& p : d.paths) EXPECT_LE(p.configs[0].batch, 3);
}

TEST(Planner, QueueLengthCapsTheHeadBatch) {
    World w = make_world();
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, DispatchConfig{});
    auto d = planner.decide("image_classification", "super_resolution", 1, 0.0, 0.0, 0.0);
    for (const auto& p : d.paths) EXPECT_EQ(p.configs[0].batch, 1);
}

TEST(Planner, BlownBudgetYieldsNoPaths) {
    World w = make_world(SloMode::strict);
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, DispatchConfig{});
    // the oldest job has been waiting nearly the whole deadline
    double slo = 0.0;
    for (const auto& a : w.apps)
        if (a.id == "image_classification") slo = a.slo_ms;
    auto d = planner.decide("image_classification", "super_resolution", 2, slo - 1.0, 0.0, 0.0);
    EXPECT_TRUE(d.paths.empty());
}

TEST(Planner, OracleSchedulerAgreesWithSearchAndIsFree) {
    World w = make_world();
    DispatchConfig esg_cfg;
    DispatchConfig oracle_cfg;
    oracle_cfg.scheduler = SchedulerKind::oracle;
    Planner a(w.apps, w.profiles, w.pricing, w.grid, esg_cfg);
    Planner b(w.apps, w.profiles, w.pricing, w.grid, oracle_cfg);
    auto da = a.decide("image_classification", "super_resolution", 2, 0.0, 0.0, 0.0);
    auto db = b.decide("image_classification", "super_resolution", 2, 0.0, 0.0, 0.0);
    ASSERT_EQ(da.paths.size(), db.paths.size());
    for (size_t i = 0; i < da.paths.size(); ++i) {
        EXPECT_EQ(da.paths[i].cost, db.paths[i].cost);
        EXPECT_EQ(da.paths[i].configs, db.paths[i].configs);
    }
    EXPECT_DOUBLE_EQ(db.overhead_ms, 0.0);
    EXPECT_GT(da.overhead_ms, 0.0);
}

TEST(Planner, PreplannerClampsBatchesAndChargesEntryOnly) {
    World w = make_world(SloMode::relaxed);
    DispatchConfig cfg;
    cfg.scheduler = SchedulerKind::best_first;
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, cfg);
    const std::string app = "image_classification";
    auto entry = planner.decide(app, "super_resolution", 4, 0.0, 0.0, 0.0);
    ASSERT_EQ(entry.paths.size(), 1u);
    auto later = planner.decide(app, "segmentation", 4, 50.0, 40.0, 0.0);
    ASSERT_EQ(later.paths.size(), 1u);
    EXPECT_GT(entry.overhead_ms, later.overhead_ms);
    EXPECT_DOUBLE_EQ(later.overhead_ms, 0.1);

    // a queue of one cannot satisfy a preplanned batch above one
    auto plan_cfg = entry.paths[0].configs[0];
    auto clamped = planner.decide(app, "super_resolution", 1, 0.0, 0.0, 0.0);
    ASSERT_EQ(clamped.paths.size(), 1u);
    EXPECT_EQ(clamped.paths[0].configs[0].batch, 1);
    if (plan_cfg.batch > 1) EXPECT_TRUE(clamped.config_miss);
}

TEST(Planner, MeanSplitPicksWithinShare) {
    World w = make_world();
    DispatchConfig cfg;
    cfg.scheduler = SchedulerKind::enum_per_function;
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, cfg);
    auto d = planner.decide("image_classification", "super_resolution", 2, 0.0, 0.0, 0.0);
    ASSERT_EQ(d.paths.size(), 1u);
    EXPECT_LE(d.paths[0].configs[0].batch, 2);
    EXPECT_EQ(d.work, planner.options("super_resolution").cfgs.size());
    EXPECT_FALSE(d.config_miss);
}

TEST(Planner, HelperLookups) {
    World w = make_world();
    Planner planner(w.apps, w.profiles, w.pricing, w.grid, DispatchConfig{});
    EXPECT_EQ(planner.largest_batch_at_most(3), 2);
    EXPECT_EQ(planner.largest_batch_at_most(8), 8);
    EXPECT_EQ(planner.largest_batch_at_most(1), 1);
    EXPECT_THROW(planner.largest_batch_at_most(0), std::invalid_argument);
    EXPECT_EQ(planner.minimal_config(), (Configuration{1, 1, 1}));
    auto p = planner.single_stage_path("classification", Configuration{2, 1, 1});
    EXPECT_EQ(p.configs.size(), 1u);
    EXPECT_GT(p.time_ms, 0.0);
    EXPECT_GT(p.cost, 0.0);
}

}  // namespace
