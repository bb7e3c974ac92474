/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esg/metrics.hpp"
#include "esg/scenario.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
    std::optional<std::string> scheduler, regime, slo_mode;
    std::optional<uint64_t> seed;
    std::optional<int> k, group_size, nodes;
    std::optional<double> horizon_ms, sigma;
    bool no_gpu_sharing = false, no_batching = false, no_prewarm = false;
};

void add_override_flags(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--scheduler", o.scheduler, "esg, best_first, enum_per_function or oracle");
    cmd.add_option("--regime", o.regime, "arrival load: light, normal or heavy");
    cmd.add_option("--slo-mode", o.slo_mode, "deadline tightness: strict, moderate or relaxed");
    cmd.add_option("--seed", o.seed, "root random seed");
    cmd.add_option("--k", o.k, "number of configuration paths kept per search");
    cmd.add_option("--group-size", o.group_size, "max functions scheduled per search");
    cmd.add_option("--nodes", o.nodes, "cluster node count");
    cmd.add_option("--horizon-ms", o.horizon_ms, "arrival generation horizon");
    cmd.add_option("--sigma", o.sigma, "execution time noise (std dev fraction)");
    cmd.add_flag("--no-gpu-sharing", o.no_gpu_sharing, "whole-GPU nodes, no slicing");
    cmd.add_flag("--no-batching", o.no_batching, "restrict every batch to one job");
    cmd.add_flag("--no-prewarm", o.no_prewarm, "disable predictive container prewarming");
}

json load_doc(const std::string& scenario_file, const std::string& preset) {
    if (!scenario_file.empty() && !preset.empty())
        throw std::invalid_argument("pass either --scenario or --preset, not both");
    std::string text;
    if (!scenario_file.empty()) {
        std::ifstream in(scenario_file);
        if (!in) throw std::invalid_argument("cannot read scenario file " + scenario_file);
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    } else {
        text = esg::preset_scenario_text(preset.empty() ? "moderate-normal" : preset);
    }
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
}

void apply_overrides(json& doc, const Overrides& o) {
    if (o.scheduler) doc["scheduler"]["kind"] = *o.scheduler;
    if (o.regime) doc["arrivals"]["regime"] = *o.regime;
    if (o.slo_mode) doc["arrivals"]["slo_mode"] = *o.slo_mode;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.k) doc["scheduler"]["k"] = *o.k;
    if (o.group_size) doc["scheduler"]["max_group_size"] = *o.group_size;
    if (o.nodes) doc["cluster"]["nodes"] = *o.nodes;
    if (o.horizon_ms) doc["arrivals"]["horizon_ms"] = *o.horizon_ms;
    if (o.sigma) doc["cluster"]["noise_sigma"] = *o.sigma;
    if (o.no_gpu_sharing) doc["ablations"]["no_gpu_sharing"] = true;
    if (o.no_batching) doc["ablations"]["no_batching"] = true;
    if (o.no_prewarm) doc["ablations"]["no_prewarm"] = true;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
}

struct RunOutput {
    esg::Scenario scenario;
    esg::SimResult result;
    esg::Summary summary;
    size_t violations = 0;
};

RunOutput execute(const esg::Scenario& s, const std::string& out_dir) {
    RunOutput r{s, esg::run_scenario(s), {}, 0};
    r.summary = esg::summarize(r.result, s.pricing);
    auto violations = esg::validate_schedule(r.result, s.sim, s.apps);
    r.violations = violations.size();
    for (const auto& v : violations) std::cerr << "validation: " << v << '\n';
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "scenario.json", esg::scenario_to_json(s).dump(2) + "\n");
        write_file(fs::path(out_dir) / "trace.csv", esg::trace_csv(r.result));
        write_file(fs::path(out_dir) / "summary.csv", esg::summary_csv(r.summary));
    }
    return r;
}

void print_run(const RunOutput& r, const std::string& out_dir) {
    const auto& s = r.summary;
    std::printf("scenario %s  scheduler %s  seed %llu\n", r.scenario.name.c_str(),
                esg::to_string(r.scenario.sim.dispatch.scheduler),
                static_cast<unsigned long long>(r.scenario.sim.seed));
    std::printf("instances %llu  hit_rate %.4f  p50 %.1f ms  p95 %.1f ms\n",
                static_cast<unsigned long long>(s.overall.instances), s.overall.hit_rate,
                s.overall.p50_ms, s.overall.p95_ms);
    std::printf("cost $%.4f ($%.3f per 1k jobs)  mean batch %.2f  mean overhead %.2f ms\n",
                s.total_cost_usd, s.usd_per_1k_jobs, s.mean_batch, s.mean_overhead_ms);
    std::printf("cold %llu  config_misses %llu  forced %llu  validation %s\n",
                static_cast<unsigned long long>(s.cold_starts),
                static_cast<unsigned long long>(s.config_misses),
                static_cast<unsigned long long>(s.forced_dispatches),
                r.violations == 0 ? "OK" : "FAILED");
    if (!out_dir.empty()) std::printf("wrote %s/{scenario.json,trace.csv,summary.csv}\n", out_dir.c_str());
}

int cmd_run(const std::string& scenario_file, const std::string& preset, const Overrides& o,
            std::string out_dir) {
    json doc = load_doc(scenario_file, preset);
    apply_overrides(doc, o);
    esg::Scenario s = esg::scenario_from_json(doc);
    if (out_dir.empty())
        out_dir = (fs::path("out") /
                   (s.name + "-" + esg::to_string(s.sim.dispatch.scheduler)))
                      .string();
    RunOutput r = execute(s, out_dir);
    print_run(r, out_dir);
    return r.violations == 0 ? 0 : 2;
}

int cmd_compare(const std::string& scenario_file, const std::string& preset, const Overrides& o,
                std::string out_dir, const std::vector<std::string>& schedulers) {
    json doc = load_doc(scenario_file, preset);
    apply_overrides(doc, o);
    if (out_dir.empty()) {
        esg::Scenario probe = esg::scenario_from_json(doc);
        out_dir = (fs::path("out") / (probe.name + "-compare")).string();
    }
    std::printf("%-12s %9s %10s %12s %14s %8s\n", "scheduler", "hit_rate", "p95_ms",
                "usd_per_1k", "overhead_ms", "forced");
    size_t violations = 0;
    for (const auto& kind : schedulers) {
        json d = doc;
        d["scheduler"]["kind"] = kind;
        esg::Scenario s = esg::scenario_from_json(d);
        RunOutput r = execute(s, (fs::path(out_dir) / kind).string());
        violations += r.violations;
        std::printf("%-12s %9.4f %10.1f %12.3f %14.2f %8llu\n", kind.c_str(),
                    r.summary.overall.hit_rate, r.summary.overall.p95_ms,
                    r.summary.usd_per_1k_jobs, r.summary.mean_overhead_ms,
                    static_cast<unsigned long long>(r.summary.forced_dispatches));
    }
    std::printf("wrote per-scheduler outputs under %s\n", out_dir.c_str());
    return violations == 0 ? 0 : 2;
}

void set_sweep_value(json& doc, const std::string& param, const std::string& value) {
    if (param == "k")
        doc["scheduler"]["k"] = std::stoi(value);
    else if (param == "group_size")
        doc["scheduler"]["max_group_size"] = std::stoi(value);
    else if (param == "sigma")
        doc["cluster"]["noise_sigma"] = std::stod(value);
    else if (param == "regime")
        doc["arrivals"]["regime"] = value;
    else
        throw std::invalid_argument("sweep: unknown param '" + param +
                                    "' (expected k, group_size, sigma or regime)");
}

int cmd_sweep(const std::string& scenario_file, const std::string& preset, const Overrides& o,
              std::string out_dir, const std::string& param,
              const std::vector<std::string>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: --values must be nonempty");
    json doc = load_doc(scenario_file, preset);
    apply_overrides(doc, o);
    if (out_dir.empty()) {
        esg::Scenario probe = esg::scenario_from_json(doc);
        out_dir = (fs::path("out") / (probe.name + "-sweep-" + param)).string();
    }
    std::string csv =
        "param,value,instances,hit_rate,p50_ms,p95_ms,total_cost_usd,usd_per_1k_jobs,"
        "mean_batch,config_misses,forced_dispatches,mean_overhead_ms,p50_overhead_ms,"
        "p95_overhead_ms\n";
    std::printf("%-10s %9s %10s %12s %13s %13s\n", param.c_str(), "hit_rate", "p95_ms",
                "usd_per_1k", "overhead_ms", "p95_ovh_ms");
    size_t violations = 0;
    for (const auto& value : values) {
        json d = doc;
        set_sweep_value(d, param, value);
        esg::Scenario s = esg::scenario_from_json(d);
        RunOutput r = execute(s, (fs::path(out_dir) / (param + "-" + value)).string());
        violations += r.violations;
        std::vector<double> overheads;
        overheads.reserve(r.result.tasks.size());
        for (const auto& t : r.result.tasks) overheads.push_back(t.overhead_ms);
        double p50_ovh = esg::percentile(overheads, 50.0);
        double p95_ovh = esg::percentile(overheads, 95.0);
        const auto& m = r.summary;
        char line[512];
        std::snprintf(line, sizeof(line),
                      "%s,%s,%llu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%llu,%llu,%.6f,%.6f,%.6f\n",
                      param.c_str(), value.c_str(),
                      static_cast<unsigned long long>(m.overall.instances), m.overall.hit_rate,
                      m.overall.p50_ms, m.overall.p95_ms, m.total_cost_usd, m.usd_per_1k_jobs,
                      m.mean_batch, static_cast<unsigned long long>(m.config_misses),
                      static_cast<unsigned long long>(m.forced_dispatches), m.mean_overhead_ms,
                      p50_ovh, p95_ovh);
        csv += line;
        std::printf("%-10s %9.4f %10.1f %12.3f %13.3f %13.3f\n", value.c_str(),
                    m.overall.hit_rate, m.overall.p95_ms, m.usd_per_1k_jobs, m.mean_overhead_ms,
                    p95_ovh);
    }
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "sweep.csv", csv);
    std::printf("wrote %s/sweep.csv\n", out_dir.c_str());
    return violations == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deadline-aware scheduling of DNN workflows on a simulated GPU-sharing cluster"};
    app.require_subcommand(1);

    std::string scenario_file, preset, out_dir;
    Overrides overrides;
    std::vector<std::string> schedulers{"esg", "best_first", "enum_per_function"};

    auto* run = app.add_subcommand("run", "run one scenario and write trace/summary CSVs");
    run->add_option("--scenario", scenario_file, "scenario JSON file");
    run->add_option("--preset", preset, "bundled scenario: strict-light, moderate-normal, relaxed-heavy");
    run->add_option("--out", out_dir, "output directory (default out/<name>-<scheduler>)");
    add_override_flags(*run, overrides);

    std::string sweep_param = "k";
    std::vector<std::string> sweep_values;

    auto* sweep = app.add_subcommand("sweep", "vary one parameter, one run per value");
    sweep->add_option("--scenario", scenario_file, "scenario JSON file");
    sweep->add_option("--preset", preset, "bundled scenario name");
    sweep->add_option("--out", out_dir, "output directory (default out/<name>-sweep-<param>)");
    sweep->add_option("--param", sweep_param, "k, group_size, sigma or regime");
    sweep->add_option("--values", sweep_values, "values to sweep")->delimiter(',');
    add_override_flags(*sweep, overrides);

    auto* compare = app.add_subcommand("compare", "run the same scenario once per scheduler");
    compare->add_option("--scenario", scenario_file, "scenario JSON file");
    compare->add_option("--preset", preset, "bundled scenario name");
    compare->add_option("--out", out_dir, "output directory (default out/<name>-compare)");
    compare->add_option("--schedulers", schedulers, "schedulers to compare")->delimiter(',');
    add_override_flags(*compare, overrides);

    auto* presets = app.add_subcommand("presets", "print the bundled scenario documents");

    CLI11_PARSE(app, argc, argv);
    try {
        if (presets->parsed()) {
            for (const auto& name : esg::preset_scenario_names())
                std::cout << "# " << name << "\n" << esg::preset_scenario_text(name) << "\n";
            return 0;
        }
        if (run->parsed()) return cmd_run(scenario_file, preset, overrides, out_dir);
        if (sweep->parsed())
            return cmd_sweep(scenario_file, preset, overrides, out_dir, sweep_param, sweep_values);
        return cmd_compare(scenario_file, preset, overrides, out_dir, schedulers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
