#pragma once

#include "safempd/diffusion.hpp"
#include "safempd/scenario_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace safempd {

struct ExperimentConfig {
    std::vector<Scenario> scenarios;
    std::vector<PlanningMode> modes;
    std::vector<std::uint64_t> seeds;
    DiffusionParams params;
    int exec_steps = 1;
    int max_cycles = 40;
    std::optional<int> recovery_budget;  // backup-policy horizon override

    void validate() const;
};

/// Bench config TOML: [bench] scenarios/modes/seeds/exec_steps/max_cycles,
/// [diffusion] sampler parameters, [shield] recovery_budget. Scenario paths
/// resolve relative to the config file's directory.
ExperimentConfig load_experiment_config(const std::string& path);

struct TrialSpec {
    Scenario scenario;
    DiffusionParams params;
    int exec_steps = 1;
    int max_cycles = 40;
    std::uint64_t seed = 0;
    std::optional<int> recovery_budget;
};

struct TrialResult {
    std::string scenario;
    std::string mode;
    std::uint64_t seed = 0;
    bool success = false;
    bool planner_error = false;  // exception recorded, suite continues
    std::string error;
    int violation_count = 0;  // executed states with g > 0
    int jackknife_count = 0;  // executed states past the jackknife limit
    int cycles_used = 0;
    int steps = 0;  // executed controls
    double total_cost = 0.0;
    double fallback_rate = 0.0;          // fraction of executed backup controls
    double contributing_fraction = 0.0;  // mean over denoising levels
    std::string trace_file;              // relative to the output directory
    // Wall time is reported only through the timing sidecar files so that
    // result and trace artifacts stay byte-identical across worker counts.
    double mean_cycle_ms = 0.0;
    double total_ms = 0.0;
};

/// Run one planning trial. When out_dir is nonempty a JSONL trace is written
/// there: a meta line (scenario geometry and parameters), one line per
/// denoising cycle, one line per executed step, and a final result line.
TrialResult run_trial(const TrialSpec& spec, const std::string& out_dir);

struct MetricsRow {
    std::string scenario;
    std::string mode;
    int n = 0;  // trials aggregated (planner errors excluded, counted apart)
    int planner_errors = 0;
    double success_rate = 0.0;
    double mean_violations = 0.0, std_violations = 0.0;
    double mean_jackknifes = 0.0, std_jackknifes = 0.0;
    double mean_cost = 0.0, std_cost = 0.0;
    double mean_fallback_rate = 0.0, std_fallback_rate = 0.0;
    double mean_contributing = 0.0, std_contributing = 0.0;
};

struct MetricsTable {
    std::vector<MetricsRow> rows;  // (scenario, mode) in first-appearance order
};

MetricsTable aggregate_metrics(const std::vector<TrialResult>& trials);

struct SuiteResult {
    std::vector<TrialResult> trials;
    MetricsTable metrics;
};

/// Cartesian product of scenarios x modes x seeds. Trials run in parallel
/// (one worker each internally); outputs are deterministic and independent
/// of the worker count. Writes traces, results.{csv,json}, metrics.{csv,json}
/// and the timing sidecars into out_dir.
SuiteResult run_suite(const ExperimentConfig& config, const std::string& out_dir);

enum class ExportFormat { csv, json };

void export_results(const std::vector<TrialResult>& trials, const std::string& path,
                    ExportFormat format);
void export_metrics(const MetricsTable& table, const std::string& path,
                    ExportFormat format);
/// Wall-clock sidecars (timing.csv / timing.json); excluded from
/// determinism comparisons by construction.
void export_timing(const std::vector<TrialResult>& trials, const std::string& out_dir);

} // namespace safempd
