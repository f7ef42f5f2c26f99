#include "safempd/harness.hpp"
#include "safempd/parallel.hpp"
#include "safempd/plot.hpp"
#include "safempd/shield.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace safempd;
using ordered_json = nlohmann::ordered_json;

// Certification sampling is seeded with a fixed constant so repeated runs
// (and runs under different worker counts) produce identical reports.
constexpr std::uint64_t kCertifySeed = 0x5AFE;

int run_plan(const std::string& scenario_path, const std::string& mode,
             std::uint64_t seed, const std::string& out_dir, std::optional<int> K,
             std::optional<int> N, std::optional<double> lambda,
             std::optional<int> horizon, std::optional<int> tb, int exec_steps,
             int max_cycles) {
    TrialSpec spec;
    spec.scenario = load_scenario(scenario_path);
    spec.params.mode = mode_from_id(mode);
    if (K) spec.params.candidates = *K;
    if (N) spec.params.levels = *N;
    if (lambda) spec.params.temperature = *lambda;
    if (horizon) spec.params.horizon = *horizon;
    spec.params.validate();
    spec.exec_steps = exec_steps;
    spec.max_cycles = max_cycles;
    spec.seed = seed;
    spec.recovery_budget = tb;

    std::filesystem::create_directories(out_dir);
    const TrialResult r = run_trial(spec, out_dir);

    const std::string stem = "result_" + r.scenario + "_" + r.mode + "_" +
                             std::to_string(r.seed);
    export_results({r}, (std::filesystem::path(out_dir) / (stem + ".json")).string(),
                   ExportFormat::json);
    export_timing({r}, out_dir);

    std::cout << "scenario=" << r.scenario << " mode=" << r.mode << " seed=" << r.seed
              << " success=" << (r.success ? 1 : 0) << " steps=" << r.steps
              << " cycles=" << r.cycles_used << " violations=" << r.violation_count
              << " jackknifes=" << r.jackknife_count << " cost=" << r.total_cost
              << " fallback_rate=" << r.fallback_rate << "\n";
    if (r.planner_error) std::cerr << "planner error: " << r.error << "\n";
    std::cout << "trace: " << (std::filesystem::path(out_dir) / r.trace_file).string()
              << "\n";
    return r.success ? 0 : 3;
}

int run_bench(const std::string& config_path, const std::string& out_dir,
              std::optional<int> workers) {
    if (workers) set_worker_override(*workers);
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const SuiteResult suite = run_suite(cfg, out_dir);

    int failures = 0;
    for (const TrialResult& t : suite.trials)
        if (!t.success) ++failures;
    std::cout << "trials=" << suite.trials.size() << " failures=" << failures << "\n";
    for (const MetricsRow& r : suite.metrics.rows)
        std::cout << r.scenario << " " << r.mode << ": n=" << r.n
                  << " success=" << r.success_rate
                  << " mean_violations=" << r.mean_violations
                  << " mean_cost=" << r.mean_cost
                  << " mean_contributing=" << r.mean_contributing << "\n";
    std::cout << "results: " << (std::filesystem::path(out_dir) / "results.csv").string()
              << "\n";
    return 0;
}

int run_certify(const std::string& scenario_path, int samples, int t_cert,
                const std::string& out_path) {
    const Scenario scenario = load_scenario(scenario_path);
    const BackupPolicy policy = make_backup_policy(scenario, std::nullopt);
    const CertificationReport report = certify_backup(
        scenario, policy, *scenario.model, samples, t_cert, RngStream(kCertifySeed));

    ordered_json j;
    j["scenario"] = scenario.name;
    j["n_samples"] = report.n_samples;
    j["t_cert"] = report.t_cert;
    j["recovery_budget"] = report.recovery_budget;
    j["invariance_rate"] = report.invariance_rate;
    j["recovery_rate"] = report.recovery_rate;
    j["invariance_failures"] = report.invariance_failures;
    j["recovery_failures"] = report.recovery_failures;
    j["certified"] = report.certified();
    auto states_json = [](const std::vector<State>& xs) {
        ordered_json out = ordered_json::array();
        for (const State& x : xs) {
            ordered_json arr = ordered_json::array();
            for (double v : x) arr.push_back(v);
            out.push_back(std::move(arr));
        }
        return out;
    };
    j["invariance_counterexamples"] = states_json(report.invariance_counterexamples);
    j["recovery_counterexamples"] = states_json(report.recovery_counterexamples);
    write_text_file(out_path, j.dump(2) + "\n");

    std::cout << "scenario=" << scenario.name << " samples=" << report.n_samples
              << " invariance_rate=" << report.invariance_rate
              << " recovery_rate=" << report.recovery_rate
              << " certified=" << (report.certified() ? 1 : 0) << "\n";
    return report.certified() ? 0 : 4;
}

int run_gen(std::uint64_t seed, const std::string& system, int obstacles,
            const std::string& out_path) {
    const Scenario s = generate_scenario(seed, system_from_id(system), obstacles);
    save_scenario(s, out_path);
    std::cout << "wrote " << out_path << " (" << s.obstacles.size() << " obstacles)\n";
    return 0;
}

int run_plot(const std::string& trace_path, const std::string& out_path) {
    emit_plot(trace_path, out_path);
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-based trajectory planner with a shielded rollout safety layer"};
    app.require_subcommand(1);

    std::string scenario_path, mode = "shielded", out_dir, config_path, out_path,
                trace_path, system;
    std::uint64_t seed = 0;
    std::optional<int> K, N, horizon, tb, workers;
    std::optional<double> lambda;
    int exec_steps = 1, max_cycles = 40, samples = 10000, t_cert = 100, obstacles = 6;

    CLI::App* plan = app.add_subcommand("plan", "Plan one trial and write its trace");
    plan->add_option("--scenario", scenario_path, "Scenario TOML file")->required();
    plan->add_option("--mode", mode, "shielded|vanilla|filtered|penalty");
    plan->add_option("--seed", seed, "Random seed")->required();
    plan->add_option("--out", out_dir, "Output directory")->required();
    plan->add_option("--K", K, "Candidates per level");
    plan->add_option("--N", N, "Denoising levels");
    plan->add_option("--lambda", lambda, "Softmax temperature (omit for auto)");
    plan->add_option("--horizon", horizon, "Planning horizon T");
    plan->add_option("--tb", tb, "Backup rollout horizon T_B");
    plan->add_option("--exec-steps", exec_steps, "Executed steps per cycle");
    plan->add_option("--max-cycles", max_cycles, "Replanning budget");

    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
    bench->add_option("--config", config_path, "Bench config TOML")->required();
    bench->add_option("--out", out_dir, "Output directory")->required();
    bench->add_option("--workers", workers, "Worker threads");

    CLI::App* certify = app.add_subcommand("certify", "Certify the backup policy");
    certify->add_option("--scenario", scenario_path, "Scenario TOML file")->required();
    certify->add_option("--samples", samples, "Monte Carlo samples")->required();
    certify->add_option("--t-cert", t_cert, "Invariance rollout length")->required();
    certify->add_option("--out", out_path, "Report JSON file")->required();

    CLI::App* gen = app.add_subcommand("gen", "Generate a random scenario");
    gen->add_option("--seed", seed, "Random seed")->required();
    gen->add_option("--system", system, "System id")->required();
    gen->add_option("--obstacles", obstacles, "Circle obstacle count")->required();
    gen->add_option("--out", out_path, "Scenario TOML file")->required();

    CLI::App* plot = app.add_subcommand("plot", "Render a trace as SVG");
    plot->add_option("--trace", trace_path, "Trace JSONL file")->required();
    plot->add_option("--out", out_path, "SVG output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (plan->parsed())
            return run_plan(scenario_path, mode, seed, out_dir, K, N, lambda, horizon,
                            tb, exec_steps, max_cycles);
        if (bench->parsed()) return run_bench(config_path, out_dir, workers);
        if (certify->parsed())
            return run_certify(scenario_path, samples, t_cert, out_path);
        if (gen->parsed()) return run_gen(seed, system, obstacles, out_path);
        if (plot->parsed()) return run_plot(trace_path, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
