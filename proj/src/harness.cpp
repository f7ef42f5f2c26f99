#include "safempd/harness.hpp"

#include "safempd/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace safempd {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')
                   ? c
                   : '_';
    return out.empty() ? std::string("unnamed") : out;
}

std::string trace_name(const TrialSpec& spec) {
    return "trace_" + sanitize(spec.scenario.name) + "_" + mode_id(spec.params.mode) +
           "_" + std::to_string(spec.seed) + ".jsonl";
}

ordered_json state_json(const State& x) {
    ordered_json a = ordered_json::array();
    for (double v : x) a.push_back(v);
    return a;
}

ordered_json meta_line(const TrialSpec& spec) {
    const Scenario& s = spec.scenario;
    ordered_json sys;
    sys["id"] = system_id(s.kind);
    sys["dt"] = s.model->dt();
    sys["primary_radius"] = s.primary_radius;
    switch (s.kind) {
        case SystemKind::double_integrator: {
            const auto& m = static_cast<const DoubleIntegrator2D&>(*s.model);
            sys["a_max"] = m.a_max;
            sys["v_max"] = m.v_max;
            break;
        }
        case SystemKind::kinematic_tt: {
            const auto& m = static_cast<const KinematicTractorTrailer&>(*s.model);
            sys["trailer_radius"] = s.trailer_radius;
            sys["wheelbase"] = m.p.wheelbase;
            sys["hitch_length"] = m.p.hitch_length;
            sys["v_max"] = m.p.v_max;
            sys["delta_max"] = m.p.delta_max;
            sys["theta_jk"] = m.p.theta_jk;
            break;
        }
        case SystemKind::accel_tt: {
            const auto& m = static_cast<const AccelTractorTrailer&>(*s.model);
            sys["trailer_radius"] = s.trailer_radius;
            sys["wheelbase"] = m.p.wheelbase;
            sys["hitch_length"] = m.p.hitch_length;
            sys["v_max"] = m.p.v_max;
            sys["delta_max"] = m.p.delta_max;
            sys["theta_jk"] = m.p.theta_jk;
            sys["a_max"] = m.a_max;
            sys["omega_max"] = m.omega_max;
            break;
        }
    }

    ordered_json world;
    world["x_min"] = s.world.min_x;
    world["x_max"] = s.world.max_x;
    world["y_min"] = s.world.min_y;
    world["y_max"] = s.world.max_y;
    world["margin"] = s.world.margin;

    ordered_json obstacles = ordered_json::array();
    for (const Obstacle& o : s.obstacles) {
        ordered_json j;
        if (o.kind == Obstacle::Kind::circle) {
            j["type"] = "circle";
            j["cx"] = o.circle.cx;
            j["cy"] = o.circle.cy;
            j["radius"] = o.circle.radius;
        } else {
            j["type"] = "box";
            j["x_min"] = o.box.min_x;
            j["x_max"] = o.box.max_x;
            j["y_min"] = o.box.min_y;
            j["y_max"] = o.box.max_y;
        }
        obstacles.push_back(std::move(j));
    }

    ordered_json goal;
    goal["px"] = s.goal.px;
    goal["py"] = s.goal.py;
    if (s.goal.heading) goal["heading"] = *s.goal.heading;
    goal["tolerance"] = s.goal.tolerance;
    goal["heading_tolerance"] = s.goal.heading_tolerance;

    ordered_json safety;
    safety["c_margin"] = s.safety.c_margin;
    safety["v_eps"] = s.safety.v_eps;
    safety["c_angle"] = s.safety.c_angle;

    ordered_json cost;
    cost["w_track"] = s.cost.w_track;
    cost["w_u"] = s.cost.w_u;
    cost["w_terminal"] = s.cost.w_terminal;

    ordered_json params;
    params["horizon"] = spec.params.horizon;
    params["candidates"] = spec.params.candidates;
    params["levels"] = spec.params.levels;
    if (spec.params.temperature) params["temperature"] = *spec.params.temperature;
    else params["temperature"] = nullptr;
    params["temperature_fraction"] = spec.params.temperature_fraction;
    params["sigma_scale"] = spec.params.sigma_scale;
    params["penalty_weight"] = spec.params.penalty_weight;
    params["beta_min"] = spec.params.beta_min;
    params["beta_max"] = spec.params.beta_max;
    if (spec.params.warm_level) params["warm_level"] = *spec.params.warm_level;
    else params["warm_level"] = nullptr;
    params["exec_steps"] = spec.exec_steps;
    params["max_cycles"] = spec.max_cycles;
    if (spec.recovery_budget) params["recovery_budget"] = *spec.recovery_budget;
    else params["recovery_budget"] = nullptr;

    ordered_json meta;
    meta["type"] = "meta";
    meta["schema_version"] = 1;
    meta["scenario"] = s.name;
    meta["mode"] = mode_id(spec.params.mode);
    meta["seed"] = spec.seed;
    meta["system"] = std::move(sys);
    meta["world"] = std::move(world);
    meta["obstacles"] = std::move(obstacles);
    meta["start"] = state_json(s.x_start);
    meta["start_g"] = safety_margin(s.x_start, s);
    meta["goal"] = std::move(goal);
    meta["safety"] = std::move(safety);
    meta["cost"] = std::move(cost);
    meta["params"] = std::move(params);
    return meta;
}

std::string format_double(double v) { return toml_format_double(v); }

double population_std(double sum, double sum_sq, int n) {
    if (n <= 0) return 0.0;
    const double mean = sum / n;
    return std::sqrt(std::max(0.0, sum_sq / n - mean * mean));
}

std::vector<std::string> toml_get_string_array(const TomlTable& t, const std::string& key,
                                               const std::string& ctx) {
    const TomlValue* v = t.find(key);
    if (!v) throw ConfigError(ctx + ": missing key '" + key + "'");
    if (!v->is_array()) throw ConfigError(ctx + ": key '" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : std::get<TomlArray>(v->data)) {
        if (!e.is_string())
            throw ConfigError(ctx + ": key '" + key + "' must contain strings");
        out.push_back(std::get<std::string>(e.data));
    }
    return out;
}

std::vector<std::uint64_t> toml_get_seed_array(const TomlTable& t, const std::string& key,
                                               const std::string& ctx) {
    const TomlValue* v = t.find(key);
    if (!v) throw ConfigError(ctx + ": missing key '" + key + "'");
    if (!v->is_array()) throw ConfigError(ctx + ": key '" + key + "' must be an array");
    std::vector<std::uint64_t> out;
    for (const auto& e : std::get<TomlArray>(v->data)) {
        if (!e.is_int() || std::get<std::int64_t>(e.data) < 0)
            throw ConfigError(ctx + ": key '" + key +
                              "' must contain non-negative integers");
        out.push_back(static_cast<std::uint64_t>(std::get<std::int64_t>(e.data)));
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    if (scenarios.empty()) throw ConfigError("bench config: no scenarios");
    if (modes.empty()) throw ConfigError("bench config: no modes");
    if (seeds.empty()) throw ConfigError("bench config: no seeds");
    if (exec_steps < 1) throw ConfigError("bench config: exec_steps must be >= 1");
    if (max_cycles < 0) throw ConfigError("bench config: max_cycles must be >= 0");
    params.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
    const TomlDocument doc = toml_parse_file(path);
    const std::string ctx = path;
    const std::int64_t version = toml_get_int(doc.root, "schema_version", ctx);
    if (version != 1)
        throw ConfigError(ctx + ": unsupported schema_version " + std::to_string(version));

    ExperimentConfig cfg;
    const TomlTable* bench = doc.table("bench");
    if (!bench) throw ConfigError(ctx + ": missing [bench] table");
    const std::string bctx = ctx + ": [bench]";
    for (const auto& [k, v] : bench->items) {
        static const char* allowed[] = {"scenarios", "modes",      "seeds",
                                        "seed_count", "exec_steps", "max_cycles"};
        if (std::find_if(std::begin(allowed), std::end(allowed),
                         [&](const char* a) { return k == a; }) == std::end(allowed))
            throw ConfigError(bctx + ": unknown key '" + k + "'");
    }

    const auto base = std::filesystem::path(path).parent_path();
    for (const std::string& rel : toml_get_string_array(*bench, "scenarios", bctx)) {
        const std::filesystem::path p = std::filesystem::path(rel).is_absolute()
                                            ? std::filesystem::path(rel)
                                            : base / rel;
        cfg.scenarios.push_back(load_scenario(p.string()));
    }
    for (const std::string& m : toml_get_string_array(*bench, "modes", bctx))
        cfg.modes.push_back(mode_from_id(m));

    if (bench->contains("seeds") && bench->contains("seed_count"))
        throw ConfigError(bctx + ": give either 'seeds' or 'seed_count', not both");
    if (bench->contains("seeds")) {
        cfg.seeds = toml_get_seed_array(*bench, "seeds", bctx);
    } else {
        const std::int64_t n = toml_opt_int(*bench, "seed_count", bctx).value_or(20);
        if (n < 1) throw ConfigError(bctx + ": seed_count must be >= 1");
        for (std::int64_t i = 0; i < n; ++i)
            cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    cfg.exec_steps =
        static_cast<int>(toml_opt_int(*bench, "exec_steps", bctx).value_or(1));
    cfg.max_cycles =
        static_cast<int>(toml_opt_int(*bench, "max_cycles", bctx).value_or(40));

    if (const TomlTable* diff = doc.table("diffusion")) {
        const std::string dctx = ctx + ": [diffusion]";
        for (const auto& [k, v] : diff->items) {
            static const char* allowed[] = {"horizon",     "candidates",
                                            "levels",      "temperature",
                                            "temperature_fraction", "sigma_scale",
                                            "penalty_weight", "beta_min",
                                            "beta_max",    "warm_level"};
            if (std::find_if(std::begin(allowed), std::end(allowed),
                             [&](const char* a) { return k == a; }) == std::end(allowed))
                throw ConfigError(dctx + ": unknown key '" + k + "'");
        }
        auto& p = cfg.params;
        p.horizon = static_cast<int>(toml_opt_int(*diff, "horizon", dctx).value_or(p.horizon));
        p.candidates =
            static_cast<int>(toml_opt_int(*diff, "candidates", dctx).value_or(p.candidates));
        p.levels = static_cast<int>(toml_opt_int(*diff, "levels", dctx).value_or(p.levels));
        p.temperature = toml_opt_double(*diff, "temperature", dctx);
        p.temperature_fraction = toml_opt_double(*diff, "temperature_fraction", dctx)
                                     .value_or(p.temperature_fraction);
        p.sigma_scale = toml_opt_double(*diff, "sigma_scale", dctx).value_or(p.sigma_scale);
        p.penalty_weight =
            toml_opt_double(*diff, "penalty_weight", dctx).value_or(p.penalty_weight);
        p.beta_min = toml_opt_double(*diff, "beta_min", dctx).value_or(p.beta_min);
        p.beta_max = toml_opt_double(*diff, "beta_max", dctx).value_or(p.beta_max);
        if (auto wl = toml_opt_int(*diff, "warm_level", dctx))
            p.warm_level = static_cast<int>(*wl);
    }

    if (const TomlTable* shield = doc.table("shield")) {
        const std::string sctx = ctx + ": [shield]";
        for (const auto& [k, v] : shield->items)
            if (k != "recovery_budget")
                throw ConfigError(sctx + ": unknown key '" + k + "'");
        if (auto tb = toml_opt_int(*shield, "recovery_budget", sctx)) {
            if (*tb < 1) throw ConfigError(sctx + ": recovery_budget must be >= 1");
            cfg.recovery_budget = static_cast<int>(*tb);
        }
    }

    cfg.validate();
    return cfg;
}

TrialResult run_trial(const TrialSpec& spec, const std::string& out_dir) {
    TrialResult r;
    r.scenario = spec.scenario.name;
    r.mode = mode_id(spec.params.mode);
    r.seed = spec.seed;

    std::vector<ordered_json> lines;
    lines.push_back(meta_line(spec));

    PlanResult plan;
    try {
        plan = mpd_plan(spec.scenario, spec.params, spec.exec_steps, spec.max_cycles,
                        RngStream(spec.seed), spec.recovery_budget);
        r.success = plan.success;
        r.cycles_used = plan.cycles_used;
        r.steps = static_cast<int>(plan.executed_controls.size());
        r.total_cost = plan.total_cost;

        for (double g : plan.executed_margins)
            if (g > 0.0) ++r.violation_count;
        if (spec.scenario.kind != SystemKind::double_integrator) {
            const double limit = spec.scenario.jackknife_limit();
            for (const State& x : plan.executed_states)
                if (std::abs(spec.scenario.hitch_angle(x)) > limit) ++r.jackknife_count;
        }
        int fallback_steps = 0;
        for (bool fb : plan.executed_fallback)
            if (fb) ++fallback_steps;
        r.fallback_rate = plan.executed_fallback.empty()
                              ? 0.0
                              : static_cast<double>(fallback_steps) /
                                    static_cast<double>(plan.executed_fallback.size());
        double contrib_sum = 0.0;
        int contrib_n = 0;
        for (const CycleDiagnostics& c : plan.cycles)
            for (const LevelDiagnostics& l : c.denoise.levels) {
                contrib_sum += l.contributing_fraction;
                ++contrib_n;
            }
        r.contributing_fraction = contrib_n > 0 ? contrib_sum / contrib_n : 0.0;
        double ms_sum = 0.0;
        for (double ms : plan.cycle_wall_ms) ms_sum += ms;
        r.total_ms = ms_sum;
        r.mean_cycle_ms =
            plan.cycle_wall_ms.empty() ? 0.0 : ms_sum / plan.cycle_wall_ms.size();

        for (const CycleDiagnostics& c : plan.cycles) {
            ordered_json j;
            j["type"] = "cycle";
            j["cycle"] = c.cycle;
            j["best_cost"] = c.best_cost;
            j["start_level"] = c.denoise.start_level;
            j["temperature"] = c.denoise.temperature_used;
            j["stalls"] = c.denoise.stall_count;
            ordered_json levels = ordered_json::array();
            for (const LevelDiagnostics& l : c.denoise.levels) {
                ordered_json lj;
                lj["level"] = l.level;
                lj["mean_cost"] = l.mean_cost;
                lj["min_cost"] = l.min_cost;
                lj["contributing"] = l.contributing_fraction;
                lj["fallback"] = l.fallback_fraction;
                lj["stalled"] = l.stalled;
                levels.push_back(std::move(lj));
            }
            j["levels"] = std::move(levels);
            lines.push_back(std::move(j));
        }
        for (std::size_t t = 1; t < plan.executed_states.size(); ++t) {
            ordered_json j;
            j["type"] = "step";
            j["t"] = t;
            j["state"] = state_json(plan.executed_states[t]);
            j["control"] = state_json(plan.executed_controls[t - 1]);
            j["g"] = plan.executed_margins[t];
            j["fallback"] = static_cast<bool>(plan.executed_fallback[t - 1]);
            lines.push_back(std::move(j));
        }
    } catch (const Error& e) {
        r.planner_error = true;
        r.error = e.what();
        r.success = false;
    }

    ordered_json res;
    res["type"] = "result";
    res["success"] = r.success;
    res["planner_error"] = r.planner_error;
    res["error"] = r.error;
    res["cycles"] = r.cycles_used;
    res["steps"] = r.steps;
    res["violations"] = r.violation_count;
    res["jackknifes"] = r.jackknife_count;
    res["total_cost"] = r.total_cost;
    res["fallback_rate"] = r.fallback_rate;
    res["contributing_fraction"] = r.contributing_fraction;
    if (!r.planner_error && !plan.executed_states.empty())
        res["final_state"] = state_json(plan.executed_states.back());
    lines.push_back(std::move(res));

    if (!out_dir.empty()) {
        r.trace_file = trace_name(spec);
        const std::filesystem::path p = std::filesystem::path(out_dir) / r.trace_file;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open trace file for writing: " + p.string());
        for (const auto& j : lines) out << j.dump() << '\n';
        out.flush();
        if (!out) throw ConfigError("failed writing trace file: " + p.string());
    }
    return r;
}

MetricsTable aggregate_metrics(const std::vector<TrialResult>& trials) {
    MetricsTable table;
    for (const TrialResult& t : trials) {
        MetricsRow* row = nullptr;
        for (MetricsRow& r : table.rows)
            if (r.scenario == t.scenario && r.mode == t.mode) {
                row = &r;
                break;
            }
        if (!row) {
            table.rows.push_back({});
            row = &table.rows.back();
            row->scenario = t.scenario;
            row->mode = t.mode;
        }
        if (t.planner_error) {
            ++row->planner_errors;
            continue;
        }
        ++row->n;
        row->success_rate += t.success ? 1.0 : 0.0;
        row->mean_violations += t.violation_count;
        row->std_violations += static_cast<double>(t.violation_count) * t.violation_count;
        row->mean_jackknifes += t.jackknife_count;
        row->std_jackknifes += static_cast<double>(t.jackknife_count) * t.jackknife_count;
        row->mean_cost += t.total_cost;
        row->std_cost += t.total_cost * t.total_cost;
        row->mean_fallback_rate += t.fallback_rate;
        row->std_fallback_rate += t.fallback_rate * t.fallback_rate;
        row->mean_contributing += t.contributing_fraction;
        row->std_contributing += t.contributing_fraction * t.contributing_fraction;
    }
    for (MetricsRow& r : table.rows) {
        const int n = r.n;
        const int denom = n + r.planner_errors;  // errors count as failures
        r.success_rate = denom > 0 ? r.success_rate / denom : 0.0;
        r.std_violations = population_std(r.mean_violations, r.std_violations, n);
        r.mean_violations = n > 0 ? r.mean_violations / n : 0.0;
        r.std_jackknifes = population_std(r.mean_jackknifes, r.std_jackknifes, n);
        r.mean_jackknifes = n > 0 ? r.mean_jackknifes / n : 0.0;
        r.std_cost = population_std(r.mean_cost, r.std_cost, n);
        r.mean_cost = n > 0 ? r.mean_cost / n : 0.0;
        r.std_fallback_rate = population_std(r.mean_fallback_rate, r.std_fallback_rate, n);
        r.mean_fallback_rate = n > 0 ? r.mean_fallback_rate / n : 0.0;
        r.std_contributing = population_std(r.mean_contributing, r.std_contributing, n);
        r.mean_contributing = n > 0 ? r.mean_contributing / n : 0.0;
    }
    return table;
}

SuiteResult run_suite(const ExperimentConfig& config, const std::string& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<TrialSpec> specs;
    for (const Scenario& s : config.scenarios)
        for (PlanningMode mode : config.modes)
            for (std::uint64_t seed : config.seeds) {
                TrialSpec spec;
                spec.scenario = s;
                spec.params = config.params;
                spec.params.mode = mode;
                spec.exec_steps = config.exec_steps;
                spec.max_cycles = config.max_cycles;
                spec.seed = seed;
                spec.recovery_budget = config.recovery_budget;
                specs.push_back(std::move(spec));
            }

    SuiteResult suite;
    suite.trials.resize(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) {
        // Trials parallelize across workers; inside one trial everything is
        // serial so nested pools never oversubscribe.
        set_worker_override(1);
        suite.trials[i] = run_trial(specs[i], out_dir);
    });

    suite.metrics = aggregate_metrics(suite.trials);
    const std::filesystem::path out(out_dir);
    export_results(suite.trials, (out / "results.csv").string(), ExportFormat::csv);
    export_results(suite.trials, (out / "results.json").string(), ExportFormat::json);
    export_metrics(suite.metrics, (out / "metrics.csv").string(), ExportFormat::csv);
    export_metrics(suite.metrics, (out / "metrics.json").string(), ExportFormat::json);
    export_timing(suite.trials, out_dir);
    return suite;
}

void export_results(const std::vector<TrialResult>& trials, const std::string& path,
                    ExportFormat format) {
    if (format == ExportFormat::csv) {
        std::string out =
            "scenario,mode,seed,success,planner_error,violation_count,jackknife_count,"
            "cycles,steps,total_cost,fallback_rate,contributing_fraction,trace_file\n";
        for (const TrialResult& t : trials) {
            out += t.scenario + ',' + t.mode + ',' + std::to_string(t.seed) + ',' +
                   (t.success ? "1" : "0") + ',' + (t.planner_error ? "1" : "0") + ',' +
                   std::to_string(t.violation_count) + ',' +
                   std::to_string(t.jackknife_count) + ',' +
                   std::to_string(t.cycles_used) + ',' + std::to_string(t.steps) + ',' +
                   format_double(t.total_cost) + ',' + format_double(t.fallback_rate) +
                   ',' + format_double(t.contributing_fraction) + ',' + t.trace_file +
                   '\n';
        }
        write_text_file(path, out);
        return;
    }
    ordered_json arr = ordered_json::array();
    for (const TrialResult& t : trials) {
        ordered_json j;
        j["scenario"] = t.scenario;
        j["mode"] = t.mode;
        j["seed"] = t.seed;
        j["success"] = t.success;
        j["planner_error"] = t.planner_error;
        j["error"] = t.error;
        j["violation_count"] = t.violation_count;
        j["jackknife_count"] = t.jackknife_count;
        j["cycles"] = t.cycles_used;
        j["steps"] = t.steps;
        j["total_cost"] = t.total_cost;
        j["fallback_rate"] = t.fallback_rate;
        j["contributing_fraction"] = t.contributing_fraction;
        j["trace_file"] = t.trace_file;
        arr.push_back(std::move(j));
    }
    write_text_file(path, arr.dump(2) + "\n");
}

void export_metrics(const MetricsTable& table, const std::string& path,
                    ExportFormat format) {
    if (format == ExportFormat::csv) {
        std::string out =
            "scenario,mode,n,planner_errors,success_rate,mean_violations,std_violations,"
            "mean_jackknifes,std_jackknifes,mean_cost,std_cost,mean_fallback_rate,"
            "std_fallback_rate,mean_contributing,std_contributing\n";
        for (const MetricsRow& r : table.rows) {
            out += r.scenario + ',' + r.mode + ',' + std::to_string(r.n) + ',' +
                   std::to_string(r.planner_errors) + ',' +
                   format_double(r.success_rate) + ',' +
                   format_double(r.mean_violations) + ',' +
                   format_double(r.std_violations) + ',' +
                   format_double(r.mean_jackknifes) + ',' +
                   format_double(r.std_jackknifes) + ',' + format_double(r.mean_cost) +
                   ',' + format_double(r.std_cost) + ',' +
                   format_double(r.mean_fallback_rate) + ',' +
                   format_double(r.std_fallback_rate) + ',' +
                   format_double(r.mean_contributing) + ',' +
                   format_double(r.std_contributing) + '\n';
        }
        write_text_file(path, out);
        return;
    }
    ordered_json arr = ordered_json::array();
    for (const MetricsRow& r : table.rows) {
        ordered_json j;
        j["scenario"] = r.scenario;
        j["mode"] = r.mode;
        j["n"] = r.n;
        j["planner_errors"] = r.planner_errors;
        j["success_rate"] = r.success_rate;
        j["mean_violations"] = r.mean_violations;
        j["std_violations"] = r.std_violations;
        j["mean_jackknifes"] = r.mean_jackknifes;
        j["std_jackknifes"] = r.std_jackknifes;
        j["mean_cost"] = r.mean_cost;
        j["std_cost"] = r.std_cost;
        j["mean_fallback_rate"] = r.mean_fallback_rate;
        j["std_fallback_rate"] = r.std_fallback_rate;
        j["mean_contributing"] = r.mean_contributing;
        j["std_contributing"] = r.std_contributing;
        arr.push_back(std::move(j));
    }
    write_text_file(path, arr.dump(2) + "\n");
}

void export_timing(const std::vector<TrialResult>& trials, const std::string& out_dir) {
    const std::filesystem::path out(out_dir);
    std::string csv = "scenario,mode,seed,mean_cycle_ms,total_ms\n";
    ordered_json arr = ordered_json::array();
    for (const TrialResult& t : trials) {
        csv += t.scenario + ',' + t.mode + ',' + std::to_string(t.seed) + ',' +
               format_double(t.mean_cycle_ms) + ',' + format_double(t.total_ms) + '\n';
        ordered_json j;
        j["scenario"] = t.scenario;
        j["mode"] = t.mode;
        j["seed"] = t.seed;
        j["mean_cycle_ms"] = t.mean_cycle_ms;
        j["total_ms"] = t.total_ms;
        arr.push_back(std::move(j));
    }
    write_text_file((out / "timing.csv").string(), csv);
    write_text_file((out / "timing.json").string(), arr.dump(2) + "\n");
}

} // namespace safempd
