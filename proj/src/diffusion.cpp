#include "safempd/diffusion.hpp"

#include "safempd/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace safempd {

NoiseSchedule make_noise_schedule(int levels, double beta_min, double beta_max) {
    if (levels < 1) throw ConfigError("noise schedule: levels must be >= 1");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max)
        throw ConfigError("noise schedule: need 0 < beta_min <= beta_max < 1");
    NoiseSchedule s;
    s.levels = levels;
    s.beta.resize(static_cast<std::size_t>(levels));
    s.alpha_bar.resize(static_cast<std::size_t>(levels));
    double prod = 1.0;
    for (int i = 0; i < levels; ++i) {
        double frac = levels == 1 ? 0.0 : static_cast<double>(i) / (levels - 1);
        double b = beta_min + (beta_max - beta_min) * frac;
        prod *= 1.0 - b;
        s.beta[static_cast<std::size_t>(i)] = b;
        s.alpha_bar[static_cast<std::size_t>(i)] = prod;
    }
    return s;
}

std::string mode_id(PlanningMode mode) {
    switch (mode) {
        case PlanningMode::shielded: return "shielded";
        case PlanningMode::vanilla: return "vanilla";
        case PlanningMode::filtered: return "filtered";
        case PlanningMode::penalty: return "penalty";
    }
    throw ContractViolation("mode_id: unknown mode");
}

PlanningMode mode_from_id(const std::string& id) {
    if (id == "shielded") return PlanningMode::shielded;
    if (id == "vanilla") return PlanningMode::vanilla;
    if (id == "filtered") return PlanningMode::filtered;
    if (id == "penalty") return PlanningMode::penalty;
    throw ConfigError("unknown planning mode '" + id +
                      "' (expected shielded, vanilla, filtered or penalty)");
}

void DiffusionParams::validate() const {
    if (horizon < 1) throw ConfigError("diffusion: horizon must be >= 1");
    if (candidates < 1) throw ConfigError("diffusion: candidates must be >= 1");
    if (levels < 1) throw ConfigError("diffusion: levels must be >= 1");
    if (!(sigma_scale > 0.0)) throw ConfigError("diffusion: sigma_scale must be > 0");
    if (temperature && !(*temperature > 0.0))
        throw ConfigError("diffusion: temperature must be > 0 when set");
    if (!(temperature_fraction > 0.0))
        throw ConfigError("diffusion: temperature_fraction must be > 0");
    if (penalty_weight < 0.0) throw ConfigError("diffusion: penalty_weight must be >= 0");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max)
        throw ConfigError("diffusion: need 0 < beta_min <= beta_max < 1");
    if (warm_level && (*warm_level < 1 || *warm_level > levels))
        throw ConfigError("diffusion: warm_level must be in [1, levels]");
}

ControlSequence forward_noise(const ControlSequence& y0, int level,
                              const NoiseSchedule& schedule, RngStream& rng) {
    if (level < 0 || level > schedule.levels)
        throw ContractViolation("forward_noise: level out of range");
    if (level == 0) return y0;
    const double ab = schedule.alpha_bar_at(level);
    const double scale = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    ControlSequence out(y0.size());
    for (std::size_t t = 0; t < y0.size(); ++t) {
        Control u(y0[t].size());
        for (int j = 0; j < u.size(); ++j)
            u[j] = scale * y0[t][j] + noise * rng.normal();
        out[t] = u;
    }
    return out;
}

std::vector<ControlSequence> sample_candidates(const ControlSequence& y, int level,
                                               const DiffusionParams& params,
                                               const NoiseSchedule& schedule,
                                               const RngStream& rng) {
    if (level < 1 || level > schedule.levels)
        throw ContractViolation("sample_candidates: level out of range");
    if (y.empty()) throw ContractViolation("sample_candidates: empty sequence");
    const double ab = schedule.alpha_bar_at(level);
    const double inv_sqrt_ab = 1.0 / std::sqrt(ab);
    const double std_dev = params.sigma_scale * std::sqrt(1.0 / ab - 1.0);

    ControlSequence mean(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) mean[t] = inv_sqrt_ab * y[t];

    std::vector<ControlSequence> out(static_cast<std::size_t>(params.candidates));
    out[0] = mean;
    for (int k = 1; k < params.candidates; ++k) {
        RngStream stream = rng.at(static_cast<std::uint64_t>(level),
                                  static_cast<std::uint64_t>(k));
        ControlSequence cand(mean.size());
        for (std::size_t t = 0; t < mean.size(); ++t) {
            Control u(mean[t].size());
            for (int j = 0; j < u.size(); ++j)
                u[j] = mean[t][j] + std_dev * stream.normal();
            cand[t] = u;
        }
        out[static_cast<std::size_t>(k)] = std::move(cand);
    }
    return out;
}

namespace {

void evaluate_open_loop(const State& x0, const ControlSequence& cand,
                        const DiffusionParams& params, const DynamicsModel& model,
                        const Scenario& scenario, EvaluatedCandidate& e) {
    e.applied_controls.resize(cand.size());
    for (std::size_t t = 0; t < cand.size(); ++t)
        e.applied_controls[t] = clamp_control(cand[t], model);
    rollout_controls_into(e.states, x0, e.applied_controls, model);

    bool all_safe = true;
    double penalty = 0.0;
    for (const State& x : e.states) {
        double g = safety_margin(x, scenario);
        if (g > 0.0) {
            all_safe = false;
            penalty += g;
        }
    }
    e.safe = all_safe;
    e.cost = trajectory_cost(e.states, e.applied_controls, scenario);
    if (params.mode == PlanningMode::penalty) e.cost += params.penalty_weight * penalty;
    e.contributes = params.mode != PlanningMode::filtered || all_safe;
    e.contribution = cand;
}

} // namespace

std::vector<EvaluatedCandidate> evaluate_candidates(
    const State& x0, const std::vector<ControlSequence>& candidates,
    const DiffusionParams& params, const DynamicsModel& model,
    const Scenario& scenario, const BackupPolicy& policy) {
    std::vector<EvaluatedCandidate> evals(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t k) {
        EvaluatedCandidate& e = evals[k];
        if (params.mode == PlanningMode::shielded) {
            ShieldOutcome out =
                shielded_rollout(x0, candidates[k], policy, model, scenario);
            e.cost = trajectory_cost(out.states, out.controls, scenario);
            e.safe = true;  // every shielded state passed the safety check
            e.fallback_index = out.fallback_index;
            e.contribution = out.controls;  // the shielded sequence is averaged
            e.applied_controls = std::move(out.controls);
            e.states = std::move(out.states);
            e.contributes = true;
        } else {
            evaluate_open_loop(x0, candidates[k], params, model, scenario, e);
        }
    });
    return evals;
}

ReverseStepResult reverse_step(const ControlSequence& y, int level,
                               const std::vector<EvaluatedCandidate>& evals,
                               double temperature, const NoiseSchedule& schedule) {
    if (level < 1 || level > schedule.levels)
        throw ContractViolation("reverse_step: level out of range");
    const double ab_prev = schedule.alpha_bar_at(level - 1);
    const double scale_prev = std::sqrt(ab_prev);

    double min_cost = std::numeric_limits<double>::infinity();
    std::size_t argmin = evals.size();
    int contributing = 0;
    for (std::size_t k = 0; k < evals.size(); ++k) {
        if (!evals[k].contributes) continue;
        ++contributing;
        if (evals[k].cost < min_cost) {
            min_cost = evals[k].cost;
            argmin = k;
        }
    }

    ReverseStepResult res;
    if (contributing == 0) {
        // Nothing to average: rescale the current estimate to the next level.
        const double ratio = scale_prev / std::sqrt(schedule.alpha_bar_at(level));
        res.y_prev.resize(y.size());
        for (std::size_t t = 0; t < y.size(); ++t) res.y_prev[t] = ratio * y[t];
        res.stalled = true;
        return res;
    }

    if (temperature <= 1e-12) {
        const ControlSequence& best = evals[argmin].contribution;
        res.y_prev.resize(best.size());
        for (std::size_t t = 0; t < best.size(); ++t)
            res.y_prev[t] = scale_prev * best[t];
        res.weight_sum = 1.0;
        return res;
    }

    ControlSequence acc(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) acc[t] = Control(y[t].size());
    double weight_sum = 0.0;
    for (std::size_t k = 0; k < evals.size(); ++k) {
        if (!evals[k].contributes) continue;
        const double w = std::exp(-(evals[k].cost - min_cost) / temperature);
        weight_sum += w;
        const ControlSequence& c = evals[k].contribution;
        for (std::size_t t = 0; t < acc.size(); ++t)
            for (int j = 0; j < acc[t].size(); ++j) acc[t][j] += w * c[t][j];
    }
    res.y_prev.resize(acc.size());
    for (std::size_t t = 0; t < acc.size(); ++t)
        res.y_prev[t] = (scale_prev / weight_sum) * acc[t];
    res.weight_sum = weight_sum;
    return res;
}

DenoiseResult denoise(const State& x0, const DiffusionParams& params,
                      const NoiseSchedule& schedule, const DynamicsModel& model,
                      const Scenario& scenario, const BackupPolicy& policy,
                      const RngStream& rng, const std::optional<WarmStart>& warm) {
    params.validate();
    if (schedule.levels != params.levels)
        throw ContractViolation("denoise: schedule does not match params.levels");
    if (params.mode == PlanningMode::shielded && !in_safe_set(x0, scenario))
        throw InitialStateUnsafe("denoise: initial state outside the safe set");

    const int T = params.horizon;
    const int m = model.control_dim();

    int start_level = params.levels;
    ControlSequence y;
    if (warm) {
        if (static_cast<int>(warm->sequence.size()) != T)
            throw ContractViolation("denoise: warm-start length does not match horizon");
        start_level = params.effective_warm_level();
        RngStream s = rng.at(0, 1);
        y = forward_noise(warm->sequence, start_level, schedule, s);
    } else {
        RngStream s = rng.at(0, 0);
        y.resize(static_cast<std::size_t>(T));
        for (auto& u : y) {
            u = Control(m);
            for (int j = 0; j < m; ++j) u[j] = s.normal();
        }
    }

    DenoiseResult result;
    result.diag.start_level = start_level;
    std::optional<double> first_temperature;
    bool have_best = false;

    for (int i = start_level; i >= 1; --i) {
        auto candidates = sample_candidates(y, i, params, schedule, rng);
        auto evals = evaluate_candidates(x0, candidates, params, model, scenario, policy);

        LevelDiagnostics lvl;
        lvl.level = i;
        int contributing = 0;
        int fallbacks = 0;
        double sum = 0.0;
        double min_cost = std::numeric_limits<double>::infinity();
        for (const auto& e : evals) {
            if (e.fallback_index) ++fallbacks;
            if (!e.contributes) continue;
            ++contributing;
            sum += e.cost;
            min_cost = std::min(min_cost, e.cost);
        }
        const double K = static_cast<double>(evals.size());
        lvl.contributing_fraction = contributing / K;
        lvl.fallback_fraction = fallbacks / K;
        lvl.mean_cost = contributing > 0 ? sum / contributing : 0.0;
        lvl.min_cost = contributing > 0 ? min_cost : 0.0;

        double temperature;
        if (params.temperature) {
            temperature = *params.temperature;
        } else {
            // Re-estimated per level: spreads shrink by orders of magnitude as
            // denoising sharpens, so a single early estimate would leave the
            // late levels with nearly uniform weights.
            const double spread = contributing > 0 ? lvl.mean_cost - lvl.min_cost : 0.0;
            temperature = std::max(params.temperature_fraction * spread, 1e-9);
        }
        if (!first_temperature && contributing > 0) first_temperature = temperature;

        auto rev = reverse_step(y, i, evals, temperature, schedule);
        lvl.stalled = rev.stalled;
        if (rev.stalled) ++result.diag.stall_count;
        result.diag.levels.push_back(lvl);
        y = std::move(rev.y_prev);

        if (params.mode == PlanningMode::shielded) {
            for (auto& e : evals) {
                if (!have_best || e.cost < result.cost) {
                    have_best = true;
                    result.cost = e.cost;
                    result.fallback_index = e.fallback_index;
                    result.controls = std::move(e.applied_controls);
                    result.states = std::move(e.states);
                }
            }
        }
    }
    result.diag.temperature_used =
        first_temperature.value_or(params.temperature.value_or(0.0));

    if (params.mode == PlanningMode::shielded) {
        result.safe = true;
        return result;
    }
    // Baseline modes report the final denoised sequence's own rollout.
    result.controls.resize(y.size());
    for (std::size_t t = 0; t < y.size(); ++t)
        result.controls[t] = clamp_control(y[t], model);
    rollout_controls_into(result.states, x0, result.controls, model);
    result.cost = trajectory_cost(result.states, result.controls, scenario);
    result.safe = std::all_of(result.states.begin(), result.states.end(),
                              [&](const State& x) { return in_safe_set(x, scenario); });
    return result;
}

PlanResult mpd_plan(const Scenario& scenario, const DiffusionParams& params,
                    int exec_steps, int max_cycles, const RngStream& rng,
                    std::optional<int> recovery_budget_override) {
    params.validate();
    if (exec_steps < 1) throw ConfigError("mpd_plan: exec_steps must be >= 1");
    if (max_cycles < 0) throw ConfigError("mpd_plan: max_cycles must be >= 0");
    if (!scenario.model) throw ContractViolation("mpd_plan: scenario has no model");

    const DynamicsModel& model = *scenario.model;
    const BackupPolicy policy = make_backup_policy(scenario, recovery_budget_override);
    const NoiseSchedule schedule =
        make_noise_schedule(params.levels, params.beta_min, params.beta_max);
    const int exec = std::min(exec_steps, params.horizon);

    State x = scenario.x_start;
    if (!in_safe_set(x, scenario))
        throw InitialStateUnsafe("mpd_plan: start state outside the safe set");

    PlanResult plan;
    plan.executed_states.push_back(x);
    plan.executed_margins.push_back(safety_margin(x, scenario));
    if (goal_reached(x, scenario)) {
        plan.success = true;
        plan.total_cost = trajectory_cost(plan.executed_states, plan.executed_controls,
                                          scenario);
        return plan;
    }

    std::optional<WarmStart> warm;
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        const auto t0 = std::chrono::steady_clock::now();
        DenoiseResult res = denoise(x, params, schedule, model, scenario, policy,
                                    rng.at(static_cast<std::uint64_t>(cycle)), warm);
        const auto t1 = std::chrono::steady_clock::now();
        plan.cycle_wall_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        plan.cycles.push_back({cycle, res.cost, res.diag});
        plan.cycles_used = cycle + 1;

        for (int j = 0; j < exec; ++j) {
            const Control u = clamp_control(res.controls[static_cast<std::size_t>(j)],
                                            model);
            const bool fb = res.fallback_index && j >= *res.fallback_index;
            x = model.step(x, u);
            plan.executed_controls.push_back(u);
            plan.executed_states.push_back(x);
            plan.executed_margins.push_back(safety_margin(x, scenario));
            plan.executed_fallback.push_back(fb);
            if (goal_reached(x, scenario)) {
                plan.success = true;
                break;
            }
        }
        if (plan.success) break;

        // Warm start: shift out the executed prefix and extend the tail.
        ControlSequence next(res.controls.begin() + exec, res.controls.end());
        if (params.mode == PlanningMode::shielded) {
            State tail = res.states.back();
            for (int p = 0; p < exec; ++p) {
                const Control u = backup_control(tail, policy, scenario);
                next.push_back(u);
                tail = model.step(tail, u);
            }
        } else {
            for (int p = 0; p < exec; ++p) next.push_back(Control(model.control_dim()));
        }
        warm = WarmStart{std::move(next)};
    }

    plan.total_cost = trajectory_cost(plan.executed_states, plan.executed_controls,
                                      scenario);
    return plan;
}

} // namespace safempd
