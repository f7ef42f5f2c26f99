#include "safempd/shield.hpp"

#include <cmath>

namespace safempd {

Control backup_control(const State& x, const BackupPolicy& policy,
                       const Scenario& scenario) {
    if (!in_safe_set(x, scenario))
        throw ContractViolation("backup_control: state outside the safe set");
    const Control u = in_invariant_set(x, scenario) ? policy.pi_inv(x) : policy.pi_rec(x);
    return clamp_control(u, *scenario.model);
}

namespace {

int braking_budget(double v_max, double a_max, double dt) {
    return static_cast<int>(std::ceil(v_max / (a_max * dt))) + 5;
}

} // namespace

BackupPolicy make_backup_policy(const Scenario& scenario,
                                std::optional<int> recovery_budget_override) {
    BackupPolicy policy;
    const double dt = scenario.model->dt();

    switch (scenario.kind) {
        case SystemKind::kinematic_tt: {
            // zero velocity freezes the state, so any safe state holds itself
            auto stop = [](const State&) { return Control{0.0, 0.0}; };
            policy.pi_inv = stop;
            policy.pi_rec = stop;
            policy.recovery_budget = 1;
            break;
        }
        case SystemKind::double_integrator: {
            const auto& di = static_cast<const DoubleIntegrator2D&>(*scenario.model);
            const double a_max = di.a_max;
            // Reversing the velocity each step cancels the position update
            // term for term, so the invariance branch holds position up to
            // rounding.
            policy.pi_inv = [dt](const State& x) {
                const double k = 2.0 / dt;
                return Control{-k * x[2], -k * x[3]};
            };
            // Saturated brake opposite the velocity; below one step's worth of
            // deceleration, cancel the velocity exactly.
            policy.pi_rec = [dt, a_max](const State& x) {
                const double vx = x[2], vy = x[3];
                const double speed = std::sqrt(vx * vx + vy * vy);
                if (speed <= a_max * dt) {
                    if (speed == 0.0) return Control{0.0, 0.0};
                    return Control{-vx / dt, -vy / dt};
                }
                return Control{-a_max * vx / speed, -a_max * vy / speed};
            };
            policy.recovery_budget = braking_budget(di.v_max, a_max, dt);
            break;
        }
        case SystemKind::accel_tt: {
            const auto& tt = static_cast<const AccelTractorTrailer&>(*scenario.model);
            const double a_max = tt.a_max, omega_max = tt.omega_max;
            auto brake_and_recenter = [dt, a_max, omega_max](const State& x) {
                const double v = x[4], delta = x[5];
                double a;
                if (std::abs(v) <= a_max * dt) a = -v / dt;
                else a = v > 0.0 ? -a_max : a_max;
                double omega;
                if (std::abs(delta) <= omega_max * dt) omega = -delta / dt;
                else omega = delta > 0.0 ? -omega_max : omega_max;
                return Control{a, omega};
            };
            policy.pi_inv = brake_and_recenter;
            policy.pi_rec = brake_and_recenter;
            policy.recovery_budget = braking_budget(tt.p.v_max, a_max, dt);
            break;
        }
    }
    if (recovery_budget_override) {
        if (*recovery_budget_override < 1)
            throw ConfigError("recovery budget must be at least 1");
        policy.recovery_budget = *recovery_budget_override;
    }
    return policy;
}

bool is_valid(std::span<const State> trajectory, int recovery_budget,
              const Scenario& scenario) {
    if (static_cast<int>(trajectory.size()) != recovery_budget + 1)
        throw ContractViolation("is_valid: trajectory length must be recovery_budget+1");
    for (const State& x : trajectory)
        if (!in_safe_set(x, scenario)) return false;
    return in_invariant_set(trajectory.back(), scenario);
}

ShieldOutcome shielded_rollout(const State& x0, const ControlSequence& nominal,
                               const BackupPolicy& policy, const DynamicsModel& model,
                               const Scenario& scenario) {
    if (nominal.empty())
        throw ContractViolation("shielded_rollout: empty nominal sequence");
    if (!in_safe_set(x0, scenario))
        throw InitialStateUnsafe("shielded_rollout: initial state outside the safe set");

    const int T = static_cast<int>(nominal.size());
    const int TB = policy.recovery_budget;
    auto backup = [&](const State& x) { return backup_control(x, policy, scenario); };

    // Validity simulation with early exit: the backup policy's domain is S,
    // so the continuation stops at the first unsafe state instead of
    // stepping the policy outside its domain.
    auto continuation_valid = [&](const State& from) {
        if (!in_safe_set(from, scenario)) return false;
        State b = from;
        for (int j = 0; j < TB; ++j) {
            b = model.step(b, backup(b));
            detail::check_step_finite(b, j);
            if (!in_safe_set(b, scenario)) return false;
        }
        return in_invariant_set(b, scenario);
    };

    ShieldOutcome out;
    out.states.resize(static_cast<std::size_t>(T) + 1);
    out.controls.resize(static_cast<std::size_t>(T));
    out.states[0] = x0;

    State x = x0;
    for (int t = 0; t < T; ++t) {
        const Control u_nom = clamp_control(nominal[static_cast<std::size_t>(t)], model);
        const State x_hat = model.step(x, u_nom);
        detail::check_step_finite(x_hat, t);
        ++out.validity_checks;
        if (continuation_valid(x_hat)) {
            x = x_hat;
            out.states[static_cast<std::size_t>(t) + 1] = x_hat;
            out.controls[static_cast<std::size_t>(t)] = u_nom;
        } else {
            out.fallback_index = t;
            for (int tp = t; tp < T; ++tp) {
                const Control u_backup = backup(x);
                out.controls[static_cast<std::size_t>(tp)] = u_backup;
                x = model.step(x, u_backup);
                detail::check_step_finite(x, tp);
                out.states[static_cast<std::size_t>(tp) + 1] = x;
            }
            break;
        }
    }
    return out;
}

State sample_state(const Scenario& scenario, RngStream& rng, bool from_invariant,
                   int max_attempts) {
    const WorldBounds& w = scenario.world;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        State x(scenario.model->state_dim());
        x[0] = rng.uniform(w.min_x, w.max_x);
        x[1] = rng.uniform(w.min_y, w.max_y);
        switch (scenario.kind) {
            case SystemKind::double_integrator: {
                const auto& di = static_cast<const DoubleIntegrator2D&>(*scenario.model);
                const double v_cap = from_invariant ? scenario.safety.v_eps : di.v_max;
                x[2] = rng.uniform(-v_cap, v_cap);
                x[3] = rng.uniform(-v_cap, v_cap);
                break;
            }
            case SystemKind::kinematic_tt: {
                x[2] = rng.uniform(-kPi, kPi);
                x[3] = rng.uniform(-kPi, kPi);
                break;
            }
            case SystemKind::accel_tt: {
                const auto& tt = static_cast<const AccelTractorTrailer&>(*scenario.model);
                x[2] = rng.uniform(-kPi, kPi);
                x[3] = rng.uniform(-kPi, kPi);
                const double v_cap = from_invariant ? scenario.safety.v_eps : tt.p.v_max;
                x[4] = rng.uniform(-v_cap, v_cap);
                x[5] = rng.uniform(-tt.p.delta_max, tt.p.delta_max);
                break;
            }
        }
        if (from_invariant ? in_invariant_set(x, scenario) : in_safe_set(x, scenario))
            return x;
    }
    throw SamplingExhausted(std::string("sample_state: no state found in ") +
                            (from_invariant ? "C" : "S") + " within the attempt budget");
}

CertificationReport certify_backup(const Scenario& scenario, const BackupPolicy& policy,
                                   const DynamicsModel& model, int n_samples,
                                   int t_cert, RngStream rng) {
    if (n_samples < 1) throw ContractViolation("certify_backup: n_samples must be >= 1");
    CertificationReport report;
    report.n_samples = n_samples;
    report.t_cert = t_cert;
    report.recovery_budget = policy.recovery_budget;

    auto backup = [&](const State& x) { return backup_control(x, policy, scenario); };
    auto inv = [&](const State& x) {
        return clamp_control(policy.pi_inv(x), *scenario.model);
    };

    StateTrajectory traj;
    RngStream inv_rng = rng.at(1);
    for (int i = 0; i < n_samples; ++i) {
        const State x0 = sample_state(scenario, inv_rng, /*from_invariant=*/true);
        rollout_into(traj, x0, inv, t_cert, model);
        bool stays = true;
        for (const State& x : traj) {
            if (!in_invariant_set(x, scenario)) {
                stays = false;
                break;
            }
        }
        if (!stays) {
            ++report.invariance_failures;
            if (report.invariance_counterexamples.size() < 5)
                report.invariance_counterexamples.push_back(x0);
        }
    }

    RngStream rec_rng = rng.at(2);
    for (int i = 0; i < n_samples; ++i) {
        const State x0 = sample_state(scenario, rec_rng, /*from_invariant=*/false);
        bool ok = true;
        try {
            rollout_into(traj, x0, backup, policy.recovery_budget, model);
            ok = is_valid(traj, policy.recovery_budget, scenario);
        } catch (const ContractViolation&) {
            ok = false;  // backup rollout left S, so the policy domain was violated
        }
        if (!ok) {
            ++report.recovery_failures;
            if (report.recovery_counterexamples.size() < 5)
                report.recovery_counterexamples.push_back(x0);
        }
    }

    report.invariance_rate =
        1.0 - static_cast<double>(report.invariance_failures) / n_samples;
    report.recovery_rate =
        1.0 - static_cast<double>(report.recovery_failures) / n_samples;
    return report;
}

} // namespace safempd
