#pragma once

#include "safempd/core.hpp"
#include "safempd/environment.hpp"
#include "safempd/rng.hpp"

#include <functional>
#include <optional>
#include <span>

namespace safempd {

/// Composition of an invariance policy (defined on C) and a recovery policy
/// (defined on S), with a fixed recovery budget.
struct BackupPolicy {
    std::function<Control(const State&)> pi_inv;
    std::function<Control(const State&)> pi_rec;
    int recovery_budget = 1;  // T_B, steps
};

/// Select the invariance or recovery branch for a safe state. The result is
/// clamped to the control bounds. Throws if x is outside the safe set (the
/// backup policy's domain).
Control backup_control(const State& x, const BackupPolicy& policy,
                       const Scenario& scenario);

/// Hand-designed backup policy for the scenario's system:
///  - kinematic tractor-trailer: stop in place (zero control), T_B = 1;
///  - double integrator: recovery brakes at full acceleration opposite the
///    velocity, invariance reverses the velocity each step (which holds the
///    position up to rounding);
///  - acceleration-controlled tractor-trailer: recovery brakes and recenters
///    the steering, invariance cancels the residual speed in one step.
/// recovery_budget_override replaces the default
/// ceil(v_max / (a_max*dt)) + 5 budget for the acceleration-controlled
/// systems.
BackupPolicy make_backup_policy(const Scenario& scenario,
                                std::optional<int> recovery_budget_override = {});

/// Def.-style trajectory validity: every state safe and the terminal state in
/// the invariant set. Expects exactly recovery_budget+1 states; checks
/// short-circuit on the first violation.
bool is_valid(std::span<const State> trajectory, int recovery_budget,
              const Scenario& scenario);

struct ShieldOutcome {
    StateTrajectory states;      // length T+1
    ControlSequence controls;    // length T, the clamped controls applied
    std::optional<int> fallback_index;  // first step replaced by the backup policy
    int validity_checks = 0;
};

/// Per-step safety shield over a nominal control sequence. Each nominal step
/// is accepted only if a simulated backup continuation from its successor
/// state is valid; on the first failure the remainder of the horizon is
/// filled by the backup policy applied along the evolving state.
ShieldOutcome shielded_rollout(const State& x0, const ControlSequence& nominal,
                               const BackupPolicy& policy, const DynamicsModel& model,
                               const Scenario& scenario);

// ---------------------------------------------------------------------------
// Empirical certification of the backup policy / invariant set pair.
// ---------------------------------------------------------------------------

struct CertificationReport {
    int n_samples = 0;
    int t_cert = 0;
    int recovery_budget = 0;
    int invariance_failures = 0;
    int recovery_failures = 0;
    double invariance_rate = 0.0;
    double recovery_rate = 0.0;
    std::vector<State> invariance_counterexamples;  // at most 5 retained
    std::vector<State> recovery_counterexamples;
    bool certified() const {
        return invariance_rate == 1.0 && recovery_rate == 1.0;
    }
};

/// Sample states from C and from S and measure, by forward simulation,
/// (a) the fraction of C-states whose invariance-policy rollout stays in C
/// for t_cert steps and (b) the fraction of S-states whose backup rollout
/// stays safe throughout and lands in C at the recovery budget. Both rates
/// must be exactly 1.0 for a certified configuration.
CertificationReport certify_backup(const Scenario& scenario, const BackupPolicy& policy,
                                   const DynamicsModel& model, int n_samples,
                                   int t_cert, RngStream rng);

/// Rejection-sample a state from S (or from C when `from_invariant` is set)
/// within the world bounds. Throws SamplingExhausted after the attempt budget.
State sample_state(const Scenario& scenario, RngStream& rng, bool from_invariant,
                   int max_attempts = 10000);

} // namespace safempd
