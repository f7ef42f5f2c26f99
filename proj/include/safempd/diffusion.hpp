#pragma once

#include "safempd/core.hpp"
#include "safempd/environment.hpp"
#include "safempd/rng.hpp"
#include "safempd/shield.hpp"

#include <optional>
#include <string>
#include <vector>

namespace safempd {

// ---------------------------------------------------------------------------
// Noise schedule
// ---------------------------------------------------------------------------

struct NoiseSchedule {
    int levels = 0;                  // N
    std::vector<double> beta;        // per-step variances, length N
    std::vector<double> alpha_bar;   // cumulative products of (1 - beta), length N

    /// alpha_bar at level i in [0, N]; level 0 is defined as 1.
    double alpha_bar_at(int i) const {
        return i == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(i) - 1];
    }
};

/// Linear beta schedule from beta_min to beta_max over N levels.
NoiseSchedule make_noise_schedule(int levels, double beta_min, double beta_max);

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

enum class PlanningMode { shielded, vanilla, filtered, penalty };

std::string mode_id(PlanningMode mode);
PlanningMode mode_from_id(const std::string& id);

struct DiffusionParams {
    int horizon = 50;      // T, control steps per plan
    int candidates = 128;  // K per denoising level
    int levels = 30;       // N denoising levels
    /// Softmax temperature. When unset it is re-estimated at every level as
    /// temperature_fraction times that level's cost spread (mean minus min of
    /// contributing candidates), so selection pressure tracks the shrinking
    /// spread as denoising sharpens.
    std::optional<double> temperature;
    double temperature_fraction = 0.1;
    double sigma_scale = 1.0;
    PlanningMode mode = PlanningMode::shielded;
    double penalty_weight = 100.0;  // penalty mode only
    double beta_min = 1e-4;
    double beta_max = 0.05;
    /// Warm-start re-noise level; defaults to ceil(levels / 2).
    std::optional<int> warm_level;

    int effective_warm_level() const {
        return warm_level ? *warm_level : (levels + 1) / 2;
    }
    void validate() const;
};

// ---------------------------------------------------------------------------
// Forward / reverse process
// ---------------------------------------------------------------------------

/// Noise a clean sequence to level i: sqrt(ab_i)*y + sqrt(1-ab_i)*eps.
ControlSequence forward_noise(const ControlSequence& y0, int level,
                              const NoiseSchedule& schedule, RngStream& rng);

/// Draw K candidate sequences around the rescaled estimate y/sqrt(ab_i) with
/// per-entry std sigma_scale*sqrt(1/ab_i - 1). Candidate 0 is the unperturbed
/// mean; candidate k >= 1 uses the rng stream at path (level, k).
std::vector<ControlSequence> sample_candidates(const ControlSequence& y, int level,
                                               const DiffusionParams& params,
                                               const NoiseSchedule& schedule,
                                               const RngStream& rng);

struct EvaluatedCandidate {
    double cost = 0.0;
    bool contributes = false;  // enters the weighted average
    bool safe = false;         // every trajectory state in S (recorded per mode)
    std::optional<int> fallback_index;   // shielded mode only
    StateTrajectory states;              // evaluated trajectory
    ControlSequence applied_controls;    // clamped controls generating `states`
    ControlSequence contribution;        // sequence entering the weighted average
};

/// Evaluate candidates under the configured mode:
///  - shielded: every candidate passes through the shielded rollout and its
///    shielded controls enter the average; all candidates contribute;
///  - vanilla: open-loop rollout; safety recorded, not enforced;
///  - filtered: as vanilla, but unsafe candidates are excluded;
///  - penalty: as vanilla with penalty_weight * sum_t max(0, g(x_t)) added.
/// Evaluation is parallel across candidates; results are deterministic and
/// independent of the worker count.
std::vector<EvaluatedCandidate> evaluate_candidates(
    const State& x0, const std::vector<ControlSequence>& candidates,
    const DiffusionParams& params, const DynamicsModel& model,
    const Scenario& scenario, const BackupPolicy& policy);

struct ReverseStepResult {
    ControlSequence y_prev;
    bool stalled = false;    // no contributing candidate: pure rescale applied
    double weight_sum = 0.0; // pre-normalization, for diagnostics
};

/// Softmax-weighted average of contributing candidates (weights
/// exp(-(J - J_min)/lambda)), rescaled by sqrt(ab_{i-1}). Temperatures at or
/// below 1e-12 select the argmin candidate (lowest index on ties).
ReverseStepResult reverse_step(const ControlSequence& y, int level,
                               const std::vector<EvaluatedCandidate>& evals,
                               double temperature, const NoiseSchedule& schedule);

// ---------------------------------------------------------------------------
// Denoising and the receding-horizon loop
// ---------------------------------------------------------------------------

struct LevelDiagnostics {
    int level = 0;
    double mean_cost = 0.0;  // over contributing candidates
    double min_cost = 0.0;
    double contributing_fraction = 0.0;
    double fallback_fraction = 0.0;  // shielded mode: candidates that fell back
    bool stalled = false;
};

struct DenoiseDiagnostics {
    std::vector<LevelDiagnostics> levels;
    int stall_count = 0;
    double temperature_used = 0.0;  // value applied at the first contributing level
    int start_level = 0;
};

struct DenoiseResult {
    ControlSequence controls;  // shielded: best evaluated candidate; else Y_0
    StateTrajectory states;    // trajectory of `controls` from x0
    double cost = 0.0;
    bool safe = false;
    std::optional<int> fallback_index;
    DenoiseDiagnostics diag;
};

struct WarmStart {
    ControlSequence sequence;  // re-noised internally to the warm level
};

/// Run the reverse process from level N (or the warm level) down to 1 and
/// return the best evaluated shielded candidate (shielded mode) or the final
/// denoised sequence's rollout (baseline modes).
DenoiseResult denoise(const State& x0, const DiffusionParams& params,
                      const NoiseSchedule& schedule, const DynamicsModel& model,
                      const Scenario& scenario, const BackupPolicy& policy,
                      const RngStream& rng, const std::optional<WarmStart>& warm = {});

struct CycleDiagnostics {
    int cycle = 0;
    double best_cost = 0.0;
    DenoiseDiagnostics denoise;
};

struct PlanResult {
    bool success = false;
    int cycles_used = 0;
    StateTrajectory executed_states;     // starts at the scenario start state
    ControlSequence executed_controls;
    std::vector<double> executed_margins;  // g at each executed state
    std::vector<bool> executed_fallback;   // per executed control
    std::vector<CycleDiagnostics> cycles;
    std::vector<double> cycle_wall_ms;  // timing only; not part of determinism
    double total_cost = 0.0;
};

/// Receding-horizon planning: denoise, execute the first exec_steps controls
/// through the model, then warm-start the next cycle from the shifted
/// sequence (tail padded by the backup policy in shielded mode, zeros
/// otherwise). Terminates on goal or when max_cycles is exhausted; budget
/// exhaustion is reported as a failed result, not an error.
PlanResult mpd_plan(const Scenario& scenario, const DiffusionParams& params,
                    int exec_steps, int max_cycles, const RngStream& rng,
                    std::optional<int> recovery_budget_override = {});

} // namespace safempd
