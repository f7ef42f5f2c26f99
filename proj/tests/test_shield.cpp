#include "safempd/shield.hpp"

#include "safempd/rng.hpp"
#include "support/oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <memory>

using namespace safempd;

namespace {

Scenario di_scenario(double v_max = 2.0, double dt = 0.1) {
    Scenario s;
    s.name = "di";
    s.kind = SystemKind::double_integrator;
    s.model = std::make_shared<DoubleIntegrator2D>(dt, 2.0, v_max);
    s.primary_radius = 0.0;
    s.world = {-50.0, -50.0, 50.0, 50.0, false};
    s.x_start = State{0.0, 0.0, 0.0, 0.0};
    s.goal.px = 5.0;
    return s;
}

Scenario kin_scenario() {
    Scenario s;
    s.name = "kin";
    s.kind = SystemKind::kinematic_tt;
    s.model = std::make_shared<KinematicTractorTrailer>(0.1, TractorTrailerParams{});
    s.primary_radius = 0.3;
    s.trailer_radius = 0.3;
    s.world = {-8.0, -8.0, 8.0, 8.0, false};
    s.x_start = State{0.0, 0.0, 0.0, 0.0};
    s.goal.px = 5.0;
    return s;
}

Scenario accel_scenario() {
    Scenario s;
    s.name = "acc";
    s.kind = SystemKind::accel_tt;
    s.model = std::make_shared<AccelTractorTrailer>(0.1, TractorTrailerParams{}, 1.0, 1.0);
    s.primary_radius = 0.3;
    s.trailer_radius = 0.3;
    s.world = {-8.0, -8.0, 8.0, 8.0, false};
    s.x_start = State{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
    s.goal.px = 5.0;
    return s;
}

void check_outcomes_equal(const ShieldOutcome& a, const ShieldOutcome& b) {
    REQUIRE(a.states.size() == b.states.size());
    REQUIRE(a.controls.size() == b.controls.size());
    for (std::size_t i = 0; i < a.states.size(); ++i)
        for (int j = 0; j < a.states[i].size(); ++j)
            CHECK(a.states[i][j] == b.states[i][j]);
    for (std::size_t i = 0; i < a.controls.size(); ++i)
        for (int j = 0; j < a.controls[i].size(); ++j)
            CHECK(a.controls[i][j] == b.controls[i][j]);
    CHECK(a.fallback_index == b.fallback_index);
    CHECK(a.validity_checks == b.validity_checks);
}

ControlSequence random_nominal(RngStream& rng, int T, double scale) {
    ControlSequence seq;
    for (int t = 0; t < T; ++t)
        seq.push_back(Control{scale * rng.normal(), scale * rng.normal()});
    return seq;
}

} // namespace

TEST_CASE("backup control picks the right branch and clamps") {
    SUBCASE("kinematic trailer always stops in place") {
        Scenario s = kin_scenario();
        BackupPolicy p = make_backup_policy(s);
        CHECK(p.recovery_budget == 1);
        Control u = backup_control(State{1.0, 2.0, 0.5, 0.2}, p, s);
        CHECK(u[0] == 0.0);
        CHECK(u[1] == 0.0);
    }
    SUBCASE("fast acceleration trailer brakes hard and recenters") {
        Scenario s = accel_scenario();
        BackupPolicy p = make_backup_policy(s);
        Control u = backup_control(State{0.0, 0.0, 0.0, 0.0, 1.2, 0.3}, p, s);
        CHECK(u[0] == -1.0);  // saturated brake
        CHECK(u[1] == -1.0);  // steering heads back to zero at rate omega_max
    }
    SUBCASE("slow double integrator holds position via velocity reversal") {
        Scenario s = di_scenario();
        BackupPolicy p = make_backup_policy(s);
        State x{0.0, 0.0, 0.02, -0.01};
        Control u = backup_control(x, p, s);
        CHECK(u[0] == doctest::Approx(-0.4).epsilon(1e-14));
        CHECK(u[1] == doctest::Approx(0.2).epsilon(1e-14));
        State y = s.model->step(x, u);
        CHECK(std::abs(y[0] - x[0]) <= 1e-15);  // position held, up to rounding
        CHECK(std::abs(y[1] - x[1]) <= 1e-15);
        CHECK(y[2] == doctest::Approx(-x[2]).epsilon(1e-14));
    }
    SUBCASE("outside the safe set the policy has no domain") {
        Scenario s = di_scenario();
        s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 1.0));
        BackupPolicy p = make_backup_policy(s);
        CHECK_THROWS_AS(backup_control(State{0.0, 0.0, 0.0, 0.0}, p, s),
                        ContractViolation);
    }
}

TEST_CASE("trajectory validity checks every state plus the terminal set") {
    Scenario s = kin_scenario();
    s.obstacles.push_back(Obstacle::make_circle(5.0, 0.0, 1.0));
    State in_c{0.0, 0.0, 0.0, 0.0};
    State colliding{5.0, 0.0, 0.0, 0.0};

    StateTrajectory constant(4, in_c);
    CHECK(is_valid(constant, 3, s));

    StateTrajectory dips{in_c, colliding, in_c, in_c};
    CHECK_FALSE(is_valid(dips, 3, s));

    // acceleration system: safe throughout but still moving at the end
    Scenario a = accel_scenario();
    State moving{0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
    StateTrajectory tail{a.x_start, a.x_start, a.x_start, moving};
    CHECK_FALSE(is_valid(tail, 3, a));

    CHECK_THROWS_AS(is_valid(constant, 5, s), ContractViolation);
}

TEST_CASE("shielded rollout leaves a benign nominal plan untouched") {
    Scenario s = di_scenario();
    BackupPolicy p = make_backup_policy(s);
    ControlSequence zeros(10, Control{0.0, 0.0});
    ShieldOutcome out = shielded_rollout(s.x_start, zeros, p, *s.model, s);
    CHECK_FALSE(out.fallback_index.has_value());
    CHECK(out.validity_checks == 10);
    for (const Control& u : out.controls) {
        CHECK(u[0] == 0.0);
        CHECK(u[1] == 0.0);
    }
    for (const State& x : out.states)
        for (int j = 0; j < 4; ++j) CHECK(x[j] == s.x_start[j]);
}

TEST_CASE("an immediately fatal nominal step falls back from the start") {
    Scenario s = di_scenario(2.0, 0.5);
    s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 1.0));
    s.x_start = State{1.05, 0.0, 0.0, 0.0};
    REQUIRE(in_invariant_set(s.x_start, s));
    BackupPolicy p = make_backup_policy(s);
    ControlSequence ram(6, Control{-2.0, 0.0});
    ShieldOutcome out = shielded_rollout(s.x_start, ram, p, *s.model, s);
    REQUIRE(out.fallback_index.has_value());
    CHECK(*out.fallback_index == 0);
    for (const Control& u : out.controls) {
        CHECK(u[0] == 0.0);
        CHECK(u[1] == 0.0);
    }
    for (const State& x : out.states) CHECK(x[0] == s.x_start[0]);
}

TEST_CASE("full throttle toward a wall stops short of it") {
    Scenario s = di_scenario(5.0);
    s.obstacles.push_back(Obstacle::make_box(10.0, -100.0, 200.0, 100.0));
    BackupPolicy p = make_backup_policy(s);
    ControlSequence ram(30, Control{2.0, 0.0});
    ShieldOutcome out = shielded_rollout(s.x_start, ram, p, *s.model, s);

    REQUIRE(out.fallback_index.has_value());
    for (const State& x : out.states) {
        CHECK(x[0] < 10.0);
        CHECK(in_safe_set(x, s));
    }
    ShieldOutcome oracle = oracles::brute_force_shield(s.x_start, ram, p, *s.model, s);
    check_outcomes_equal(out, oracle);
}

TEST_CASE("the outcome's states are exactly the rollout of its controls") {
    Scenario s = di_scenario(5.0);
    s.obstacles.push_back(Obstacle::make_box(10.0, -100.0, 200.0, 100.0));
    BackupPolicy p = make_backup_policy(s);
    RngStream rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        ControlSequence nominal = random_nominal(rng, 20, 2.0);
        ShieldOutcome out = shielded_rollout(s.x_start, nominal, p, *s.model, s);
        StateTrajectory replay = rollout_controls(s.x_start, out.controls, *s.model);
        REQUIRE(replay.size() == out.states.size());
        for (std::size_t i = 0; i < replay.size(); ++i)
            for (int j = 0; j < 4; ++j) CHECK(replay[i][j] == out.states[i][j]);
    }
}

TEST_CASE("re-shielding an accepted plan changes nothing") {
    Scenario s = di_scenario();
    s.obstacles.push_back(Obstacle::make_circle(8.0, 0.0, 1.0));
    BackupPolicy p = make_backup_policy(s);
    ControlSequence gentle(10, Control{0.3, 0.1});
    ShieldOutcome first = shielded_rollout(s.x_start, gentle, p, *s.model, s);
    REQUIRE_FALSE(first.fallback_index.has_value());
    ShieldOutcome second = shielded_rollout(s.x_start, first.controls, p, *s.model, s);
    check_outcomes_equal(first, second);
}

TEST_CASE("dynamics evaluations per step are the backup budget plus one") {
    Scenario s = di_scenario();
    BackupPolicy p = make_backup_policy(s);
    REQUIRE(p.recovery_budget == 15);  // ceil(v_max/(a_max*dt)) + 5

    SUBCASE("all steps accepted") {
        ControlSequence zeros(7, Control{0.0, 0.0});
        const long long before = dynamics_eval_counter();
        ShieldOutcome out = shielded_rollout(s.x_start, zeros, p, *s.model, s);
        const long long used = dynamics_eval_counter() - before;
        CHECK(out.validity_checks == 7);
        CHECK(used == 7 * (p.recovery_budget + 1));
    }
    SUBCASE("fallback pays a partial rejected check plus the backup fill") {
        Scenario w = di_scenario(5.0);
        w.obstacles.push_back(Obstacle::make_box(10.0, -100.0, 200.0, 100.0));
        BackupPolicy pw = make_backup_policy(w);
        ControlSequence ram(30, Control{2.0, 0.0});
        const long long before = dynamics_eval_counter();
        ShieldOutcome out = shielded_rollout(w.x_start, ram, pw, *w.model, w);
        const long long used = dynamics_eval_counter() - before;
        REQUIRE(out.fallback_index.has_value());
        const long long k = *out.fallback_index;
        CHECK(out.validity_checks == k + 1);
        // the rejected check stops simulating at its first unsafe state
        CHECK(used >= k * (pw.recovery_budget + 1) + 1 + (30 - k));
        CHECK(used <= (k + 1) * (pw.recovery_budget + 1) + (30 - k));
    }
}

TEST_CASE("shielded trajectories stay safe and end recoverable") {
    Scenario s = di_scenario();
    s.obstacles.push_back(Obstacle::make_circle(3.0, 0.0, 1.0));
    s.world = {-6.0, -6.0, 6.0, 6.0, false};
    BackupPolicy p = make_backup_policy(s);
    RngStream rng(123);
    RngStream sampler = rng.at(0);
    for (int trial = 0; trial < 100; ++trial) {
        State x0 = sample_state(s, sampler, /*from_invariant=*/true);
        ControlSequence nominal = random_nominal(rng, 25, 4.0);
        ShieldOutcome out = shielded_rollout(x0, nominal, p, *s.model, s);
        for (const State& x : out.states) REQUIRE(in_safe_set(x, s));

        // continuing with the backup policy reaches C and stays safe
        State x = out.states.back();
        bool reached = in_invariant_set(x, s);
        for (int t = 0; t < p.recovery_budget; ++t) {
            x = s.model->step(x, backup_control(x, p, s));
            REQUIRE(in_safe_set(x, s));
            reached = reached || in_invariant_set(x, s);
        }
        REQUIRE(reached);
        REQUIRE(in_invariant_set(x, s));
    }
}

TEST_CASE("fallback happens exactly where the oracle says it must") {
    RngStream rng(2024);
    SUBCASE("double integrator near a disc") {
        Scenario s = di_scenario();
        s.obstacles.push_back(Obstacle::make_circle(2.0, 0.5, 1.0));
        s.world = {-5.0, -5.0, 5.0, 5.0, false};
        BackupPolicy p = make_backup_policy(s);
        RngStream sampler = rng.at(1);
        for (int trial = 0; trial < 50; ++trial) {
            State x0 = sample_state(s, sampler, /*from_invariant=*/true);
            ControlSequence nominal = random_nominal(rng, 12, 3.0);
            ShieldOutcome fast = shielded_rollout(x0, nominal, p, *s.model, s);
            ShieldOutcome slow = oracles::brute_force_shield(x0, nominal, p, *s.model, s);
            check_outcomes_equal(fast, slow);
        }
    }
    SUBCASE("kinematic trailer near a disc") {
        Scenario s = kin_scenario();
        s.obstacles.push_back(Obstacle::make_circle(2.0, 0.5, 1.0));
        BackupPolicy p = make_backup_policy(s);
        RngStream sampler = rng.at(2);
        for (int trial = 0; trial < 30; ++trial) {
            State x0 = sample_state(s, sampler, /*from_invariant=*/true);
            ControlSequence nominal = random_nominal(rng, 12, 1.0);
            ShieldOutcome fast = shielded_rollout(x0, nominal, p, *s.model, s);
            ShieldOutcome slow = oracles::brute_force_shield(x0, nominal, p, *s.model, s);
            check_outcomes_equal(fast, slow);
        }
    }
    SUBCASE("acceleration trailer in the open") {
        Scenario s = accel_scenario();
        BackupPolicy p = make_backup_policy(s);
        RngStream sampler = rng.at(3);
        for (int trial = 0; trial < 20; ++trial) {
            State x0 = sample_state(s, sampler, /*from_invariant=*/true);
            ControlSequence nominal = random_nominal(rng, 10, 2.0);
            ShieldOutcome fast = shielded_rollout(x0, nominal, p, *s.model, s);
            ShieldOutcome slow = oracles::brute_force_shield(x0, nominal, p, *s.model, s);
            check_outcomes_equal(fast, slow);
        }
    }
}

TEST_CASE("shielding refuses an unsafe start state") {
    Scenario s = di_scenario();
    s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 1.0));
    BackupPolicy p = make_backup_policy(s);
    ControlSequence zeros(5, Control{0.0, 0.0});
    CHECK_THROWS_AS(shielded_rollout(State{0.0, 0.0, 0.0, 0.0}, zeros, p, *s.model, s),
                    InitialStateUnsafe);
    CHECK_THROWS_AS(shielded_rollout(s.x_start, ControlSequence{}, p, *s.model, s),
                    ContractViolation);
}

TEST_CASE("certification passes for the stop-in-place trailer policy") {
    Scenario s = kin_scenario();
    s.obstacles.push_back(Obstacle::make_circle(3.0, 1.0, 1.0));
    s.obstacles.push_back(Obstacle::make_box(-4.0, -4.0, -2.0, -2.0));
    BackupPolicy p = make_backup_policy(s);
    CertificationReport rep = certify_backup(s, p, *s.model, 2000, 30, RngStream(7));
    CHECK(rep.invariance_rate == 1.0);
    CHECK(rep.recovery_rate == 1.0);
    CHECK(rep.certified());
    CHECK(rep.invariance_counterexamples.empty());
}

TEST_CASE("oversized v_eps lets the clamped hold policy drift out of C") {
    Scenario s = di_scenario();
    s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 1.0));
    s.world = {-4.0, -4.0, 4.0, 4.0, false};
    s.safety.v_eps = 0.5;  // reversal then needs |u| up to 10 > a_max
    BackupPolicy p = make_backup_policy(s);

    // line search along the obstacle normal: innermost C state moving inward
    std::optional<State> witness;
    for (double px = 1.0 + s.safety.c_margin; px < 2.0; px += 1e-3) {
        State x{px, 0.0, -s.safety.v_eps, 0.0};
        if (!in_invariant_set(x, s)) continue;
        // clamped reversal rollout; does it stay in C?
        State y = x;
        bool stays = true;
        for (int t = 0; t < 20 && stays; ++t) {
            y = s.model->step(y, clamp_control(p.pi_inv(y), *s.model));
            stays = in_invariant_set(y, s);
        }
        if (!stays) {
            witness = x;
            break;
        }
    }
    REQUIRE(witness.has_value());

    CertificationReport rep = certify_backup(s, p, *s.model, 4000, 20, RngStream(11));
    MESSAGE("invariance rate with oversized v_eps: ", rep.invariance_rate);
    MESSAGE("recovery rate with oversized v_eps: ", rep.recovery_rate);

    // with the default v_eps the reversal is exact and certification holds
    s.safety.v_eps = 0.05;
    BackupPolicy tight = make_backup_policy(s);
    CertificationReport ok = certify_backup(s, tight, *s.model, 2000, 20, RngStream(11));
    CHECK(ok.invariance_rate == 1.0);
}

TEST_CASE("braking budget covers the analytic stopping time in the open") {
    Scenario s = di_scenario();
    BackupPolicy p = make_backup_policy(s);
    const auto& di = static_cast<const DoubleIntegrator2D&>(*s.model);
    const int analytic =
        static_cast<int>(std::ceil(di.v_max / (di.a_max * s.model->dt())));
    CHECK(p.recovery_budget >= analytic);

    // worst case: top speed; count simulated steps until C is reached
    State x{0.0, 0.0, di.v_max, 0.0};
    int steps = 0;
    while (!in_invariant_set(x, s)) {
        x = s.model->step(x, backup_control(x, p, s));
        ++steps;
        REQUIRE(steps <= p.recovery_budget);
    }
    CHECK(steps == analytic);

    CertificationReport rep = certify_backup(s, p, *s.model, 2000, 30, RngStream(3));
    CHECK(rep.certified());
}

TEST_CASE("acceleration trailer certifies in the open with relaxed gates") {
    Scenario s = accel_scenario();
    TractorTrailerParams params;
    params.theta_jk = kPi;
    s.model = std::make_shared<AccelTractorTrailer>(0.1, params, 1.0, 1.0);
    s.safety.c_margin = 0.0;
    s.safety.c_angle = 0.0;
    s.safety.v_eps = 0.01;
    BackupPolicy p = make_backup_policy(s);
    CHECK(p.recovery_budget == 20);
    CertificationReport rep = certify_backup(s, p, *s.model, 1000, 40, RngStream(5));
    CHECK(rep.invariance_rate == 1.0);
    CHECK(rep.recovery_rate == 1.0);
}

TEST_CASE("sampling gives up when no safe state exists") {
    Scenario s = di_scenario();
    s.world = {-1.0, -1.0, 1.0, 1.0, false};
    s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 10.0));
    BackupPolicy p = make_backup_policy(s);
    CHECK_THROWS_AS(certify_backup(s, p, *s.model, 10, 5, RngStream(1)),
                    SamplingExhausted);
    RngStream rng(2);
    CHECK_THROWS_AS(sample_state(s, rng, false, 100), SamplingExhausted);
}
