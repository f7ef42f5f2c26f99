#pragma once

#include "safempd/core.hpp"
#include "safempd/systems.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace safempd {

struct CircleObstacle {
    double cx = 0.0, cy = 0.0, radius = 1.0;
};

struct BoxObstacle {
    double min_x = 0.0, min_y = 0.0, max_x = 1.0, max_y = 1.0;
};

struct Obstacle {
    enum class Kind { circle, box } kind = Kind::circle;
    CircleObstacle circle;
    BoxObstacle box;

    static Obstacle make_circle(double cx, double cy, double r) {
        Obstacle o;
        o.kind = Kind::circle;
        o.circle = {cx, cy, r};
        return o;
    }
    static Obstacle make_box(double min_x, double min_y, double max_x, double max_y) {
        Obstacle o;
        o.kind = Kind::box;
        o.box = {min_x, min_y, max_x, max_y};
        return o;
    }
};

struct WorldBounds {
    double min_x = 0.0, min_y = 0.0, max_x = 20.0, max_y = 20.0;
    bool margin = true;  // when false, the bounds only scope sampling and plots
};

struct Goal {
    double px = 0.0, py = 0.0;
    std::optional<double> heading;  // rad, tractor heading target when set
    double tolerance = 0.3;         // m
    double heading_tolerance = 0.2; // rad
};

/// Invariant-set thresholds. c_margin deepens the clearance requirement,
/// v_eps caps the speed, c_angle tightens the jackknife limit.
struct SafetySpec {
    double c_margin = 0.05;  // m
    double v_eps = 0.05;     // m/s
    double c_angle = 0.05;   // rad
};

struct CostSpec {
    double w_track = 1.0;
    double w_u = 0.1;
    double w_terminal = 10.0;
};

struct Scenario {
    std::string name;
    SystemKind kind = SystemKind::double_integrator;
    std::shared_ptr<const DynamicsModel> model;
    double primary_radius = 0.3;  // tractor disc (or the sole disc)
    double trailer_radius = 0.3;
    std::vector<Obstacle> obstacles;
    WorldBounds world;
    State x_start;
    Goal goal;
    SafetySpec safety;
    CostSpec cost;

    BodyPoseSet bodies(const State& x) const {
        return body_poses(x, kind, *model, primary_radius, trailer_radius);
    }
    /// Signed hitch angle th0 - th1, wrapped. Zero for the double integrator.
    double hitch_angle(const State& x) const {
        if (kind == SystemKind::double_integrator) return 0.0;
        return wrap_angle(x[2] - x[3]);
    }
    double jackknife_limit() const;
    double speed(const State& x) const {
        switch (kind) {
            case SystemKind::double_integrator:
                return std::sqrt(x[2] * x[2] + x[3] * x[3]);
            case SystemKind::kinematic_tt:
                return 0.0;  // velocity is an input, not a state
            case SystemKind::accel_tt:
                return std::abs(x[4]);
        }
        return 0.0;
    }
};

/// Signed distance from a point to an axis-aligned box surface
/// (negative inside).
double box_signed_distance(double px, double py, const BoxObstacle& box);

/// Safety margin g(x): max over obstacle, world-bound, speed-cap and
/// jackknife components. g(x) <= 0 iff x is instantaneously safe.
double safety_margin(const State& x, const Scenario& scenario);

inline bool in_safe_set(const State& x, const Scenario& scenario) {
    return safety_margin(x, scenario) <= 0.0;
}

/// Membership in the controlled-invariant set C. For the kinematic
/// tractor-trailer C coincides with the safe set (zero control freezes the
/// state); for the acceleration-controlled systems C additionally requires
/// clearance depth c_margin, speed at most v_eps, and a tightened hitch angle.
bool in_invariant_set(const State& x, const Scenario& scenario);

/// Quadratic tracking cost:
///   sum_t (w_track*|p_t - p_goal|^2 + w_u*|u_t|^2)*dt + w_terminal*|p_T - p_goal|^2
double trajectory_cost(const StateTrajectory& states, const ControlSequence& controls,
                       const Scenario& scenario);

bool goal_reached(const State& x, const Scenario& scenario);

} // namespace safempd
