#pragma once

#include "safempd/core.hpp"

#include <memory>
#include <string>

namespace safempd {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

enum class SystemKind { double_integrator, kinematic_tt, accel_tt };

std::string system_id(SystemKind kind);
SystemKind system_from_id(const std::string& id);

// ---------------------------------------------------------------------------
// Double integrator, state (px, py, vx, vy), control (ax, ay).
// Exact zero-order-hold discretization.
// ---------------------------------------------------------------------------

class DoubleIntegrator2D final : public DynamicsModel {
public:
    double a_max = 2.0;  // per-axis acceleration bound, m/s^2
    double v_max = 2.0;  // speed cap, enforced through the safety margin

    DoubleIntegrator2D(double dt, double a_max_, double v_max_)
        : a_max(a_max_), v_max(v_max_), dt_(dt),
          lo_({-a_max_, -a_max_}), hi_({a_max_, a_max_}) {
        if (dt <= 0.0 || a_max <= 0.0 || v_max <= 0.0)
            throw ConfigError("double_integrator: dt, a_max, v_max must be positive");
    }

    int state_dim() const override { return 4; }
    int control_dim() const override { return 2; }
    double dt() const override { return dt_; }
    const Control& control_lower() const override { return lo_; }
    const Control& control_upper() const override { return hi_; }

protected:
    State do_step(const State& x, const Control& u) const override {
        const double h = dt_;
        State y(4);
        y[0] = x[0] + x[2] * h + 0.5 * u[0] * h * h;
        y[1] = x[1] + x[3] * h + 0.5 * u[1] * h * h;
        y[2] = x[2] + u[0] * h;
        y[3] = x[3] + u[1] * h;
        return y;
    }

private:
    double dt_;
    Control lo_, hi_;
};

// ---------------------------------------------------------------------------
// Single-trailer kinematics, on-axle hitch:
//   xdot = v cos(th0), ydot = v sin(th0),
//   th0dot = (v/L) tan(delta), th1dot = (v/d) sin(th0 - th1).
// Integrated with RK4 over dt; headings wrapped to (-pi, pi].
// ---------------------------------------------------------------------------

struct TractorTrailerParams {
    double wheelbase = 2.0;     // L, m
    double hitch_length = 2.5;  // d, hitch to trailer axle, m
    double v_max = 1.5;         // m/s
    double delta_max = 0.6;     // rad
    double theta_jk = 1.2;      // jackknife limit on |th0 - th1|, rad
};

/// State (px, py, th0, th1), control (v, delta).
class KinematicTractorTrailer final : public DynamicsModel {
public:
    TractorTrailerParams p;

    KinematicTractorTrailer(double dt, const TractorTrailerParams& params)
        : p(params), dt_(dt),
          lo_({-params.v_max, -params.delta_max}),
          hi_({params.v_max, params.delta_max}) {
        validate(dt, params);
    }

    int state_dim() const override { return 4; }
    int control_dim() const override { return 2; }
    double dt() const override { return dt_; }
    const Control& control_lower() const override { return lo_; }
    const Control& control_upper() const override { return hi_; }

    static void validate(double dt, const TractorTrailerParams& params) {
        if (dt <= 0.0) throw ConfigError("tractor_trailer: dt must be positive");
        if (params.wheelbase <= 0.0 || params.hitch_length <= 0.0)
            throw ConfigError("tractor_trailer: wheelbase and hitch_length must be positive");
        if (params.v_max <= 0.0 || params.delta_max <= 0.0 || params.theta_jk <= 0.0)
            throw ConfigError("tractor_trailer: v_max, delta_max, theta_jk must be positive");
    }

protected:
    State do_step(const State& x, const Control& u) const override;

private:
    double dt_;
    Control lo_, hi_;
};

/// State (px, py, th0, th1, v, delta), control (a, omega).
/// v and delta are clamped to their bounds after each step.
class AccelTractorTrailer final : public DynamicsModel {
public:
    TractorTrailerParams p;
    double a_max = 1.0;      // m/s^2
    double omega_max = 1.0;  // steering rate bound, rad/s

    AccelTractorTrailer(double dt, const TractorTrailerParams& params,
                        double a_max_, double omega_max_)
        : p(params), a_max(a_max_), omega_max(omega_max_), dt_(dt),
          lo_({-a_max_, -omega_max_}), hi_({a_max_, omega_max_}) {
        KinematicTractorTrailer::validate(dt, params);
        if (a_max <= 0.0 || omega_max <= 0.0)
            throw ConfigError("accel_tt: a_max and omega_max must be positive");
    }

    int state_dim() const override { return 6; }
    int control_dim() const override { return 2; }
    double dt() const override { return dt_; }
    const Control& control_lower() const override { return lo_; }
    const Control& control_upper() const override { return hi_; }

protected:
    State do_step(const State& x, const Control& u) const override;

private:
    double dt_;
    Control lo_, hi_;
};

// ---------------------------------------------------------------------------
// Collision geometry: the articulated body as covering discs.
// ---------------------------------------------------------------------------

struct BodyPose {
    double cx = 0.0, cy = 0.0;
    double radius = 0.0;
};

struct BodyPoseSet {
    BodyPose poses[2];
    int count = 0;
};

/// Covering discs for a state. One disc for the double integrator; tractor
/// and trailer discs for the articulated systems, the trailer centered at
/// p - d*(cos th1, sin th1).
BodyPoseSet body_poses(const State& x, SystemKind kind, const DynamicsModel& model,
                       double primary_radius, double trailer_radius);

} // namespace safempd
