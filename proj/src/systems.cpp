#include "safempd/systems.hpp"

namespace safempd {

std::string system_id(SystemKind kind) {
    switch (kind) {
        case SystemKind::double_integrator: return "double_integrator";
        case SystemKind::kinematic_tt: return "kinematic_tt";
        case SystemKind::accel_tt: return "accel_tt";
    }
    throw ConfigError("system_id: unknown system kind");
}

SystemKind system_from_id(const std::string& id) {
    if (id == "double_integrator") return SystemKind::double_integrator;
    if (id == "kinematic_tt") return SystemKind::kinematic_tt;
    if (id == "accel_tt") return SystemKind::accel_tt;
    throw ConfigError("unknown system id \"" + id + "\"");
}

namespace {

struct KinDeriv {
    double dx, dy, dth0, dth1;
};

inline KinDeriv kin_deriv(double th0, double th1, double v, double tan_delta,
                          double L, double d) {
    KinDeriv k;
    k.dx = v * std::cos(th0);
    k.dy = v * std::sin(th0);
    k.dth0 = v * tan_delta / L;
    k.dth1 = v * std::sin(th0 - th1) / d;
    return k;
}

} // namespace

State KinematicTractorTrailer::do_step(const State& x, const Control& u) const {
    const double v = u[0];
    if (v == 0.0) return x;  // zero velocity freezes the kinematics exactly
    const double tan_delta = std::tan(u[1]);
    const double L = p.wheelbase, d = p.hitch_length, h = dt_;

    const KinDeriv k1 = kin_deriv(x[2], x[3], v, tan_delta, L, d);
    const KinDeriv k2 = kin_deriv(x[2] + 0.5 * h * k1.dth0, x[3] + 0.5 * h * k1.dth1,
                                  v, tan_delta, L, d);
    const KinDeriv k3 = kin_deriv(x[2] + 0.5 * h * k2.dth0, x[3] + 0.5 * h * k2.dth1,
                                  v, tan_delta, L, d);
    const KinDeriv k4 = kin_deriv(x[2] + h * k3.dth0, x[3] + h * k3.dth1,
                                  v, tan_delta, L, d);

    State y(4);
    const double w = h / 6.0;
    y[0] = x[0] + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    y[1] = x[1] + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    y[2] = wrap_angle(x[2] + w * (k1.dth0 + 2.0 * k2.dth0 + 2.0 * k3.dth0 + k4.dth0));
    y[3] = wrap_angle(x[3] + w * (k1.dth1 + 2.0 * k2.dth1 + 2.0 * k3.dth1 + k4.dth1));
    return y;
}

namespace {

struct AccDeriv {
    double dx, dy, dth0, dth1, dv, ddelta;
};

inline AccDeriv acc_deriv(double th0, double th1, double v, double delta,
                          double a, double omega, double L, double d) {
    AccDeriv k;
    k.dx = v * std::cos(th0);
    k.dy = v * std::sin(th0);
    k.dth0 = v * std::tan(delta) / L;
    k.dth1 = v * std::sin(th0 - th1) / d;
    k.dv = a;
    k.ddelta = omega;
    return k;
}

} // namespace

State AccelTractorTrailer::do_step(const State& x, const Control& u) const {
    const double a = u[0], omega = u[1];
    if (x[4] == 0.0 && a == 0.0 && omega == 0.0) return x;  // frozen
    const double L = p.wheelbase, d = p.hitch_length, h = dt_;

    const AccDeriv k1 = acc_deriv(x[2], x[3], x[4], x[5], a, omega, L, d);
    const AccDeriv k2 = acc_deriv(x[2] + 0.5 * h * k1.dth0, x[3] + 0.5 * h * k1.dth1,
                                  x[4] + 0.5 * h * k1.dv, x[5] + 0.5 * h * k1.ddelta,
                                  a, omega, L, d);
    const AccDeriv k3 = acc_deriv(x[2] + 0.5 * h * k2.dth0, x[3] + 0.5 * h * k2.dth1,
                                  x[4] + 0.5 * h * k2.dv, x[5] + 0.5 * h * k2.ddelta,
                                  a, omega, L, d);
    const AccDeriv k4 = acc_deriv(x[2] + h * k3.dth0, x[3] + h * k3.dth1,
                                  x[4] + h * k3.dv, x[5] + h * k3.ddelta,
                                  a, omega, L, d);

    State y(6);
    const double w = h / 6.0;
    y[0] = x[0] + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    y[1] = x[1] + w * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    y[2] = wrap_angle(x[2] + w * (k1.dth0 + 2.0 * k2.dth0 + 2.0 * k3.dth0 + k4.dth0));
    y[3] = wrap_angle(x[3] + w * (k1.dth1 + 2.0 * k2.dth1 + 2.0 * k3.dth1 + k4.dth1));
    y[4] = x[4] + w * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
    y[5] = x[5] + w * (k1.ddelta + 2.0 * k2.ddelta + 2.0 * k3.ddelta + k4.ddelta);

    // keep the state space compact
    if (y[4] > p.v_max) y[4] = p.v_max;
    else if (y[4] < -p.v_max) y[4] = -p.v_max;
    if (y[5] > p.delta_max) y[5] = p.delta_max;
    else if (y[5] < -p.delta_max) y[5] = -p.delta_max;
    return y;
}

BodyPoseSet body_poses(const State& x, SystemKind kind, const DynamicsModel& model,
                       double primary_radius, double trailer_radius) {
    BodyPoseSet set;
    switch (kind) {
        case SystemKind::double_integrator:
            set.poses[0] = {x[0], x[1], primary_radius};
            set.count = 1;
            break;
        case SystemKind::kinematic_tt:
        case SystemKind::accel_tt: {
            double d;
            if (kind == SystemKind::kinematic_tt)
                d = static_cast<const KinematicTractorTrailer&>(model).p.hitch_length;
            else
                d = static_cast<const AccelTractorTrailer&>(model).p.hitch_length;
            set.poses[0] = {x[0], x[1], primary_radius};
            set.poses[1] = {x[0] - d * std::cos(x[3]), x[1] - d * std::sin(x[3]),
                            trailer_radius};
            set.count = 2;
            break;
        }
    }
    return set;
}

} // namespace safempd
