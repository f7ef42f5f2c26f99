#include "safempd/environment.hpp"

#include <algorithm>
#include <limits>

namespace safempd {

double Scenario::jackknife_limit() const {
    switch (kind) {
        case SystemKind::kinematic_tt:
            return static_cast<const KinematicTractorTrailer&>(*model).p.theta_jk;
        case SystemKind::accel_tt:
            return static_cast<const AccelTractorTrailer&>(*model).p.theta_jk;
        default:
            return 0.0;
    }
}

double box_signed_distance(double px, double py, const BoxObstacle& box) {
    const double qx = std::max(box.min_x - px, px - box.max_x);
    const double qy = std::max(box.min_y - py, py - box.max_y);
    if (qx > 0.0 || qy > 0.0) {
        const double ox = std::max(qx, 0.0);
        const double oy = std::max(qy, 0.0);
        return std::sqrt(ox * ox + oy * oy);
    }
    return std::max(qx, qy);  // inside: negative
}

double safety_margin(const State& x, const Scenario& scenario) {
    double g = -std::numeric_limits<double>::infinity();
    const BodyPoseSet bodies = scenario.bodies(x);

    for (int b = 0; b < bodies.count; ++b) {
        const BodyPose& body = bodies.poses[b];
        for (const Obstacle& obs : scenario.obstacles) {
            double comp;
            if (obs.kind == Obstacle::Kind::circle) {
                const double dx = body.cx - obs.circle.cx;
                const double dy = body.cy - obs.circle.cy;
                comp = (obs.circle.radius + body.radius) - std::sqrt(dx * dx + dy * dy);
            } else {
                comp = body.radius - box_signed_distance(body.cx, body.cy, obs.box);
            }
            if (comp > g) g = comp;
        }
        if (scenario.world.margin) {
            // the body disc must stay inside the world box
            const BoxObstacle wb{scenario.world.min_x, scenario.world.min_y,
                                 scenario.world.max_x, scenario.world.max_y};
            const double comp =
                body.radius + box_signed_distance(body.cx, body.cy, wb);
            if (comp > g) g = comp;
        }
    }

    if (scenario.kind == SystemKind::double_integrator) {
        const double di_v_max =
            static_cast<const DoubleIntegrator2D&>(*scenario.model).v_max;
        const double comp = scenario.speed(x) - di_v_max;
        if (comp > g) g = comp;
    } else {
        const double comp =
            std::abs(scenario.hitch_angle(x)) - scenario.jackknife_limit();
        if (comp > g) g = comp;
    }
    return g;
}

bool in_invariant_set(const State& x, const Scenario& scenario) {
    if (scenario.kind == SystemKind::kinematic_tt)
        return in_safe_set(x, scenario);

    if (safety_margin(x, scenario) > -scenario.safety.c_margin) return false;
    if (scenario.speed(x) > scenario.safety.v_eps) return false;
    if (scenario.kind == SystemKind::accel_tt) {
        if (std::abs(scenario.hitch_angle(x)) >
            scenario.jackknife_limit() - scenario.safety.c_angle)
            return false;
    }
    return true;
}

double trajectory_cost(const StateTrajectory& states, const ControlSequence& controls,
                       const Scenario& scenario) {
    if (states.size() != controls.size() + 1)
        throw ContractViolation("trajectory_cost: |states| must equal |controls|+1");
    const double dt = scenario.model->dt();
    const double gx = scenario.goal.px, gy = scenario.goal.py;
    const CostSpec& w = scenario.cost;

    double total = 0.0;
    for (std::size_t t = 0; t < controls.size(); ++t) {
        const double dx = states[t][0] - gx;
        const double dy = states[t][1] - gy;
        total += (w.w_track * (dx * dx + dy * dy) +
                  w.w_u * controls[t].squared_norm()) * dt;
    }
    const State& last = states.back();
    const double dx = last[0] - gx, dy = last[1] - gy;
    total += w.w_terminal * (dx * dx + dy * dy);
    return total;
}

bool goal_reached(const State& x, const Scenario& scenario) {
    const double dx = x[0] - scenario.goal.px;
    const double dy = x[1] - scenario.goal.py;
    if (std::sqrt(dx * dx + dy * dy) > scenario.goal.tolerance) return false;
    if (scenario.goal.heading && scenario.kind != SystemKind::double_integrator) {
        if (std::abs(wrap_angle(x[2] - *scenario.goal.heading)) >
            scenario.goal.heading_tolerance)
            return false;
    }
    return true;
}

} // namespace safempd
