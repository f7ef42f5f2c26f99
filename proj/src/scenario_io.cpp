#include "safempd/scenario_io.hpp"

#include "safempd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <set>
#include <sstream>

namespace safempd {

namespace {

void check_keys(const TomlTable& t, const std::string& ctx,
                std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : t.items) {
        bool ok = false;
        for (const char* a : allowed)
            if (k == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(ctx + ": unknown key '" + k + "'");
    }
}

double positive(double v, const std::string& key, const std::string& ctx) {
    if (!(v > 0.0)) throw ConfigError(ctx + ": '" + key + "' must be positive");
    return v;
}

double non_negative(double v, const std::string& key, const std::string& ctx) {
    if (!(v >= 0.0)) throw ConfigError(ctx + ": '" + key + "' must be >= 0");
    return v;
}

double point_segment_distance(double px, double py, double ax, double ay, double bx,
                              double by) {
    const double dx = bx - ax, dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = ax + t * dx, cy = ay + t * dy;
    return std::hypot(px - cx, py - cy);
}

} // namespace

Scenario scenario_from_toml(const TomlDocument& doc, const std::string& ctx,
                            const std::string& fallback_name) {
    check_keys(doc.root, ctx, {"schema_version", "name"});
    const std::int64_t version = toml_get_int(doc.root, "schema_version", ctx);
    if (version != kScenarioSchemaVersion)
        throw ConfigError(ctx + ": unsupported schema_version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kScenarioSchemaVersion) + ")");

    Scenario s;
    s.name = toml_opt_string(doc.root, "name", ctx).value_or(fallback_name);

    const TomlTable* sys = doc.table("system");
    if (!sys) throw ConfigError(ctx + ": missing [system] table");
    const std::string sys_ctx = ctx + ": [system]";
    const std::string id = toml_get_string(*sys, "id", sys_ctx);
    s.kind = system_from_id(id);
    const double dt = positive(toml_get_double(*sys, "dt", sys_ctx), "dt", sys_ctx);
    s.primary_radius = positive(
        toml_opt_double(*sys, "primary_radius", sys_ctx).value_or(0.3),
        "primary_radius", sys_ctx);

    switch (s.kind) {
        case SystemKind::double_integrator: {
            check_keys(*sys, sys_ctx, {"id", "dt", "primary_radius", "a_max", "v_max"});
            const double a_max = positive(
                toml_opt_double(*sys, "a_max", sys_ctx).value_or(2.0), "a_max", sys_ctx);
            const double v_max = positive(
                toml_opt_double(*sys, "v_max", sys_ctx).value_or(2.0), "v_max", sys_ctx);
            s.model = std::make_shared<DoubleIntegrator2D>(dt, a_max, v_max);
            s.trailer_radius = 0.0;
            break;
        }
        case SystemKind::kinematic_tt:
        case SystemKind::accel_tt: {
            const bool accel = s.kind == SystemKind::accel_tt;
            if (accel)
                check_keys(*sys, sys_ctx,
                           {"id", "dt", "primary_radius", "trailer_radius", "wheelbase",
                            "hitch_length", "v_max", "delta_max", "theta_jk", "a_max",
                            "omega_max"});
            else
                check_keys(*sys, sys_ctx,
                           {"id", "dt", "primary_radius", "trailer_radius", "wheelbase",
                            "hitch_length", "v_max", "delta_max", "theta_jk"});
            TractorTrailerParams p;
            p.wheelbase = positive(
                toml_opt_double(*sys, "wheelbase", sys_ctx).value_or(p.wheelbase),
                "wheelbase", sys_ctx);
            p.hitch_length = positive(
                toml_opt_double(*sys, "hitch_length", sys_ctx).value_or(p.hitch_length),
                "hitch_length", sys_ctx);
            p.v_max = positive(toml_opt_double(*sys, "v_max", sys_ctx).value_or(p.v_max),
                               "v_max", sys_ctx);
            p.delta_max = positive(
                toml_opt_double(*sys, "delta_max", sys_ctx).value_or(p.delta_max),
                "delta_max", sys_ctx);
            if (p.delta_max >= 1.5)
                throw ConfigError(sys_ctx + ": 'delta_max' must be below 1.5 rad");
            p.theta_jk = positive(
                toml_opt_double(*sys, "theta_jk", sys_ctx).value_or(p.theta_jk),
                "theta_jk", sys_ctx);
            if (p.theta_jk > kPi)
                throw ConfigError(sys_ctx + ": 'theta_jk' must be at most pi");
            s.trailer_radius = positive(
                toml_opt_double(*sys, "trailer_radius", sys_ctx).value_or(0.3),
                "trailer_radius", sys_ctx);
            if (accel) {
                const double a_max = positive(
                    toml_opt_double(*sys, "a_max", sys_ctx).value_or(1.0), "a_max",
                    sys_ctx);
                const double omega_max = positive(
                    toml_opt_double(*sys, "omega_max", sys_ctx).value_or(1.0),
                    "omega_max", sys_ctx);
                s.model = std::make_shared<AccelTractorTrailer>(dt, p, a_max, omega_max);
            } else {
                s.model = std::make_shared<KinematicTractorTrailer>(dt, p);
            }
            break;
        }
    }

    const TomlTable* world = doc.table("world");
    if (!world) throw ConfigError(ctx + ": missing [world] table");
    const std::string world_ctx = ctx + ": [world]";
    check_keys(*world, world_ctx, {"x_min", "x_max", "y_min", "y_max", "margin"});
    s.world.min_x = toml_get_double(*world, "x_min", world_ctx);
    s.world.max_x = toml_get_double(*world, "x_max", world_ctx);
    s.world.min_y = toml_get_double(*world, "y_min", world_ctx);
    s.world.max_y = toml_get_double(*world, "y_max", world_ctx);
    s.world.margin = toml_opt_bool(*world, "margin", world_ctx).value_or(true);
    if (s.world.min_x >= s.world.max_x || s.world.min_y >= s.world.max_y)
        throw ConfigError(world_ctx + ": bounds must satisfy x_min < x_max, y_min < y_max");

    for (const TomlTable* ob : doc.array("obstacles")) {
        const std::string ob_ctx =
            ctx + ": [[obstacles]] #" + std::to_string(s.obstacles.size() + 1);
        const std::string type = toml_get_string(*ob, "type", ob_ctx);
        if (type == "circle") {
            check_keys(*ob, ob_ctx, {"type", "cx", "cy", "radius"});
            const double cx = toml_get_double(*ob, "cx", ob_ctx);
            const double cy = toml_get_double(*ob, "cy", ob_ctx);
            const double r =
                positive(toml_get_double(*ob, "radius", ob_ctx), "radius", ob_ctx);
            s.obstacles.push_back(Obstacle::make_circle(cx, cy, r));
        } else if (type == "box") {
            check_keys(*ob, ob_ctx, {"type", "x_min", "x_max", "y_min", "y_max"});
            const double x0 = toml_get_double(*ob, "x_min", ob_ctx);
            const double x1 = toml_get_double(*ob, "x_max", ob_ctx);
            const double y0 = toml_get_double(*ob, "y_min", ob_ctx);
            const double y1 = toml_get_double(*ob, "y_max", ob_ctx);
            if (x0 >= x1 || y0 >= y1)
                throw ConfigError(ob_ctx + ": box extents must satisfy min < max");
            s.obstacles.push_back(Obstacle::make_box(x0, y0, x1, y1));
        } else {
            throw ConfigError(ob_ctx + ": unknown obstacle type '" + type + "'");
        }
    }

    const TomlTable* goal = doc.table("goal");
    if (!goal) throw ConfigError(ctx + ": missing [goal] table");
    const std::string goal_ctx = ctx + ": [goal]";
    check_keys(*goal, goal_ctx, {"px", "py", "heading", "tolerance", "heading_tolerance"});
    s.goal.px = toml_get_double(*goal, "px", goal_ctx);
    s.goal.py = toml_get_double(*goal, "py", goal_ctx);
    s.goal.heading = toml_opt_double(*goal, "heading", goal_ctx);
    if (s.goal.heading && s.kind == SystemKind::double_integrator)
        throw ConfigError(goal_ctx + ": 'heading' is not applicable to the double integrator");
    s.goal.tolerance =
        positive(toml_opt_double(*goal, "tolerance", goal_ctx).value_or(0.3),
                 "tolerance", goal_ctx);
    s.goal.heading_tolerance = positive(
        toml_opt_double(*goal, "heading_tolerance", goal_ctx).value_or(0.2),
        "heading_tolerance", goal_ctx);

    if (const TomlTable* safety = doc.table("safety")) {
        const std::string sctx = ctx + ": [safety]";
        check_keys(*safety, sctx, {"c_margin", "v_eps", "c_angle"});
        s.safety.c_margin = non_negative(
            toml_opt_double(*safety, "c_margin", sctx).value_or(s.safety.c_margin),
            "c_margin", sctx);
        s.safety.v_eps = non_negative(
            toml_opt_double(*safety, "v_eps", sctx).value_or(s.safety.v_eps), "v_eps",
            sctx);
        s.safety.c_angle = non_negative(
            toml_opt_double(*safety, "c_angle", sctx).value_or(s.safety.c_angle),
            "c_angle", sctx);
    }

    if (const TomlTable* cost = doc.table("cost")) {
        const std::string cctx = ctx + ": [cost]";
        check_keys(*cost, cctx, {"w_track", "w_u", "w_terminal"});
        s.cost.w_track = non_negative(
            toml_opt_double(*cost, "w_track", cctx).value_or(s.cost.w_track), "w_track",
            cctx);
        s.cost.w_u = non_negative(
            toml_opt_double(*cost, "w_u", cctx).value_or(s.cost.w_u), "w_u", cctx);
        s.cost.w_terminal = non_negative(
            toml_opt_double(*cost, "w_terminal", cctx).value_or(s.cost.w_terminal),
            "w_terminal", cctx);
    }

    const TomlTable* start = doc.table("start");
    if (!start) throw ConfigError(ctx + ": missing [start] table");
    const std::string start_ctx = ctx + ": [start]";
    check_keys(*start, start_ctx, {"state"});
    const std::vector<double> xs = toml_get_double_array(*start, "state", start_ctx);
    if (static_cast<int>(xs.size()) != s.model->state_dim())
        throw ConfigError(start_ctx + ": 'state' must have " +
                          std::to_string(s.model->state_dim()) + " entries, got " +
                          std::to_string(xs.size()));
    State x0(static_cast<int>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]))
            throw ConfigError(start_ctx + ": 'state' entries must be finite");
        x0[static_cast<int>(i)] = xs[i];
    }
    if (s.kind != SystemKind::double_integrator) {
        x0[2] = wrap_angle(x0[2]);
        x0[3] = wrap_angle(x0[3]);
    }
    if (s.kind == SystemKind::accel_tt) {
        const auto& m = static_cast<const AccelTractorTrailer&>(*s.model);
        if (std::abs(x0[4]) > m.p.v_max)
            throw ConfigError(start_ctx + ": 'state' velocity exceeds v_max");
        if (std::abs(x0[5]) > m.p.delta_max)
            throw ConfigError(start_ctx + ": 'state' steering exceeds delta_max");
    }
    s.x_start = x0;

    const double g0 = safety_margin(s.x_start, s);
    if (g0 > 0.0) {
        std::ostringstream msg;
        msg << ctx << ": start state is unsafe (g = " << g0 << ")";
        throw InitialStateUnsafe(msg.str());
    }
    return s;
}

TomlDocument scenario_to_toml(const Scenario& s) {
    TomlDocument doc;
    doc.root.set("schema_version", kScenarioSchemaVersion);
    if (!s.name.empty()) doc.root.set("name", s.name);

    TomlTable& sys = doc.add_table("system");
    sys.set("id", system_id(s.kind));
    sys.set("dt", s.model->dt());
    sys.set("primary_radius", s.primary_radius);
    switch (s.kind) {
        case SystemKind::double_integrator: {
            const auto& m = static_cast<const DoubleIntegrator2D&>(*s.model);
            sys.set("a_max", m.a_max);
            sys.set("v_max", m.v_max);
            break;
        }
        case SystemKind::kinematic_tt: {
            const auto& m = static_cast<const KinematicTractorTrailer&>(*s.model);
            sys.set("trailer_radius", s.trailer_radius);
            sys.set("wheelbase", m.p.wheelbase);
            sys.set("hitch_length", m.p.hitch_length);
            sys.set("v_max", m.p.v_max);
            sys.set("delta_max", m.p.delta_max);
            sys.set("theta_jk", m.p.theta_jk);
            break;
        }
        case SystemKind::accel_tt: {
            const auto& m = static_cast<const AccelTractorTrailer&>(*s.model);
            sys.set("trailer_radius", s.trailer_radius);
            sys.set("wheelbase", m.p.wheelbase);
            sys.set("hitch_length", m.p.hitch_length);
            sys.set("v_max", m.p.v_max);
            sys.set("delta_max", m.p.delta_max);
            sys.set("theta_jk", m.p.theta_jk);
            sys.set("a_max", m.a_max);
            sys.set("omega_max", m.omega_max);
            break;
        }
    }

    TomlTable& world = doc.add_table("world");
    world.set("x_min", s.world.min_x);
    world.set("x_max", s.world.max_x);
    world.set("y_min", s.world.min_y);
    world.set("y_max", s.world.max_y);
    world.set("margin", s.world.margin);

    TomlTable& start = doc.add_table("start");
    TomlArray xs;
    for (double v : s.x_start) xs.push_back(TomlValue(v));
    start.set("state", std::move(xs));

    TomlTable& goal = doc.add_table("goal");
    goal.set("px", s.goal.px);
    goal.set("py", s.goal.py);
    if (s.goal.heading) goal.set("heading", *s.goal.heading);
    goal.set("tolerance", s.goal.tolerance);
    goal.set("heading_tolerance", s.goal.heading_tolerance);

    TomlTable& safety = doc.add_table("safety");
    safety.set("c_margin", s.safety.c_margin);
    safety.set("v_eps", s.safety.v_eps);
    safety.set("c_angle", s.safety.c_angle);

    TomlTable& cost = doc.add_table("cost");
    cost.set("w_track", s.cost.w_track);
    cost.set("w_u", s.cost.w_u);
    cost.set("w_terminal", s.cost.w_terminal);

    for (const Obstacle& o : s.obstacles) {
        TomlTable& t = doc.add_array_item("obstacles");
        if (o.kind == Obstacle::Kind::circle) {
            t.set("type", "circle");
            t.set("cx", o.circle.cx);
            t.set("cy", o.circle.cy);
            t.set("radius", o.circle.radius);
        } else {
            t.set("type", "box");
            t.set("x_min", o.box.min_x);
            t.set("x_max", o.box.max_x);
            t.set("y_min", o.box.min_y);
            t.set("y_max", o.box.max_y);
        }
    }
    return doc;
}

Scenario load_scenario(const std::string& path) {
    const TomlDocument doc = toml_parse_file(path);
    return scenario_from_toml(doc, path, std::filesystem::path(path).stem().string());
}

void save_scenario(const Scenario& s, const std::string& path) {
    write_text_file(path, toml_emit(scenario_to_toml(s)));
}

Scenario make_empty_scenario(SystemKind kind) {
    Scenario s;
    s.kind = kind;
    s.name = "empty_" + system_id(kind);
    s.world = {-10.0, -10.0, 10.0, 10.0, true};
    s.goal.px = 7.0;
    s.goal.py = 7.0;
    const double dt = 0.1;
    switch (kind) {
        case SystemKind::double_integrator:
            s.model = std::make_shared<DoubleIntegrator2D>(dt, 2.0, 2.0);
            s.trailer_radius = 0.0;
            s.x_start = State{-7.0, -7.0, 0.0, 0.0};
            break;
        case SystemKind::kinematic_tt:
            s.model = std::make_shared<KinematicTractorTrailer>(dt, TractorTrailerParams{});
            s.x_start = State{-7.0, -7.0, 0.0, 0.0};
            break;
        case SystemKind::accel_tt:
            s.model = std::make_shared<AccelTractorTrailer>(dt, TractorTrailerParams{},
                                                            1.0, 1.0);
            s.x_start = State{-7.0, -7.0, 0.0, 0.0, 0.0, 0.0};
            break;
    }
    return s;
}

Scenario generate_scenario(std::uint64_t seed, SystemKind kind, int n_obstacles) {
    if (n_obstacles < 0) throw ConfigError("generate_scenario: obstacle count must be >= 0");
    Scenario s = make_empty_scenario(kind);
    s.name = "gen_" + system_id(kind) + "_" + std::to_string(seed);

    RngStream rng(seed);
    const double corridor_clear = s.primary_radius + 0.45;
    const double endpoint_clear = 1.2;
    for (int i = 0; i < n_obstacles; ++i) {
        for (int attempt = 0; attempt < 200; ++attempt) {
            const double r = rng.uniform(0.6, 1.4);
            const double cx = rng.uniform(-6.5, 6.5);
            const double cy = rng.uniform(-6.5, 6.5);
            const double d_line = point_segment_distance(cx, cy, s.x_start[0],
                                                         s.x_start[1], s.goal.px,
                                                         s.goal.py);
            if (d_line < r + corridor_clear) continue;
            if (std::hypot(cx - s.x_start[0], cy - s.x_start[1]) < r + endpoint_clear)
                continue;
            if (std::hypot(cx - s.goal.px, cy - s.goal.py) < r + endpoint_clear) continue;
            bool overlaps = false;
            for (const Obstacle& o : s.obstacles) {
                if (std::hypot(cx - o.circle.cx, cy - o.circle.cy) <
                    r + o.circle.radius + 0.3) {
                    overlaps = true;
                    break;
                }
            }
            if (overlaps) continue;
            s.obstacles.push_back(Obstacle::make_circle(cx, cy, r));
            break;
        }
    }

    if (!in_invariant_set(s.x_start, s))
        throw ContractViolation("generate_scenario: start state left outside C");
    return s;
}

Scenario make_corridor_scenario(int index) {
    if (index < 0 || index >= 10)
        throw ConfigError("make_corridor_scenario: index must be in [0, 10)");
    Scenario s = make_empty_scenario(SystemKind::accel_tt);
    s.name = "corridor_" + std::to_string(index);
    // The trailer sits 2.5 m behind the tractor, so keep the left bound clear.
    s.world = {-9.5, -6.0, 9.0, 6.0, true};
    s.x_start = State{-6.5, 0.0, 0.0, 0.0, 0.0, 0.0};
    s.goal.px = 6.5;
    s.goal.py = index >= 5 ? 0.8 : 0.0;
    s.goal.tolerance = 0.4;

    const double gap_half = 0.55 + 0.05 * (index % 5);
    const double jog = index >= 5 ? 0.8 : 0.0;
    const double wall_r = 0.7;
    for (double x = -5.0; x <= 5.0 + 1e-9; x += 0.9) {
        // Corridor centerline ramps laterally between x = -1.5 and 1.5.
        double yc = 0.0;
        if (jog != 0.0) {
            if (x <= -1.5) yc = 0.0;
            else if (x >= 1.5) yc = jog;
            else yc = jog * (x + 1.5) / 3.0;
        }
        const double off = gap_half + wall_r;
        s.obstacles.push_back(Obstacle::make_circle(x, yc + off, wall_r));
        s.obstacles.push_back(Obstacle::make_circle(x, yc - off, wall_r));
    }
    return s;
}

} // namespace safempd
