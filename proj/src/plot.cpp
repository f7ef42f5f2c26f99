#include "safempd/plot.hpp"

#include "safempd/core.hpp"
#include "safempd/toml.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

namespace safempd {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct TracePoint {
    double x = 0.0, y = 0.0;
    double th0 = 0.0, th1 = 0.0;
    bool fallback = false;
};

struct Trace {
    std::string system;
    double primary_radius = 0.3;
    double trailer_radius = 0.3;
    double hitch_length = 0.0;  // zero for the double integrator
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    double goal_x = 0, goal_y = 0, goal_tol = 0.3;
    std::vector<json> obstacles;
    std::vector<TracePoint> points;  // index 0 = start state
};

TracePoint point_from_state(const json& state, const std::string& system) {
    if (!state.is_array() || state.size() < 2)
        throw ConfigError("trace: malformed state array");
    TracePoint p;
    p.x = state[0].get<double>();
    p.y = state[1].get<double>();
    if (system != "double_integrator") {
        if (state.size() < 4) throw ConfigError("trace: malformed state array");
        p.th0 = state[2].get<double>();
        p.th1 = state[3].get<double>();
    }
    return p;
}

Trace parse_trace(const std::string& text) {
    Trace tr;
    std::istringstream in(text);
    std::string line;
    bool have_meta = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError("trace: line " + std::to_string(line_no) +
                              ": invalid JSON (" + e.what() + ")");
        }
        const std::string type = j.value("type", "");
        if (type == "meta") {
            have_meta = true;
            const json& sys = j.at("system");
            tr.system = sys.at("id").get<std::string>();
            tr.primary_radius = sys.at("primary_radius").get<double>();
            if (sys.contains("trailer_radius"))
                tr.trailer_radius = sys.at("trailer_radius").get<double>();
            if (sys.contains("hitch_length"))
                tr.hitch_length = sys.at("hitch_length").get<double>();
            const json& world = j.at("world");
            tr.x_min = world.at("x_min").get<double>();
            tr.x_max = world.at("x_max").get<double>();
            tr.y_min = world.at("y_min").get<double>();
            tr.y_max = world.at("y_max").get<double>();
            const json& goal = j.at("goal");
            tr.goal_x = goal.at("px").get<double>();
            tr.goal_y = goal.at("py").get<double>();
            tr.goal_tol = goal.at("tolerance").get<double>();
            for (const json& o : j.at("obstacles")) tr.obstacles.push_back(o);
            tr.points.push_back(point_from_state(j.at("start"), tr.system));
        } else if (type == "step") {
            if (!have_meta) throw ConfigError("trace: step before meta line");
            TracePoint p = point_from_state(j.at("state"), tr.system);
            p.fallback = j.value("fallback", false);
            tr.points.push_back(p);
        }
    }
    if (!have_meta) throw ConfigError("trace: missing meta line");
    return tr;
}

} // namespace

std::string render_trace_svg(const std::string& trace_text) {
    const Trace tr = parse_trace(trace_text);
    const double scale = 60.0;
    const double pad = 0.6;
    const double w = (tr.x_max - tr.x_min + 2 * pad) * scale;
    const double h = (tr.y_max - tr.y_min + 2 * pad) * scale;
    auto X = [&](double x) { return (x - tr.x_min + pad) * scale; };
    auto Y = [&](double y) { return (tr.y_max - y + pad) * scale; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) +
           "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) +
           "\">\n";
    svg += "<style>\n"
           ".world{fill:#fcfcfc;stroke:#444;stroke-width:2}\n"
           ".obstacle{fill:#9aa3ab;stroke:#5d666e;stroke-width:1.5}\n"
           ".goal{fill:none;stroke:#2d9d3a;stroke-width:2;stroke-dasharray:6 4}\n"
           ".goalc{fill:#2d9d3a}\n"
           ".start{fill:#1a6fb8}\n"
           ".body{fill:none;stroke:#b5c7dd;stroke-width:1.2}\n"
           ".hitch{stroke:#b5c7dd;stroke-width:1.2}\n"
           ".traj{fill:none;stroke:#1a6fb8;stroke-width:2.5}\n"
           ".fallback{fill:none;stroke:#d1342f;stroke-width:3}\n"
           "</style>\n";
    svg += "<rect class=\"world\" x=\"" + fmt(X(tr.x_min)) + "\" y=\"" +
           fmt(Y(tr.y_max)) + "\" width=\"" + fmt((tr.x_max - tr.x_min) * scale) +
           "\" height=\"" + fmt((tr.y_max - tr.y_min) * scale) + "\"/>\n";

    for (const json& o : tr.obstacles) {
        const std::string type = o.at("type").get<std::string>();
        if (type == "circle") {
            svg += "<circle class=\"obstacle\" cx=\"" + fmt(X(o.at("cx").get<double>())) +
                   "\" cy=\"" + fmt(Y(o.at("cy").get<double>())) + "\" r=\"" +
                   fmt(o.at("radius").get<double>() * scale) + "\"/>\n";
        } else {
            const double x0 = o.at("x_min").get<double>(), x1 = o.at("x_max").get<double>();
            const double y0 = o.at("y_min").get<double>(), y1 = o.at("y_max").get<double>();
            svg += "<rect class=\"obstacle\" x=\"" + fmt(X(x0)) + "\" y=\"" + fmt(Y(y1)) +
                   "\" width=\"" + fmt((x1 - x0) * scale) + "\" height=\"" +
                   fmt((y1 - y0) * scale) + "\"/>\n";
        }
    }

    svg += "<circle class=\"goal\" cx=\"" + fmt(X(tr.goal_x)) + "\" cy=\"" +
           fmt(Y(tr.goal_y)) + "\" r=\"" + fmt(tr.goal_tol * scale) + "\"/>\n";
    svg += "<circle class=\"goalc\" cx=\"" + fmt(X(tr.goal_x)) + "\" cy=\"" +
           fmt(Y(tr.goal_y)) + "\" r=\"4\"/>\n";

    // Body-disc footprints at a dozen subsampled times.
    const std::size_t n = tr.points.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 12);
    const bool has_trailer = tr.system != "double_integrator";
    for (std::size_t i = 0; i < n; i += stride) {
        const TracePoint& p = tr.points[i];
        svg += "<circle class=\"body\" cx=\"" + fmt(X(p.x)) + "\" cy=\"" + fmt(Y(p.y)) +
               "\" r=\"" + fmt(tr.primary_radius * scale) + "\"/>\n";
        if (has_trailer) {
            const double tx = p.x - tr.hitch_length * std::cos(p.th1);
            const double ty = p.y - tr.hitch_length * std::sin(p.th1);
            svg += "<circle class=\"body\" cx=\"" + fmt(X(tx)) + "\" cy=\"" +
                   fmt(Y(ty)) + "\" r=\"" + fmt(tr.trailer_radius * scale) + "\"/>\n";
            svg += "<line class=\"hitch\" x1=\"" + fmt(X(p.x)) + "\" y1=\"" +
                   fmt(Y(p.y)) + "\" x2=\"" + fmt(X(tx)) + "\" y2=\"" + fmt(Y(ty)) +
                   "\"/>\n";
        }
    }

    // Executed path: one stroke, plus distinct strokes over backup segments.
    svg += "<path class=\"traj\" d=\"";
    for (std::size_t i = 0; i < n; ++i) {
        svg += (i == 0 ? "M" : " L");
        svg += fmt(X(tr.points[i].x)) + " " + fmt(Y(tr.points[i].y));
    }
    svg += "\"/>\n";

    std::size_t i = 1;
    while (i < n) {
        if (!tr.points[i].fallback) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && tr.points[j].fallback) ++j;
        svg += "<path class=\"fallback\" d=\"M" + fmt(X(tr.points[i - 1].x)) + " " +
               fmt(Y(tr.points[i - 1].y));
        for (std::size_t k = i; k < j; ++k)
            svg += " L" + fmt(X(tr.points[k].x)) + " " + fmt(Y(tr.points[k].y));
        svg += "\"/>\n";
        i = j;
    }

    svg += "<circle class=\"start\" cx=\"" + fmt(X(tr.points[0].x)) + "\" cy=\"" +
           fmt(Y(tr.points[0].y)) + "\" r=\"4\"/>\n";
    svg += "</svg>\n";
    return svg;
}

void emit_plot(const std::string& trace_path, const std::string& out_path) {
    write_text_file(out_path, render_trace_svg(read_text_file(trace_path)));
}

} // namespace safempd
