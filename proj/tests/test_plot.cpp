#include "safempd/plot.hpp"

#include "safempd/harness.hpp"

#include "doctest.h"

#include <filesystem>
#include <string>

using namespace safempd;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos;
         at = text.find(needle, at + needle.size()))
        ++n;
    return n;
}

std::string run_trace(Scenario scenario, PlanningMode mode, std::uint64_t seed,
                      const char* stem) {
    TrialSpec spec;
    spec.scenario = std::move(scenario);
    spec.params.horizon = 16;
    spec.params.candidates = 24;
    spec.params.levels = 6;
    spec.params.mode = mode;
    spec.exec_steps = 4;
    spec.max_cycles = 20;
    spec.seed = seed;
    const std::filesystem::path dir =
        std::filesystem::path("/tmp") / (std::string("safempd_plot_") + stem);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    TrialResult r = run_trial(spec, dir.string());
    return (dir / r.trace_file).string();
}

} // namespace

TEST_CASE("an executed run renders as one stroke plus scene geometry") {
    Scenario s = make_empty_scenario(SystemKind::double_integrator);
    s.goal.px = -6.0;
    s.goal.py = -7.0;
    s.obstacles.push_back(Obstacle::make_circle(0.0, 0.0, 1.0));
    s.obstacles.push_back(Obstacle::make_box(3.0, 3.0, 5.0, 4.0));
    const std::string path = run_trace(s, PlanningMode::shielded, 3, "basic");

    const std::string svg = render_trace_svg(read_text_file(path));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_occurrences(svg, "class=\"traj\"") == 1);
    CHECK(count_occurrences(svg, "class=\"obstacle\"") == 2);
    CHECK(count_occurrences(svg, "class=\"goal\"") == 1);
    CHECK(count_occurrences(svg, "class=\"start\"") == 1);
    CHECK(count_occurrences(svg, "class=\"world\"") == 1);
    CHECK(svg.find("class=\"body\"") != std::string::npos);
    // no backup controls executed on an easy straight dash
    CHECK(count_occurrences(svg, "class=\"fallback\"") == 0);
}

TEST_CASE("backup segments get their own stroke class") {
    // Aim the nominal plan at a wall so the shield has to take over.
    Scenario s = make_empty_scenario(SystemKind::double_integrator);
    s.goal.px = 9.5;  // outside the world rectangle: unreachable, keeps pushing
    s.goal.py = -7.0;
    s.obstacles.push_back(Obstacle::make_box(-4.0, -10.0, -2.0, 10.0));
    const std::string path = run_trace(s, PlanningMode::shielded, 5, "wall");

    const std::string svg = render_trace_svg(read_text_file(path));
    CHECK(count_occurrences(svg, "class=\"traj\"") == 1);
    CHECK(count_occurrences(svg, "class=\"fallback\"") >= 1);
}

TEST_CASE("tractor traces draw both body discs and the hitch link") {
    Scenario s = make_empty_scenario(SystemKind::kinematic_tt);
    s.goal.px = -5.5;
    s.goal.py = -7.0;
    const std::string path = run_trace(s, PlanningMode::shielded, 2, "tt");
    const std::string svg = render_trace_svg(read_text_file(path));
    CHECK(svg.find("class=\"hitch\"") != std::string::npos);
    CHECK(count_occurrences(svg, "class=\"body\"") >= 2);
}

TEST_CASE("rendering is deterministic byte for byte") {
    Scenario s = make_empty_scenario(SystemKind::double_integrator);
    s.goal.px = -6.0;
    s.goal.py = -7.0;
    const std::string p1 = run_trace(s, PlanningMode::shielded, 7, "det1");
    const std::string p2 = run_trace(s, PlanningMode::shielded, 7, "det2");
    const std::string t1 = read_text_file(p1);
    REQUIRE(t1 == read_text_file(p2));
    CHECK(render_trace_svg(t1) == render_trace_svg(t1));

    const std::string out = "/tmp/safempd_plot_det1/out.svg";
    emit_plot(p1, out);
    CHECK(read_text_file(out) == render_trace_svg(t1));
}

TEST_CASE("malformed traces are rejected with line context") {
    CHECK_THROWS_WITH_AS(render_trace_svg(""), doctest::Contains("meta"), ConfigError);
    CHECK_THROWS_WITH_AS(render_trace_svg("{\"type\": \"step\"}\n"),
                         doctest::Contains("meta"), ConfigError);
    CHECK_THROWS_WITH_AS(render_trace_svg("not json at all\n"),
                         doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_AS(emit_plot("/tmp/safempd_plot_missing.jsonl", "/tmp/out.svg"),
                    ConfigError);
}
