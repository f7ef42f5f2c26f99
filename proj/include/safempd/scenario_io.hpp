#pragma once

#include "safempd/environment.hpp"
#include "safempd/toml.hpp"

#include <cstdint>
#include <string>

namespace safempd {

// Scenario files are TOML with a versioned schema:
//   schema_version = 1, optional name
//   [system]  id, dt, body radii and per-system parameters
//   [world]   x_min/x_max/y_min/y_max, margin flag
//   [start]   state = [...]
//   [goal]    px, py, optional heading, tolerances
//   [safety]  c_margin, v_eps, c_angle (optional, defaulted)
//   [cost]    w_track, w_u, w_terminal (optional, defaulted)
//   [[obstacles]] type = "circle" (cx, cy, radius) or "box" (x_min..y_max)
// Unknown keys are rejected so typos surface as errors naming the key.

inline constexpr int kScenarioSchemaVersion = 1;

Scenario scenario_from_toml(const TomlDocument& doc, const std::string& ctx,
                            const std::string& fallback_name = "");
TomlDocument scenario_to_toml(const Scenario& s);

/// Parse and validate; throws ConfigError naming the offending field, or
/// InitialStateUnsafe when the start state has g > 0.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

/// Obstacle-free scenario with default parameters for the given system:
/// world [-10,10]^2, start near (-7,-7) at rest, goal at (7,7).
Scenario make_empty_scenario(SystemKind kind);

/// Seeded random field of non-overlapping circle obstacles. A straight
/// corridor from start to goal is kept clear so the goal stays reachable,
/// and the start state (at rest) is verified to lie in the invariant set.
Scenario generate_scenario(std::uint64_t seed, SystemKind kind, int n_obstacles);

/// Narrow-corridor scenario for the acceleration-controlled tractor-trailer:
/// two walls of circles flanking the start-to-goal line. index in [0, 10)
/// controls the gap width; the upper half adds a lateral jog mid-corridor.
Scenario make_corridor_scenario(int index);

} // namespace safempd
