#pragma once

#include "smart_track/depth_sim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace smart_track {

/// Scenario files are flat `key = value` lines; `#` starts a comment.
/// Vectors are whitespace-separated numbers. Keys not listed in
/// format_scenario() output are rejected. Keys that are absent keep the
/// ScenarioConfig defaults. Errors are ConfigError with the line and key.
ScenarioConfig parse_scenario(std::istream& in, const std::string& source = "<stream>");
ScenarioConfig load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(format_scenario(c)) reproduces c.
std::string format_scenario(const ScenarioConfig& cfg);

/// Built-in experiment geometries: "static", "static_far", "circle", "fig8".
std::vector<std::string> builtin_scenario_names();
ScenarioConfig builtin_scenario(const std::string& name);

/// `spec` is either an existing file path or a built-in name, with or
/// without the ".scn" suffix.
ScenarioConfig resolve_scenario(const std::string& spec);

}  // namespace smart_track
