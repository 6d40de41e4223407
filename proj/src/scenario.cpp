#include "smart_track/scenario.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace smart_track {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) {
    out.push_back(tok);
  }
  return out;
}

std::string fmt_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return {buf, res.ptr};
}

double parse_double(const std::string& tok) {
  double x = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(x)) {
    throw std::invalid_argument("expected a number, got '" + tok + "'");
  }
  return x;
}

template <typename Int>
Int parse_int(const std::string& tok) {
  Int x{};
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw std::invalid_argument("expected an integer, got '" + tok + "'");
  }
  return x;
}

double one_double(const std::string& value) {
  const auto toks = split_ws(value);
  if (toks.size() != 1) {
    throw std::invalid_argument("expected one number");
  }
  return parse_double(toks[0]);
}

Vec3 parse_vec3(const std::string& value, bool allow_two = false) {
  const auto toks = split_ws(value);
  if (toks.size() == 2 && allow_two) {
    return {parse_double(toks[0]), parse_double(toks[1]), 0.0};
  }
  if (toks.size() != 3) {
    throw std::invalid_argument(allow_two ? "expected two or three numbers" : "expected three numbers");
  }
  return {parse_double(toks[0]), parse_double(toks[1]), parse_double(toks[2])};
}

std::string fmt_vec3(const Vec3& v) { return fmt_double(v.x()) + " " + fmt_double(v.y()) + " " + fmt_double(v.z()); }

bool parse_bool(const std::string& value) {
  const std::string v = trim(value);
  if (v == "true" || v == "1") {
    return true;
  }
  if (v == "false" || v == "0") {
    return false;
  }
  throw std::invalid_argument("expected true or false");
}

const char* kind_name(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::StaticHover: return "static_hover";
    case TrajectoryKind::Circle: return "circle";
    case TrajectoryKind::FigureEight: return "figure_eight";
  }
  return "static_hover";
}

TrajectoryKind parse_kind(const std::string& value) {
  const std::string v = trim(value);
  if (v == "static_hover") return TrajectoryKind::StaticHover;
  if (v == "circle") return TrajectoryKind::Circle;
  if (v == "figure_eight") return TrajectoryKind::FigureEight;
  throw std::invalid_argument("expected static_hover, circle or figure_eight");
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define SCN_DOUBLE(member)                                                         \
  Field {                                                                          \
    [](ScenarioConfig& c, const std::string& v) { c.member = one_double(v); },     \
        [](const ScenarioConfig& c) { return fmt_double(c.member); }               \
  }
#define SCN_INT(member)                                                                                   \
  Field {                                                                                                 \
    [](ScenarioConfig& c, const std::string& v) { c.member = parse_int<decltype(c.member)>(trim(v)); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }                                  \
  }
#define SCN_VEC3(member)                                                        \
  Field {                                                                       \
    [](ScenarioConfig& c, const std::string& v) { c.member = parse_vec3(v); },  \
        [](const ScenarioConfig& c) { return fmt_vec3(c.member); }              \
  }

// Ordered schema; format_scenario emits keys in this order.
const std::vector<std::pair<std::string, Field>>& schema() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      {"name", {[](ScenarioConfig& c, const std::string& v) { c.name = trim(v); },
                [](const ScenarioConfig& c) { return c.name; }}},
      {"seed", SCN_INT(seed)},
      {"duration", SCN_DOUBLE(duration)},
      {"frame_rate", SCN_DOUBLE(frame_rate)},
      {"predict_rate", SCN_DOUBLE(filter.predict_rate)},
      {"settle_time", SCN_DOUBLE(settle_time)},
      {"target_radius", SCN_DOUBLE(target_radius)},
      {"trajectory.kind", {[](ScenarioConfig& c, const std::string& v) { c.trajectory.kind = parse_kind(v); },
                           [](const ScenarioConfig& c) { return std::string(kind_name(c.trajectory.kind)); }}},
      {"trajectory.center", {[](ScenarioConfig& c, const std::string& v) { c.trajectory.center = parse_vec3(v, true); },
                             [](const ScenarioConfig& c) { return fmt_vec3(c.trajectory.center); }}},
      {"trajectory.radius", SCN_DOUBLE(trajectory.radius)},
      {"trajectory.speed", SCN_DOUBLE(trajectory.speed)},
      {"trajectory.altitude", SCN_DOUBLE(trajectory.altitude)},
      {"camera.fx", SCN_DOUBLE(camera.fx)},
      {"camera.fy", SCN_DOUBLE(camera.fy)},
      {"camera.cx", SCN_DOUBLE(camera.cx)},
      {"camera.cy", SCN_DOUBLE(camera.cy)},
      {"camera.width", SCN_INT(camera.width)},
      {"camera.height", SCN_INT(camera.height)},
      {"camera.position", SCN_VEC3(rig.position)},
      {"camera.look_at", SCN_VEC3(rig.look_at)},
      {"camera.up", SCN_VEC3(rig.up)},
      {"noise.depth_sigma_rel", SCN_DOUBLE(noise.depth_sigma_rel)},
      {"noise.frame_sigma_rel", SCN_DOUBLE(noise.frame_sigma_rel)},
      {"noise.dropout_invalid_frac", SCN_DOUBLE(noise.dropout_invalid_frac)},
      {"noise.backplane_depth", SCN_DOUBLE(noise.backplane_depth)},
      {"detector.detect_prob", SCN_DOUBLE(detector.detect_prob)},
      {"detector.burst_period", SCN_DOUBLE(detector.burst_period)},
      {"detector.burst_duration", SCN_DOUBLE(detector.burst_duration)},
      {"detector.bbox_jitter_px", SCN_INT(detector.bbox_jitter_px)},
      {"detector.bbox_pad_px", SCN_INT(detector.bbox_pad_px)},
      {"filter.q_scale", SCN_DOUBLE(filter.q_scale)},
      {"filter.r_diag", SCN_VEC3(filter.r_diag)},
      {"filter.p0_pos", SCN_DOUBLE(filter.p0_pos)},
      {"filter.p0_vel", SCN_DOUBLE(filter.p0_vel)},
      {"filter.stale_timeout", SCN_DOUBLE(filter.stale_timeout)},
      {"reacquisition.alpha_roi", SCN_DOUBLE(reacquisition.alpha_roi)},
      {"reacquisition.sigma_z_floor", SCN_DOUBLE(reacquisition.sigma_z_floor)},
      {"reacquisition.min_axis_px", SCN_DOUBLE(reacquisition.min_axis_px)},
      {"reacquisition.max_axis_px", SCN_DOUBLE(reacquisition.max_axis_px)},
      {"reacquisition.min_blob_px", SCN_INT(reacquisition.min_blob_px)},
      {"reacquisition.require_fully_inside",
       {[](ScenarioConfig& c, const std::string& v) { c.reacquisition.require_fully_inside = parse_bool(v); },
        [](const ScenarioConfig& c) { return std::string(c.reacquisition.require_fully_inside ? "true" : "false"); }}},
  };
  return fields;
}

#undef SCN_DOUBLE
#undef SCN_INT
#undef SCN_VEC3

const Field* find_field(const std::string& key) {
  for (const auto& [name, field] : schema()) {
    if (name == key) {
      return &field;
    }
  }
  return nullptr;
}

ScenarioConfig common_defaults() {
  ScenarioConfig c;
  c.camera.fx = 385.0;
  c.camera.fy = 385.0;
  c.camera.cx = 320.0;
  c.camera.cy = 240.0;
  c.camera.width = 640;
  c.camera.height = 480;
  c.noise.depth_sigma_rel = 0.01;
  c.noise.frame_sigma_rel = 0.02;
  c.noise.dropout_invalid_frac = 0.01;
  c.detector.detect_prob = 0.5;
  c.detector.burst_period = 10.0;
  c.detector.burst_duration = 2.0;
  c.detector.bbox_jitter_px = 3;
  c.detector.bbox_pad_px = 2;
  c.filter.q_scale = 50.0;
  return c;
}

ScenarioConfig static_geometry(const std::string& name, double standoff) {
  ScenarioConfig c = common_defaults();
  c.name = name;
  c.trajectory.kind = TrajectoryKind::StaticHover;
  c.trajectory.altitude = 10.0;
  c.rig = {Vec3(-standoff, 0.0, 10.0), Vec3(0.0, 0.0, 10.0), Vec3::UnitZ()};
  c.apply_rig();
  return c;
}

// Observer under the centre of the orbit looking up, placed so every point
// of the 5 m orbit is 5.4 m away; needs a wide-angle lens to keep the whole
// orbit in view.
ScenarioConfig orbit_geometry(const std::string& name, TrajectoryKind kind) {
  ScenarioConfig c = common_defaults();
  c.name = name;
  c.trajectory.kind = kind;
  c.trajectory.radius = 5.0;
  c.trajectory.speed = 5.0;
  c.trajectory.altitude = 10.0;
  c.camera.fx = 80.0;
  c.camera.fy = 80.0;
  c.rig = {Vec3(0.0, 0.0, 7.96), Vec3(0.0, 0.0, 10.0), Vec3::UnitX()};
  c.apply_rig();
  return c;
}

}  // namespace

ScenarioConfig parse_scenario(std::istream& in, const std::string& source) {
  ScenarioConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, where + "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Field* field = find_field(key);
    if (!field) {
      throw Error(ErrorCode::ConfigError, where + "unknown key '" + key + "'");
    }
    try {
      field->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw Error(ErrorCode::ConfigError, where + key + ": " + e.what());
    }
  }
  try {
    cfg.apply_rig();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, source + ": camera.position/look_at/up: " + e.what());
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open scenario file " + path);
  }
  return parse_scenario(in, path);
}

std::string format_scenario(const ScenarioConfig& cfg) {
  std::ostringstream out;
  for (const auto& [key, field] : schema()) {
    out << key << " = " << field.get(cfg) << '\n';
  }
  return out.str();
}

std::vector<std::string> builtin_scenario_names() { return {"static", "static_far", "circle", "fig8"}; }

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "static") return static_geometry(name, 4.2);
  if (name == "static_far") return static_geometry(name, 15.0);
  if (name == "circle") return orbit_geometry(name, TrajectoryKind::Circle);
  if (name == "fig8") return orbit_geometry(name, TrajectoryKind::FigureEight);
  throw Error(ErrorCode::ConfigError, "unknown built-in scenario '" + name + "'");
}

ScenarioConfig resolve_scenario(const std::string& spec) {
  if (std::filesystem::is_regular_file(spec)) {
    return load_scenario(spec);
  }
  std::string name = spec;
  if (name.size() > 4 && name.ends_with(".scn")) {
    name.resize(name.size() - 4);
  }
  const std::string base = std::filesystem::path(name).filename().string();
  const auto names = builtin_scenario_names();
  if (std::find(names.begin(), names.end(), base) == names.end()) {
    throw Error(ErrorCode::ConfigError, "'" + spec + "' is neither a scenario file nor a built-in scenario");
  }
  return builtin_scenario(base);
}

}  // namespace smart_track
