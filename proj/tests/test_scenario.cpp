#include "smart_track/error.hpp"
#include "smart_track/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace smart_track;

namespace {

ScenarioConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "test.scn");
}

std::string config_error(const std::string& text) {
  try {
    parse_text(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "expected ConfigError for:\n" << text;
  return {};
}

}  // namespace

TEST(Scenario, BuiltinsRoundTripThroughText) {
  for (const std::string& name : builtin_scenario_names()) {
    const ScenarioConfig cfg = builtin_scenario(name);
    EXPECT_NO_THROW(cfg.validate()) << name;
    const std::string text = format_scenario(cfg);
    const ScenarioConfig back = parse_text(text);
    EXPECT_EQ(format_scenario(back), text) << name;
    EXPECT_EQ(back.name, cfg.name);
    EXPECT_EQ(back.seed, cfg.seed);
    EXPECT_EQ(back.trajectory.kind, cfg.trajectory.kind);
    EXPECT_EQ(back.camera.cam_to_map.rotation(), cfg.camera.cam_to_map.rotation());
    EXPECT_EQ(back.camera.cam_to_map.translation(), cfg.camera.cam_to_map.translation());
    EXPECT_EQ(back.filter.r_diag, cfg.filter.r_diag);
    EXPECT_EQ(back.noise.frame_sigma_rel, cfg.noise.frame_sigma_rel);
  }
}

TEST(Scenario, OddValuesRoundTripExactly) {
  ScenarioConfig cfg = builtin_scenario("circle");
  cfg.target_radius = 0.1 + 0.2;
  cfg.filter.q_scale = 1.0 / 3.0;
  cfg.seed = 18446744073709551615ULL;
  cfg.reacquisition.require_fully_inside = true;
  cfg.trajectory.center = Vec3(1e-17, -2.5, 0.0);
  const ScenarioConfig back = parse_text(format_scenario(cfg));
  EXPECT_EQ(back.target_radius, cfg.target_radius);
  EXPECT_EQ(back.filter.q_scale, cfg.filter.q_scale);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_TRUE(back.reacquisition.require_fully_inside);
  EXPECT_EQ(back.trajectory.center, cfg.trajectory.center);
}

TEST(Scenario, CommentsBlankLinesAndLaterKeysWin) {
  const ScenarioConfig cfg = parse_text(
      format_scenario(builtin_scenario("static")) +
      "# comment\n"
      "\n"
      "name = tiny   # trailing comment\n"
      "duration = 3\n"
      "trajectory.kind = figure_eight\n"
      "camera.position = 1 2 3\n");
  EXPECT_EQ(cfg.name, "tiny");
  EXPECT_EQ(cfg.duration, 3.0);
  EXPECT_EQ(cfg.trajectory.kind, TrajectoryKind::FigureEight);
  EXPECT_EQ(cfg.rig.position, Vec3(1, 2, 3));
  EXPECT_EQ(cfg.frame_rate, builtin_scenario("static").frame_rate);
  EXPECT_EQ(cfg.target_radius, builtin_scenario("static").target_radius);
}

TEST(Scenario, ParsedConfigIsValidated) {
  const std::string msg = config_error("duration = 3\n");
  EXPECT_NE(msg.find("focal"), std::string::npos) << msg;
  const std::string base = format_scenario(builtin_scenario("circle"));
  EXPECT_NE(config_error(base + "detector.detect_prob = 2\n").find("detector.detect_prob"), std::string::npos);
}

TEST(Scenario, RejectsUnknownKeysAndBadValues) {
  EXPECT_NE(config_error("colour = red\n").find("test.scn:1"), std::string::npos);
  EXPECT_NE(config_error("# ok\nduration = fast\n").find("test.scn:2: duration"), std::string::npos);
  EXPECT_NE(config_error("camera.position = 1 2\n").find("camera.position"), std::string::npos);
  EXPECT_NE(config_error("trajectory.kind = spiral\n").find("trajectory.kind"), std::string::npos);
  EXPECT_NE(config_error("seed = -3\n").find("seed"), std::string::npos);
  EXPECT_NE(config_error("just words\n").find("key = value"), std::string::npos);
  EXPECT_NE(config_error("duration = 5 6\n").find("duration"), std::string::npos);
}

TEST(Scenario, ResolveByNameOrPath) {
  EXPECT_EQ(resolve_scenario("circle").name, "circle");
  EXPECT_EQ(resolve_scenario("fig8.scn").name, "fig8");
  try {
    resolve_scenario("no_such_thing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  const std::string path = std::string(SMART_TRACK_SCENARIO_DIR) + "/static_far.scn";
  EXPECT_EQ(resolve_scenario(path).name, "static_far");
}

TEST(Scenario, ShippedFilesMatchBuiltins) {
  for (const std::string& name : builtin_scenario_names()) {
    const std::string path = std::string(SMART_TRACK_SCENARIO_DIR) + "/" + name + ".scn";
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(format_scenario(load_scenario(path)), format_scenario(builtin_scenario(name))) << name;
  }
}

TEST(Scenario, BuiltinGeometry) {
  const ScenarioConfig st = builtin_scenario("static");
  const Vec3 target = truth_state(st.trajectory, 0.0).position;
  EXPECT_NEAR((st.camera.cam_to_map.translation() - target).norm(), 4.2, 1e-12);
  EXPECT_EQ(target.z(), 10.0);
  EXPECT_EQ(st.camera.width, 640);
  EXPECT_EQ(st.camera.height, 480);
  EXPECT_EQ(st.frame_rate, 20.0);
  EXPECT_EQ(st.filter.predict_rate, 100.0);

  const ScenarioConfig circle = builtin_scenario("circle");
  EXPECT_EQ(circle.trajectory.radius, 5.0);
  EXPECT_EQ(circle.trajectory.speed, 5.0);
  EXPECT_EQ(circle.duration, 120.0);
  EXPECT_EQ(circle.detector.detect_prob, 0.5);
  EXPECT_EQ(circle.detector.burst_period, 10.0);
  EXPECT_EQ(circle.detector.burst_duration, 2.0);
  for (double t : {0.0, 1.3, 4.4}) {
    const Vec3 p = truth_state(circle.trajectory, t).position;
    EXPECT_NEAR((circle.camera.cam_to_map.translation() - p).norm(), 5.4, 0.01);
  }
}

TEST(Scenario, LoadMissingFile) {
  try {
    load_scenario("/nonexistent/dir/x.scn");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}
