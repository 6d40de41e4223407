#pragma once

#include "smart_track/depth_image.hpp"
#include "smart_track/geometry.hpp"
#include "smart_track/kalman.hpp"
#include "smart_track/localization.hpp"
#include "smart_track/reacquisition.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace smart_track {

enum class TrajectoryKind { StaticHover, Circle, FigureEight };

/// Closed-form target motion. The horizontal path is centred on
/// (center.x, center.y); height is always `altitude` (center.z is unused).
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::StaticHover;
  Vec3 center = Vec3::Zero();
  double radius = 5.0;
  double speed = 5.0;
  double altitude = 10.0;
};

struct TruthState {
  Vec3 position;
  Vec3 velocity;
};

/// StaticHover holds still. Circle turns counter-clockwise at speed/radius
/// rad/s. FigureEight is the Lissajous path (r sin wt, r/2 sin 2wt), w = speed/radius.
TruthState truth_state(const Trajectory& traj, double t);

struct SensorNoise {
  double depth_sigma_rel = 0.0;       // per-pixel sigma = depth_sigma_rel * depth
  double frame_sigma_rel = 0.0;       // one relative range error shared by a whole frame
  double dropout_invalid_frac = 0.0;  // fraction of returns randomly invalidated
  double backplane_depth = 0.0;       // camera-z of a flat background; <= 0 disables
};

struct DetectorModel {
  double detect_prob = 1.0;
  double burst_period = 0.0;  // s; <= 0 disables outages
  double burst_duration = 0.0;
  int bbox_jitter_px = 0;
  int bbox_pad_px = 0;

  /// Outage windows are [k P, k P + D) for k >= 1; the first period is clean
  /// so a track can form.
  bool in_burst(double t) const;
};

/// Observer placement used to build CameraModel::cam_to_map.
struct CameraRig {
  Vec3 position = Vec3::Zero();
  Vec3 look_at = Vec3::UnitX();
  Vec3 up = Vec3::UnitZ();
};

struct ScenarioConfig {
  std::string name = "custom";
  Trajectory trajectory;
  SensorNoise noise;
  DetectorModel detector;
  CameraRig rig;
  CameraModel camera;  // intrinsics; cam_to_map is derived from `rig`
  double target_radius = 0.25;
  double duration = 120.0;
  double frame_rate = 20.0;
  double settle_time = 5.0;
  ReacquisitionConfig reacquisition;
  FilterConfig filter;  // filter.predict_rate is the KF sub-step rate
  std::uint64_t seed = 1;

  /// Rebuilds camera.cam_to_map from the rig.
  void apply_rig();

  /// Throws ConfigError listing every offending field.
  void validate() const;

  int frame_count() const;
  double frame_time(int frame_idx) const { return frame_idx / frame_rate; }
};

/// Counter-based random streams: each value depends only on
/// (seed, stream, a, b), so frames and pixels can be generated in any order.
namespace sim_random {
std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b);
}  // namespace sim_random

/// Front-surface z-depth of the target sphere along each pixel ray; pixels
/// missing the target are invalid (or hit the backplane when enabled). Noise
/// and dropout are deterministic in (seed, frame_idx, pixel).
DepthImage render_depth(const ScenarioConfig& cfg, const Vec3& target_pos, double t, int frame_idx);

/// Noise-free tight box of the pixels whose rays hit the target sphere.
std::optional<BoundingBox> silhouette_box(const CameraModel& cam, const Vec3& target_pos, double radius);

/// Simulated primary detector. Returns nothing during outages, on a failed
/// Bernoulli(detect_prob) draw, or when no valid target pixel is visible in
/// `img`; otherwise the padded, jittered silhouette box clamped to the image.
std::optional<BoundingBox> detect(const ScenarioConfig& cfg, const DepthImage& img, const Vec3& target_pos, double t,
                                  int frame_idx);

}  // namespace smart_track
