#include "smart_track/depth_sim.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace smart_track {

namespace {

enum Stream : std::uint64_t {
  kDepthNoise = 1,
  kPixelDropout = 2,
  kDetectTrial = 3,
  kBoxJitter = 4,
  kFrameDepthError = 5,
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct PixelSpan {
  int lo, hi;
};

// Pixel range along one image axis covered by the sphere whose centre has
// lateral coordinate `x` and depth `z` in the camera frame. The extreme rays
// are the 2D tangents from the optical centre in the (x, z) plane.
PixelSpan sphere_span(double x, double z, double radius, double focal, double principal, int size) {
  const double dist = std::hypot(x, z);
  const PixelSpan full{0, size - 1};
  if (dist <= radius) {
    return full;
  }
  const double angle = std::atan2(x, z);
  const double half = std::asin(radius / dist);
  constexpr double kNearlyLateral = std::numbers::pi / 2.0 - 1e-6;
  if (angle - half <= -kNearlyLateral || angle + half >= kNearlyLateral) {
    return full;
  }
  const int lo = static_cast<int>(std::floor(focal * std::tan(angle - half) + principal)) - 1;
  const int hi = static_cast<int>(std::ceil(focal * std::tan(angle + half) + principal)) + 1;
  return {std::max(lo, 0), std::min(hi, size - 1)};
}

// Calls fn(u, v, z_depth) for every pixel whose ray hits the front of the sphere.
template <typename Fn>
void raster_sphere(const CameraModel& cam, const Vec3& center_cam, double radius, Fn&& fn) {
  if (center_cam.z() + radius <= 0.0) {
    return;
  }
  const PixelSpan us = sphere_span(center_cam.x(), center_cam.z(), radius, cam.fx, cam.cx, cam.width);
  const PixelSpan vs = sphere_span(center_cam.y(), center_cam.z(), radius, cam.fy, cam.cy, cam.height);
  const double c2 = center_cam.squaredNorm() - radius * radius;
  for (int v = vs.lo; v <= vs.hi; ++v) {
    const double dy = (v - cam.cy) / cam.fy;
    for (int u = us.lo; u <= us.hi; ++u) {
      const double dx = (u - cam.cx) / cam.fx;
      const double a = dx * dx + dy * dy + 1.0;
      const double b = dx * center_cam.x() + dy * center_cam.y() + center_cam.z();
      const double disc = b * b - a * c2;
      if (disc < 0.0) {
        continue;
      }
      // Ray direction has unit z, so the ray parameter is the z-depth.
      const double depth = (b - std::sqrt(disc)) / a;
      if (depth > 0.0) {
        fn(u, v, depth);
      }
    }
  }
}

int jitter(std::uint64_t seed, int frame_idx, int edge, int half_width) {
  if (half_width <= 0) {
    return 0;
  }
  const double r = sim_random::uniform(seed, kBoxJitter, static_cast<std::uint64_t>(frame_idx), edge);
  const int span = 2 * half_width + 1;
  return std::min(static_cast<int>(r * span), span - 1) - half_width;
}

}  // namespace

namespace sim_random {

std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ stream);
  h = splitmix(h ^ a);
  return splitmix(h ^ b);
}

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h1 = hash(seed, stream, a, b);
  const std::uint64_t h2 = splitmix(h1);
  // (0, 1] so the log is finite.
  const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sim_random

TruthState truth_state(const Trajectory& traj, double t) {
  const Vec3 base(traj.center.x(), traj.center.y(), traj.altitude);
  switch (traj.kind) {
    case TrajectoryKind::StaticHover:
      return {base, Vec3::Zero()};
    case TrajectoryKind::Circle: {
      const double w = traj.speed / traj.radius;
      const double c = std::cos(w * t);
      const double s = std::sin(w * t);
      return {base + Vec3(traj.radius * c, traj.radius * s, 0.0), Vec3(-traj.speed * s, traj.speed * c, 0.0)};
    }
    case TrajectoryKind::FigureEight: {
      const double w = traj.speed / traj.radius;
      const double r = traj.radius;
      return {base + Vec3(r * std::sin(w * t), 0.5 * r * std::sin(2.0 * w * t), 0.0),
              Vec3(r * w * std::cos(w * t), r * w * std::cos(2.0 * w * t), 0.0)};
    }
  }
  return {base, Vec3::Zero()};
}

bool DetectorModel::in_burst(double t) const {
  if (!(burst_period > 0.0) || !(burst_duration > 0.0) || t < burst_period) {
    return false;
  }
  return std::fmod(t, burst_period) < burst_duration;
}

void ScenarioConfig::apply_rig() { camera.cam_to_map = RigidTransform::look_at(rig.position, rig.look_at, rig.up); }

int ScenarioConfig::frame_count() const { return static_cast<int>(std::ceil(duration * frame_rate - 1e-9)); }

void ScenarioConfig::validate() const {
  std::vector<std::string> problems;
  const auto check = [&](bool ok, const char* field, const char* rule) {
    if (!ok) {
      problems.push_back(std::string(field) + " " + rule);
    }
  };
  const bool moving = trajectory.kind != TrajectoryKind::StaticHover;
  check(!moving || trajectory.radius > 0.0, "trajectory.radius", "must be > 0 for moving trajectories");
  check(!moving || trajectory.speed > 0.0, "trajectory.speed", "must be > 0 for moving trajectories");
  check(noise.depth_sigma_rel >= 0.0, "noise.depth_sigma_rel", "must be >= 0");
  check(noise.frame_sigma_rel >= 0.0, "noise.frame_sigma_rel", "must be >= 0");
  check(noise.dropout_invalid_frac >= 0.0 && noise.dropout_invalid_frac < 1.0, "noise.dropout_invalid_frac",
        "must be in [0, 1)");
  check(detector.detect_prob >= 0.0 && detector.detect_prob <= 1.0, "detector.detect_prob", "must be in [0, 1]");
  check(detector.burst_duration >= 0.0, "detector.burst_duration", "must be >= 0");
  check(detector.burst_period <= 0.0 || detector.burst_duration < detector.burst_period, "detector.burst_duration",
        "must be shorter than detector.burst_period");
  check(detector.bbox_jitter_px >= 0, "detector.bbox_jitter_px", "must be >= 0");
  check(detector.bbox_pad_px >= 0, "detector.bbox_pad_px", "must be >= 0");
  check(target_radius > 0.0, "target_radius", "must be > 0");
  check(duration > 0.0, "duration", "must be > 0");
  check(frame_rate > 0.0, "frame_rate", "must be > 0");
  check(frame_rate <= filter.predict_rate, "frame_rate", "must not exceed predict_rate");
  check(settle_time >= 0.0, "settle_time", "must be >= 0");
  const auto absorb = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      problems.emplace_back(e.what());
    }
  };
  absorb([&] { camera.validate(); });
  absorb([&] { RigidTransform::look_at(rig.position, rig.look_at, rig.up); });
  absorb([&] { filter.validate(); });
  absorb([&] { reacquisition.validate(); });
  if (!problems.empty()) {
    std::ostringstream msg;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      msg << (i ? "; " : "") << problems[i];
    }
    throw Error(ErrorCode::ConfigError, msg.str());
  }
}

DepthImage render_depth(const ScenarioConfig& cfg, const Vec3& target_pos, double t, int frame_idx) {
  const CameraModel& cam = cfg.camera;
  const bool backplane = cfg.noise.backplane_depth > 0.0;
  DepthImage img(cam.width, cam.height, t,
                 backplane ? static_cast<float>(cfg.noise.backplane_depth) : DepthImage::kInvalid);

  // Region that may hold valid returns; the whole frame once a backplane exists.
  int u0 = backplane ? 0 : cam.width, u1 = backplane ? cam.width - 1 : -1;
  int v0 = backplane ? 0 : cam.height, v1 = backplane ? cam.height - 1 : -1;
  const Vec3 center_cam = transform_point(cam.map_to_cam(), target_pos);
  raster_sphere(cam, center_cam, cfg.target_radius, [&](int u, int v, double depth) {
    if (!backplane || depth < cfg.noise.backplane_depth) {
      img.at(u, v) = static_cast<float>(depth);
      u0 = std::min(u0, u);
      u1 = std::max(u1, u);
      v0 = std::min(v0, v);
      v1 = std::max(v1, v);
    }
  });

  const double sigma = cfg.noise.depth_sigma_rel;
  const double drop = cfg.noise.dropout_invalid_frac;
  const auto frame = static_cast<std::uint64_t>(frame_idx);
  const double frame_scale =
      cfg.noise.frame_sigma_rel > 0.0
          ? 1.0 + cfg.noise.frame_sigma_rel * sim_random::normal(cfg.seed, kFrameDepthError, frame, 0)
          : 1.0;
  if (sigma <= 0.0 && drop <= 0.0 && frame_scale == 1.0) {
    return img;
  }
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      float& d = img.at(u, v);
      if (!DepthImage::is_valid(d)) {
        continue;
      }
      const std::uint64_t pixel = static_cast<std::uint64_t>(v) * cam.width + u;
      if (drop > 0.0 && sim_random::uniform(cfg.seed, kPixelDropout, frame, pixel) < drop) {
        d = DepthImage::kInvalid;
        continue;
      }
      double noisy = d * frame_scale;
      if (sigma > 0.0) {
        noisy *= 1.0 + sigma * sim_random::normal(cfg.seed, kDepthNoise, frame, pixel);
      }
      d = noisy > 0.0 ? static_cast<float>(noisy) : DepthImage::kInvalid;
    }
  }
  return img;
}

std::optional<BoundingBox> silhouette_box(const CameraModel& cam, const Vec3& target_pos, double radius) {
  std::optional<BoundingBox> box;
  raster_sphere(cam, transform_point(cam.map_to_cam(), target_pos), radius, [&](int u, int v, double) {
    if (!box) {
      box = BoundingBox{u, v, u, v};
      return;
    }
    box->u_min = std::min(box->u_min, u);
    box->u_max = std::max(box->u_max, u);
    box->v_min = std::min(box->v_min, v);
    box->v_max = std::max(box->v_max, v);
  });
  return box;
}

std::optional<BoundingBox> detect(const ScenarioConfig& cfg, const DepthImage& img, const Vec3& target_pos, double t,
                                  int frame_idx) {
  const DetectorModel& det = cfg.detector;
  if (det.in_burst(t)) {
    return std::nullopt;
  }
  if (!(sim_random::uniform(cfg.seed, kDetectTrial, static_cast<std::uint64_t>(frame_idx), 0) < det.detect_prob)) {
    return std::nullopt;
  }
  const std::optional<BoundingBox> truth = silhouette_box(cfg.camera, target_pos, cfg.target_radius);
  if (!truth) {
    return std::nullopt;
  }
  bool visible = false;
  for (int v = truth->v_min; v <= truth->v_max && !visible; ++v) {
    for (int u = truth->u_min; u <= truth->u_max && !visible; ++u) {
      visible = DepthImage::is_valid(img.at(u, v));
    }
  }
  if (!visible) {
    return std::nullopt;
  }

  const int pad = det.bbox_pad_px;
  const int j = det.bbox_jitter_px;
  const int w = img.width - 1;
  const int h = img.height - 1;
  BoundingBox box{
      std::clamp(truth->u_min - pad + jitter(cfg.seed, frame_idx, 0, j), 0, w),
      std::clamp(truth->v_min - pad + jitter(cfg.seed, frame_idx, 1, j), 0, h),
      std::clamp(truth->u_max + pad + jitter(cfg.seed, frame_idx, 2, j), 0, w),
      std::clamp(truth->v_max + pad + jitter(cfg.seed, frame_idx, 3, j), 0, h),
  };
  box.u_max = std::max(box.u_max, box.u_min);
  box.v_max = std::max(box.v_max, box.v_min);
  return box;
}

}  // namespace smart_track
