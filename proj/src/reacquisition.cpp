#include "smart_track/reacquisition.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <tuple>

namespace smart_track {

namespace {

struct PixelRange {
  int u0, u1, v0, v1;
  bool empty() const { return u0 > u1 || v0 > v1; }
};

// Axis-aligned pixel bounds of the ellipse, before clipping.
PixelRange ellipse_bounds(const SearchEllipse& e) {
  const double hu = std::hypot(e.l_u * e.e_u.x(), e.l_v * e.e_v.x());
  const double hv = std::hypot(e.l_u * e.e_u.y(), e.l_v * e.e_v.y());
  return {static_cast<int>(std::ceil(e.center.u - hu)), static_cast<int>(std::floor(e.center.u + hu)),
          static_cast<int>(std::ceil(e.center.v - hv)), static_cast<int>(std::floor(e.center.v + hv))};
}

PixelRange clip(PixelRange r, int width, int height) {
  return {std::max(r.u0, 0), std::min(r.u1, width - 1), std::max(r.v0, 0), std::min(r.v1, height - 1)};
}

bool covers_any_pixel(const SearchEllipse& e, int width, int height) {
  const PixelRange r = clip(ellipse_bounds(e), width, height);
  for (int v = r.v0; v <= r.v1; ++v) {
    for (int u = r.u0; u <= r.u1; ++u) {
      if (e.contains(u, v)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

bool SearchEllipse::contains(double u, double v) const {
  const Vec2 d(u - center.u, v - center.v);
  const double a = d.dot(e_u) / l_u;
  const double b = d.dot(e_v) / l_v;
  return a * a + b * b <= 1.0;
}

void ReacquisitionConfig::validate() const {
  if (!(alpha_roi > 0.0)) {
    throw Error(ErrorCode::ConfigError, "reacquisition.alpha_roi must be positive");
  }
  if (!(sigma_z_floor >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "reacquisition.sigma_z_floor must be non-negative");
  }
  if (!(min_axis_px > 0.0)) {
    throw Error(ErrorCode::ConfigError, "reacquisition.min_axis_px must be positive");
  }
  if (max_axis_px > 0.0 && max_axis_px < min_axis_px) {
    throw Error(ErrorCode::ConfigError, "reacquisition.max_axis_px must be >= min_axis_px");
  }
  if (min_blob_px < 1) {
    throw Error(ErrorCode::ConfigError, "reacquisition.min_blob_px must be at least 1");
  }
}

SearchEllipse build_search_ellipse(const StateEstimate& s, const CameraModel& cam, const ReacquisitionConfig& cfg) {
  cfg.validate();
  const RigidTransform map_to_cam = cam.map_to_cam();
  const Vec3 p_cam = transform_point(map_to_cam, s.position());
  const Mat3 cov_cam = transform_cov(map_to_cam, s.position_cov());

  SearchEllipse e;
  e.center = project_point(cam, p_cam);
  const Eigen2 eig = eigen2(project_cov(cam, p_cam, cov_cam));
  e.e_u = eig.major;
  e.e_v = eig.minor;
  e.raw_l_u = cfg.alpha_roi * std::sqrt(std::max(eig.values[0], 0.0));
  e.raw_l_v = cfg.alpha_roi * std::sqrt(std::max(eig.values[1], 0.0));

  const double max_axis = cfg.max_axis_px > 0.0 ? cfg.max_axis_px : 0.5 * std::min(cam.width, cam.height);
  e.l_u = std::clamp(e.raw_l_u, cfg.min_axis_px, max_axis);
  e.l_v = std::clamp(e.raw_l_v, cfg.min_axis_px, max_axis);
  e.depth_pred = p_cam.z();
  e.sigma_z = std::sqrt(std::max(cov_cam(2, 2), 0.0));

  if (cfg.require_fully_inside) {
    const double hu = std::hypot(e.l_u * e.e_u.x(), e.l_v * e.e_v.x());
    const double hv = std::hypot(e.l_u * e.e_u.y(), e.l_v * e.e_v.y());
    if (e.center.u - hu < 0.0 || e.center.u + hu > cam.width - 1 || e.center.v - hv < 0.0 ||
        e.center.v + hv > cam.height - 1) {
      throw Error(ErrorCode::OffImage, "search ellipse is not entirely inside the image");
    }
  } else if (!covers_any_pixel(e, cam.width, cam.height)) {
    throw Error(ErrorCode::OffImage, "search ellipse covers no image pixel");
  }
  return e;
}

std::vector<Pixel> ellipse_mask(const SearchEllipse& e, int width, int height) {
  std::vector<Pixel> mask;
  const PixelRange r = clip(ellipse_bounds(e), width, height);
  if (r.empty()) {
    return mask;
  }
  for (int v = r.v0; v <= r.v1; ++v) {
    for (int u = r.u0; u <= r.u1; ++u) {
      if (e.contains(u, v)) {
        mask.push_back({u, v});
      }
    }
  }
  return mask;
}

std::vector<GatedPixel> gate_depth(const DepthImage& img, const std::vector<Pixel>& mask, const SearchEllipse& e,
                                   double sigma_z_floor) {
  const double window = 3.0 * std::max(e.sigma_z, sigma_z_floor);
  std::vector<GatedPixel> out;
  for (const Pixel& p : mask) {
    if (!img.contains(p.u, p.v)) {
      continue;
    }
    const float d = img.at(p.u, p.v);
    if (DepthImage::is_valid(d) && std::abs(static_cast<double>(d) - e.depth_pred) <= window) {
      out.push_back({p.u, p.v, d});
    }
  }
  return out;
}

std::vector<ContourCandidate> extract_contours(const std::vector<GatedPixel>& valid, int min_blob_px) {
  std::vector<ContourCandidate> out;
  if (valid.empty()) {
    return out;
  }
  int u0 = valid.front().u, u1 = u0, v0 = valid.front().v, v1 = v0;
  for (const GatedPixel& p : valid) {
    u0 = std::min(u0, p.u);
    u1 = std::max(u1, p.u);
    v0 = std::min(v0, p.v);
    v1 = std::max(v1, p.v);
  }
  const int w = u1 - u0 + 1;
  const int h = v1 - v0 + 1;
  // Grid of indices into `valid` (+1), 0 meaning absent.
  std::vector<std::size_t> grid(static_cast<std::size_t>(w) * h, 0);
  auto cell = [&](int u, int v) -> std::size_t& { return grid[static_cast<std::size_t>(v - v0) * w + (u - u0)]; };

  std::vector<std::size_t> order(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    cell(valid[i].u, valid[i].v) = i + 1;
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(valid[a].v, valid[a].u) < std::tie(valid[b].v, valid[b].u);
  });

  std::vector<bool> seen(valid.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t seed : order) {
    if (seen[seed]) {
      continue;
    }
    std::vector<std::size_t> members;
    seen[seed] = true;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t idx = queue.front();
      queue.pop_front();
      members.push_back(idx);
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          const int u = valid[idx].u + du;
          const int v = valid[idx].v + dv;
          if ((du == 0 && dv == 0) || u < u0 || u > u1 || v < v0 || v > v1) {
            continue;
          }
          const std::size_t n = cell(u, v);
          if (n != 0 && !seen[n - 1]) {
            seen[n - 1] = true;
            queue.push_back(n - 1);
          }
        }
      }
    }
    if (static_cast<int>(members.size()) < min_blob_px) {
      continue;
    }
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(valid[a].v, valid[a].u) < std::tie(valid[b].v, valid[b].u);
    });
    ContourCandidate c;
    double su = 0.0, sv = 0.0, sd = 0.0;
    for (std::size_t idx : members) {
      c.pixels.push_back({valid[idx].u, valid[idx].v});
      su += valid[idx].u;
      sv += valid[idx].v;
      sd += valid[idx].depth;
    }
    const double n = static_cast<double>(members.size());
    c.centroid = {su / n, sv / n};
    c.mean_depth = sd / n;
    out.push_back(std::move(c));
  }
  return out;
}

const ContourCandidate& select_contour(const std::vector<ContourCandidate>& candidates, const PixelPoint& center) {
  if (candidates.empty()) {
    throw Error(ErrorCode::NoContour, "no contour inside the search region");
  }
  auto dist = [&](const ContourCandidate& c) { return std::hypot(c.centroid.u - center.u, c.centroid.v - center.v); };
  const ContourCandidate* best = &candidates.front();
  double best_dist = dist(*best);
  for (const ContourCandidate& c : candidates) {
    const double d = dist(c);
    bool better = d < best_dist;
    if (d == best_dist) {
      if (c.pixels.size() != best->pixels.size()) {
        better = c.pixels.size() > best->pixels.size();
      } else {
        better = std::tie(c.centroid.v, c.centroid.u) < std::tie(best->centroid.v, best->centroid.u);
      }
    }
    if (better) {
      best = &c;
      best_dist = d;
    }
  }
  return *best;
}

Reacquisition reacquire_detailed(const DepthImage& img, const StateEstimate& s, const CameraModel& cam,
                                 const ReacquisitionConfig& cfg) {
  if (img.width != cam.width || img.height != cam.height) {
    throw Error(ErrorCode::InvalidArgument, "depth image size does not match camera model");
  }
  Reacquisition out;
  out.ellipse = build_search_ellipse(s, cam, cfg);
  const std::vector<Pixel> mask = ellipse_mask(out.ellipse, img.width, img.height);
  const std::vector<GatedPixel> gated = gate_depth(img, mask, out.ellipse, cfg.sigma_z_floor);
  const std::vector<ContourCandidate> contours = extract_contours(gated, cfg.min_blob_px);
  out.contour = select_contour(contours, out.ellipse.center);

  const Vec3 z_cam = back_project(cam, out.contour.centroid, out.contour.mean_depth);
  out.measurement = {transform_point(cam.cam_to_map, z_cam), img.stamp, MeasurementSource::KfGuided};
  return out;
}

PositionMeasurement reacquire(const DepthImage& img, const StateEstimate& s, const CameraModel& cam,
                              const ReacquisitionConfig& cfg) {
  return reacquire_detailed(img, s, cam, cfg).measurement;
}

}  // namespace smart_track
