#include "smart_track/localization.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace smart_track {

void BoundingBox::validate(int image_width, int image_height) const {
  const bool ok = 0 <= u_min && u_min <= u_max && u_max < image_width &&
                  0 <= v_min && v_min <= v_max && v_max < image_height;
  if (!ok) {
    throw Error(ErrorCode::InvalidArgument, "bounding box outside image bounds");
  }
}

PixelPoint bbox_center(const BoundingBox& box) {
  return {0.5 * (box.u_min + box.u_max), 0.5 * (box.v_min + box.v_max)};
}

BoundingBox bbox_core(const BoundingBox& box) {
  const auto shrink = [](int lo, int extent) {
    const int core = std::max(1, static_cast<int>(std::lround(extent * std::sqrt(0.5))));
    const int start = lo + (extent - core) / 2;
    return std::pair{start, start + core - 1};
  };
  const auto [u0, u1] = shrink(box.u_min, box.width());
  const auto [v0, v1] = shrink(box.v_min, box.height());
  return {u0, v0, u1, v1};
}

namespace {

std::optional<double> mean_valid_depth(const DepthImage& img, const BoundingBox& box) {
  double sum = 0.0;
  std::size_t count = 0;
  for (int v = box.v_min; v <= box.v_max; ++v) {
    for (int u = box.u_min; u <= box.u_max; ++u) {
      const float d = img.at(u, v);
      if (DepthImage::is_valid(d)) {
        sum += d;
        ++count;
      }
    }
  }
  if (count == 0) {
    return std::nullopt;
  }
  return sum / static_cast<double>(count);
}

}  // namespace

double bbox_depth(const DepthImage& img, const BoundingBox& box) {
  box.validate(img.width, img.height);
  if (auto core = mean_valid_depth(img, bbox_core(box))) {
    return *core;
  }
  if (auto full = mean_valid_depth(img, box)) {
    return *full;
  }
  throw Error(ErrorCode::NoValidDepth, "no valid depth inside bounding box");
}

PositionMeasurement localize(const DepthImage& img, const BoundingBox& box, const CameraModel& cam) {
  if (img.width != cam.width || img.height != cam.height) {
    throw Error(ErrorCode::InvalidArgument, "depth image size does not match camera model");
  }
  const Vec3 p_cam = back_project(cam, bbox_center(box), bbox_depth(img, box));
  return {transform_point(cam.cam_to_map, p_cam), img.stamp, MeasurementSource::PrimaryDetector};
}

}  // namespace smart_track
