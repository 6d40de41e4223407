#pragma once

#include "smart_track/depth_image.hpp"
#include "smart_track/geometry.hpp"
#include "smart_track/kalman.hpp"

namespace smart_track {

/// Inclusive integer pixel box.
struct BoundingBox {
  int u_min = 0;
  int v_min = 0;
  int u_max = 0;
  int v_max = 0;

  int width() const { return u_max - u_min + 1; }
  int height() const { return v_max - v_min + 1; }

  /// Throws InvalidArgument unless 0 <= min <= max < size on both axes.
  void validate(int image_width, int image_height) const;

  bool operator==(const BoundingBox&) const = default;
};

PixelPoint bbox_center(const BoundingBox& box);

/// The centred sub-window holding the middle half of the box area
/// (each side scaled by 1/sqrt(2), at least one pixel).
BoundingBox bbox_core(const BoundingBox& box);

/// Mean of valid depths inside bbox_core(box); falls back to the whole box
/// when the core has no valid pixel. Throws NoValidDepth if both are empty.
double bbox_depth(const DepthImage& img, const BoundingBox& box);

/// Detector box + depth frame -> map-frame position measurement.
PositionMeasurement localize(const DepthImage& img, const BoundingBox& box, const CameraModel& cam);

}  // namespace smart_track
