#pragma once

#include "smart_track/depth_image.hpp"
#include "smart_track/geometry.hpp"
#include "smart_track/kalman.hpp"

#include <vector>

namespace smart_track {

/// Image-plane search region derived from the projected KF belief.
struct SearchEllipse {
  PixelPoint center;
  double l_u = 0.0;  // major half-axis, px
  double l_v = 0.0;  // minor half-axis, px
  Vec2 e_u = Vec2::UnitX();
  Vec2 e_v = Vec2::UnitY();
  double depth_pred = 0.0;  // camera-frame z of the predicted mean, m
  double sigma_z = 0.0;     // sqrt of the camera-frame z variance, m

  /// Half-axes alpha*sqrt(lambda) before clamping.
  double raw_l_u = 0.0;
  double raw_l_v = 0.0;

  bool contains(double u, double v) const;
};

struct ReacquisitionConfig {
  double alpha_roi = 5.0;
  double sigma_z_floor = 0.05;  // m
  double min_axis_px = 4.0;
  /// Non-positive means 0.5 * min(width, height).
  double max_axis_px = 0.0;
  int min_blob_px = 3;
  /// Reject ellipses not entirely inside the image instead of clipping.
  bool require_fully_inside = false;

  void validate() const;
};

struct Pixel {
  int u = 0;
  int v = 0;
  bool operator==(const Pixel&) const = default;
};

struct GatedPixel {
  int u = 0;
  int v = 0;
  float depth = 0.0F;
};

struct ContourCandidate {
  std::vector<Pixel> pixels;
  PixelPoint centroid;
  double mean_depth = 0.0;
};

/// Throws BehindCamera when the predicted mean is not in front of the camera
/// and OffImage when the clipped ellipse covers no pixel (or, with
/// require_fully_inside, any part of it leaves the image).
SearchEllipse build_search_ellipse(const StateEstimate& s, const CameraModel& cam, const ReacquisitionConfig& cfg);

/// In-image integer pixels inside the ellipse, ordered by (v, u).
std::vector<Pixel> ellipse_mask(const SearchEllipse& e, int width, int height);

/// Mask pixels with a valid depth inside depth_pred +- 3 max(sigma_z, floor).
std::vector<GatedPixel> gate_depth(const DepthImage& img, const std::vector<Pixel>& mask, const SearchEllipse& e,
                                   double sigma_z_floor);

/// 8-connected components of the gated set, ordered by their first pixel in
/// (v, u) order. Components with fewer than `min_blob_px` pixels are dropped.
std::vector<ContourCandidate> extract_contours(const std::vector<GatedPixel>& valid, int min_blob_px);

/// Nearest centroid to `center`; ties go to the larger candidate, then to the
/// smaller (v, u) centroid. Throws NoContour on an empty list.
const ContourCandidate& select_contour(const std::vector<ContourCandidate>& candidates, const PixelPoint& center);

struct Reacquisition {
  SearchEllipse ellipse;
  ContourCandidate contour;
  PositionMeasurement measurement;
};

/// Full KF-guided search. Throws BehindCamera, OffImage or NoContour when no
/// measurement can be produced this frame.
Reacquisition reacquire_detailed(const DepthImage& img, const StateEstimate& s, const CameraModel& cam,
                                 const ReacquisitionConfig& cfg);

PositionMeasurement reacquire(const DepthImage& img, const StateEstimate& s, const CameraModel& cam,
                              const ReacquisitionConfig& cfg);

}  // namespace smart_track
