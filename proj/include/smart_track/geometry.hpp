#pragma once

#include <Eigen/Dense>

#include <utility>

namespace smart_track {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat2x3 = Eigen::Matrix<double, 2, 3>;

/// Proper rigid motion p -> R p + t. Maps points from a source frame into a
/// target frame (e.g. camera -> map).
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  /// Throws InvalidArgument unless `rotation` is orthonormal with det +1
  /// (tolerance 1e-9) and both arguments are finite.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation about +z by `angle` radians.
  static RigidTransform from_yaw(double angle, const Vec3& t = Vec3::Zero());

  /// Camera-to-map pose for a camera at `eye` whose optical axis points at
  /// `target`. Image u points along forward x up; image v points down.
  static RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;
  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole intrinsics plus the camera pose in the map frame. Pixel (u, v)
/// integer indices coincide with pixel coordinates, u right and v down.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  RigidTransform cam_to_map;

  /// Throws InvalidArgument when intrinsics violate fx,fy > 0 or the
  /// principal point lies outside [0,width) x [0,height).
  void validate() const;

  RigidTransform map_to_cam() const { return cam_to_map.inverse(); }
};

/// Points with camera z at or below this are treated as not observable.
inline constexpr double kMinCameraDepth = 1e-6;

Vec3 transform_point(const RigidTransform& transform, const Vec3& p);

/// R S R^T; the translation does not act on a covariance.
Mat3 transform_cov(const RigidTransform& transform, const Mat3& cov);

/// Throws BehindCamera if p_cam.z <= kMinCameraDepth.
PixelPoint project_point(const CameraModel& cam, const Vec3& p_cam);

/// Throws NonPositiveDepth if depth <= 0.
Vec3 back_project(const CameraModel& cam, const PixelPoint& px, double depth);

Mat2x3 projection_jacobian(const CameraModel& cam, const Vec3& p_cam);

/// First-order image-plane covariance J S J^T, symmetrized.
Mat2 project_cov(const CameraModel& cam, const Vec3& p_cam, const Mat3& cov_cam);

struct Eigen2 {
  Vec2 values;   // (major, minor), values[0] >= values[1]
  Vec2 major;    // unit eigenvector for values[0]
  Vec2 minor;    // unit eigenvector for values[1]
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix. Isotropic input
/// (|a-d| and |b| both below 1e-12) yields the axis-aligned basis.
Eigen2 eigen2(const Mat2& sym);

}  // namespace smart_track
