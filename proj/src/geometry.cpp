#include "smart_track/geometry.hpp"

#include "smart_track/error.hpp"

#include <cmath>

namespace smart_track {

namespace {

constexpr double kOrthonormalTol = 1e-9;
constexpr double kIsotropicTol = 1e-12;

}  // namespace

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "rigid transform has non-finite entries");
  }
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kOrthonormalTol || std::abs(rotation.determinant() - 1.0) > kOrthonormalTol) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not a proper orthonormal matrix");
  }
}

RigidTransform RigidTransform::from_yaw(double angle, const Vec3& t) {
  return {Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix(), t};
}

RigidTransform RigidTransform::look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = target - eye;
  if (forward.norm() < 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "look_at target coincides with eye");
  }
  const Vec3 z = forward.normalized();
  const Vec3 right = z.cross(up);
  if (right.norm() < 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "look_at up vector is parallel to the optical axis");
  }
  const Vec3 x = right.normalized();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return {r, eye};
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  RigidTransform out;
  out.rotation_ = rotation_ * rhs.rotation_;
  out.translation_ = rotation_ * rhs.translation_ + translation_;
  return out;
}

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

Vec3 transform_point(const RigidTransform& transform, const Vec3& p) { return transform * p; }

Mat3 transform_cov(const RigidTransform& transform, const Mat3& cov) {
  const Mat3& r = transform.rotation();
  const Mat3 out = r * cov * r.transpose();
  return 0.5 * (out + out.transpose());
}

PixelPoint project_point(const CameraModel& cam, const Vec3& p_cam) {
  if (!(p_cam.z() > kMinCameraDepth)) {
    throw Error(ErrorCode::BehindCamera, "point is not in front of the camera");
  }
  return {cam.fx * (p_cam.x() / p_cam.z()) + cam.cx, cam.fy * (p_cam.y() / p_cam.z()) + cam.cy};
}

Vec3 back_project(const CameraModel& cam, const PixelPoint& px, double depth) {
  if (!(depth > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "back-projection depth must be positive");
  }
  return depth * Vec3((px.u - cam.cx) / cam.fx, (px.v - cam.cy) / cam.fy, 1.0);
}

Mat2x3 projection_jacobian(const CameraModel& cam, const Vec3& p_cam) {
  if (!(p_cam.z() > kMinCameraDepth)) {
    throw Error(ErrorCode::BehindCamera, "point is not in front of the camera");
  }
  const double iz = 1.0 / p_cam.z();
  Mat2x3 j;
  j << cam.fx * iz, 0.0, -cam.fx * p_cam.x() * iz * iz,
       0.0, cam.fy * iz, -cam.fy * p_cam.y() * iz * iz;
  return j;
}

Mat2 project_cov(const CameraModel& cam, const Vec3& p_cam, const Mat3& cov_cam) {
  const Mat2x3 j = projection_jacobian(cam, p_cam);
  const Mat2 out = j * cov_cam * j.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen2 eigen2(const Mat2& sym) {
  const double a = sym(0, 0);
  const double b = 0.5 * (sym(0, 1) + sym(1, 0));
  const double d = sym(1, 1);
  const double mean = 0.5 * (a + d);
  const double half_diff = 0.5 * (a - d);
  const double radius = std::hypot(half_diff, b);

  Eigen2 out;
  out.values = Vec2(mean + radius, mean - radius);
  if (std::abs(a - d) < kIsotropicTol && std::abs(b) < kIsotropicTol) {
    out.major = Vec2::UnitX();
    out.minor = Vec2::UnitY();
    return out;
  }
  const double theta = 0.5 * std::atan2(2.0 * b, a - d);
  out.major = Vec2(std::cos(theta), std::sin(theta));
  out.minor = Vec2(-std::sin(theta), std::cos(theta));
  return out;
}

}  // namespace smart_track
