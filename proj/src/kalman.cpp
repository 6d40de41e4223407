#include "smart_track/kalman.hpp"

#include "smart_track/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace smart_track {

namespace {

constexpr double kMaxInnovationCondition = 1e12;

void require_positive_dt(double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::NonPositiveDt, "dt must be positive, got " + std::to_string(dt));
  }
}

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorCode::ConfigError, std::string(field) + " must be a positive finite number");
  }
}

}  // namespace

void FilterConfig::validate() const {
  require_positive(q_scale, "filter.q_scale");
  require_positive(r_diag.x(), "filter.r_diag[0]");
  require_positive(r_diag.y(), "filter.r_diag[1]");
  require_positive(r_diag.z(), "filter.r_diag[2]");
  require_positive(p0_pos, "filter.p0_pos");
  require_positive(p0_vel, "filter.p0_vel");
  require_positive(predict_rate, "filter.predict_rate");
  require_positive(stale_timeout, "filter.stale_timeout");
}

Mat3x6 measurement_matrix() {
  Mat3x6 h = Mat3x6::Zero();
  h.leftCols<3>().setIdentity();
  return h;
}

Mat6 make_transition(double dt) {
  require_positive_dt(dt);
  Mat6 f = Mat6::Identity();
  f.topRightCorner<3, 3>() = dt * Mat3::Identity();
  return f;
}

Mat6 make_process_noise(double dt, double q_scale) {
  require_positive_dt(dt);
  const double pp = q_scale * dt * dt * dt / 3.0;
  const double pv = q_scale * dt * dt / 2.0;
  const double vv = q_scale * dt;
  Mat6 q = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    q(i, i) = pp;
    q(i, i + 3) = pv;
    q(i + 3, i) = pv;
    q(i + 3, i + 3) = vv;
  }
  return q;
}

StateEstimate predict(const StateEstimate& s, double dt, const FilterConfig& cfg) {
  const Mat6 f = make_transition(dt);
  StateEstimate out;
  out.mean = f * s.mean;
  const Mat6 cov = f * s.cov * f.transpose() + make_process_noise(dt, cfg.q_scale);
  out.cov = 0.5 * (cov + cov.transpose());
  out.stamp = s.stamp + dt;
  return out;
}

StateEstimate update(const StateEstimate& s, const PositionMeasurement& m, const FilterConfig& cfg) {
  const Mat3x6 h = measurement_matrix();
  const Mat3 innovation_cov = h * s.cov * h.transpose() + Mat3(cfg.r_diag.asDiagonal());

  const Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (innovation_cov + innovation_cov.transpose()));
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxInnovationCondition) {
    throw Error(ErrorCode::SingularInnovation, "innovation covariance is not invertible");
  }

  // K = P H^T S^-1, computed as (S^-1 H P)^T since S and P are symmetric.
  const Eigen::Matrix<double, 6, 3> gain =
      innovation_cov.ldlt().solve(h * s.cov).transpose();

  StateEstimate out;
  out.mean = s.mean + gain * (m.z - h * s.mean);
  const Mat6 cov = (Mat6::Identity() - gain * h) * s.cov;
  out.cov = 0.5 * (cov + cov.transpose());
  out.stamp = s.stamp;
  return out;
}

StateEstimate initialize(const PositionMeasurement& z0, const FilterConfig& cfg) {
  StateEstimate s;
  s.mean << z0.z, Vec3::Zero();
  s.cov = Mat6::Zero();
  s.cov.diagonal() << Vec3::Constant(cfg.p0_pos), Vec3::Constant(cfg.p0_vel);
  s.stamp = z0.stamp;
  return s;
}

Track::Track(FilterConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const StateEstimate& Track::state() const {
  if (!state_) {
    throw Error(ErrorCode::InvalidArgument, "track is not initialized");
  }
  return *state_;
}

bool Track::is_fresh(double t) const {
  return state_.has_value() && last_meas_.has_value() && (t - *last_meas_) <= cfg_.stale_timeout;
}

void Track::advance_to(double t) {
  if (!state_ || !(t > state_->stamp)) {
    return;
  }
  const double span = t - state_->stamp;
  const int steps = std::max(1, static_cast<int>(std::ceil(span * cfg_.predict_rate - 1e-9)));
  const double dt = span / steps;
  for (int i = 0; i < steps; ++i) {
    state_ = predict(*state_, dt, cfg_);
  }
  state_->stamp = t;
}

bool Track::correct(const PositionMeasurement& m) {
  const bool primary = m.source == MeasurementSource::PrimaryDetector;
  if (!state_ || (primary && !is_fresh(m.stamp))) {
    if (!primary) {
      return false;
    }
    state_ = initialize(m, cfg_);
  } else {
    advance_to(m.stamp);
    state_ = update(*state_, m, cfg_);
  }
  last_meas_ = m.stamp;
  return true;
}

}  // namespace smart_track
