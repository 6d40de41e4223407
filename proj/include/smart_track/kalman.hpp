#pragma once

#include "smart_track/geometry.hpp"

#include <optional>

namespace smart_track {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat3x6 = Eigen::Matrix<double, 3, 6>;

/// Constant-velocity belief over [p_x, p_y, p_z, v_x, v_y, v_z] in the map frame.
struct StateEstimate {
  Vec6 mean = Vec6::Zero();
  Mat6 cov = Mat6::Identity();
  double stamp = 0.0;

  Vec3 position() const { return mean.head<3>(); }
  Vec3 velocity() const { return mean.tail<3>(); }
  Mat3 position_cov() const { return cov.topLeftCorner<3, 3>(); }
};

struct FilterConfig {
  double q_scale = 20.0;                   // white-acceleration intensity, m^2/s^3
  Vec3 r_diag = Vec3::Constant(0.01);      // measurement variances, m^2
  double p0_pos = 1.0;                     // m^2
  double p0_vel = 25.0;                    // m^2/s^2
  double predict_rate = 100.0;             // Hz
  double stale_timeout = 1.0;              // s without any measurement

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

enum class MeasurementSource { PrimaryDetector, KfGuided };

struct PositionMeasurement {
  Vec3 z = Vec3::Zero();
  double stamp = 0.0;
  MeasurementSource source = MeasurementSource::PrimaryDetector;
};

/// Position selector H = [I 0].
Mat3x6 measurement_matrix();

/// Throws NonPositiveDt if dt <= 0.
Mat6 make_transition(double dt);

/// Per-axis piecewise white-noise-acceleration blocks
/// q [[dt^3/3, dt^2/2], [dt^2/2, dt]] over (p_i, v_i).
Mat6 make_process_noise(double dt, double q_scale);

StateEstimate predict(const StateEstimate& s, double dt, const FilterConfig& cfg);

/// Standard gain/update with the (I - K H) P covariance form, symmetrized.
/// Throws SingularInnovation when H P H^T + R has condition number > 1e12.
StateEstimate update(const StateEstimate& s, const PositionMeasurement& m, const FilterConfig& cfg);

StateEstimate initialize(const PositionMeasurement& z0, const FilterConfig& cfg);

/// Single-target track: sub-stepped prediction at the configured rate, first
/// primary detection initializes, and a track with no accepted measurement
/// for `stale_timeout` seconds is re-initialized by the next primary one.
class Track {
 public:
  explicit Track(FilterConfig cfg);

  bool initialized() const { return state_.has_value(); }
  const StateEstimate& state() const;
  const FilterConfig& config() const { return cfg_; }

  /// True when initialized and the last accepted measurement is no older
  /// than the stale timeout at time `t`.
  bool is_fresh(double t) const;

  /// Predicts forward to `t` in equal sub-steps no longer than 1/predict_rate.
  /// No-op when uninitialized or when `t` is not ahead of the current stamp.
  void advance_to(double t);

  /// Advances to the measurement stamp and fuses it. Returns false when a
  /// KF-guided measurement arrives for an uninitialized track (ignored).
  bool correct(const PositionMeasurement& m);

  std::optional<double> last_measurement_stamp() const { return last_meas_; }

 private:
  FilterConfig cfg_;
  std::optional<StateEstimate> state_;
  std::optional<double> last_meas_;
};

}  // namespace smart_track
