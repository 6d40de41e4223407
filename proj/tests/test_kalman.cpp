#include "smart_track/error.hpp"
#include "smart_track/kalman.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace smart_track;
using smart_track::testing::min_eigenvalue;
using smart_track::testing::random_psd;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Io;
}

FilterConfig no_process_noise() {
  FilterConfig cfg;
  cfg.q_scale = 0.0;
  return cfg;
}

// Textbook Joseph-stabilized update, written independently of update().
Mat6 joseph_cov(const Mat6& p, const Mat3& r) {
  const Mat3x6 h = measurement_matrix();
  const Mat3 s = h * p * h.transpose() + r;
  const Eigen::Matrix<double, 6, 3> k = p * h.transpose() * s.inverse();
  const Mat6 a = Mat6::Identity() - k * h;
  return a * p * a.transpose() + k * r * k.transpose();
}

StateEstimate random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 3.0);
  StateEstimate s;
  for (int i = 0; i < 6; ++i) {
    s.mean[i] = n(rng);
  }
  s.cov = random_psd<6>(rng, 0.7) + 1e-3 * Mat6::Identity();
  return s;
}

}  // namespace

TEST(MakeTransition, UnitStepLayout) {
  const Mat6 f = make_transition(1.0);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      const bool coupling = c == r + 3;
      EXPECT_EQ(f(r, c), (r == c || coupling) ? 1.0 : 0.0) << r << "," << c;
    }
  }
}

TEST(MakeTransition, CouplingAndVelocityAdvance) {
  const Mat6 f = make_transition(0.01);
  EXPECT_EQ(f(0, 3), 0.01);
  EXPECT_EQ(f(1, 4), 0.01);
  EXPECT_EQ(f(2, 5), 0.01);
  Vec6 x = Vec6::Zero();
  x[3] = 1.0;
  Vec6 expected = Vec6::Zero();
  expected[0] = 0.5;
  expected[3] = 1.0;
  EXPECT_EQ(make_transition(0.5) * x, expected);
  EXPECT_EQ(code_of([] { make_transition(0.0); }), ErrorCode::NonPositiveDt);
  EXPECT_EQ(code_of([] { make_transition(-1.0); }), ErrorCode::NonPositiveDt);
}

TEST(MakeProcessNoise, ClosedFormAtUnitStep) {
  const Mat6 q = make_process_noise(1.0, 1.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(q(i, i), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(q(i, i + 3), 0.5, 1e-15);
    EXPECT_NEAR(q(i + 3, i), 0.5, 1e-15);
    EXPECT_NEAR(q(i + 3, i + 3), 1.0, 1e-15);
  }
  EXPECT_EQ(q(0, 1), 0.0);
  EXPECT_EQ(q(0, 4), 0.0);
  EXPECT_EQ(q(3, 5), 0.0);
}

TEST(MakeProcessNoise, ZeroScaleAndPsd) {
  EXPECT_TRUE(make_process_noise(0.3, 0.0).isZero());
  for (double dt : {1e-4, 0.01, 0.05, 1.0, 10.0}) {
    const Mat6 q = make_process_noise(dt, 7.0);
    EXPECT_EQ(q, q.transpose());
    EXPECT_GE(min_eigenvalue(q), -1e-12);
  }
  EXPECT_EQ(code_of([] { make_process_noise(0.0, 1.0); }), ErrorCode::NonPositiveDt);
}

TEST(Predict, StationaryAndLinearMotion) {
  StateEstimate s;
  s.mean << 1, 2, 3, 0, 0, 0;
  const StateEstimate still = predict(s, 0.7, no_process_noise());
  EXPECT_EQ(still.mean, s.mean);
  EXPECT_DOUBLE_EQ(still.stamp, 0.7);

  s.mean << 0, 0, 0, 1, 2, 3;
  const StateEstimate moved = predict(s, 2.0, no_process_noise());
  EXPECT_EQ(moved.position(), Vec3(2, 4, 6));
  EXPECT_EQ(code_of([&] { predict(s, 0.0, no_process_noise()); }), ErrorCode::NonPositiveDt);
}

TEST(Predict, TraceStrictlyIncreasesWithProcessNoise) {
  // tr(F P F^T) - tr(P) = 2 dt tr(P_pv) + dt^2 tr(P_vv), so growth is
  // guaranteed whenever the position-velocity cross term is not negative:
  // block-diagonal beliefs and every belief the filter itself produces.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 3.0);
  FilterConfig cfg;
  cfg.q_scale = 0.5;
  for (int i = 0; i < 500; ++i) {
    StateEstimate s = random_state(rng);
    s.cov.topRightCorner<3, 3>().setZero();
    s.cov.bottomLeftCorner<3, 3>().setZero();
    EXPECT_GT(predict(s, 0.01, cfg).cov.trace(), s.cov.trace());
  }
  StateEstimate s = initialize({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector}, cfg);
  for (int i = 0; i < 2000; ++i) {
    const StateEstimate next = predict(s, 0.01, cfg);
    ASSERT_GT(next.cov.trace(), s.cov.trace()) << "step " << i;
    s = i % 3 == 0 ? update(next, {Vec3(n(rng), n(rng), n(rng)), next.stamp, MeasurementSource::PrimaryDetector}, cfg)
                   : next;
  }
}

TEST(Predict, TraceCanShrinkWithNegativeCrossCovariance) {
  // Counterexample for arbitrary PSD input: position and velocity strongly
  // anti-correlated, so the prediction pulls the position variance in.
  StateEstimate s;
  s.cov = Mat6::Identity();
  for (int i = 0; i < 3; ++i) {
    s.cov(i, i + 3) = s.cov(i + 3, i) = -0.9;
  }
  FilterConfig cfg;
  cfg.q_scale = 0.5;
  ASSERT_GE(min_eigenvalue(s.cov), 0.0);
  EXPECT_LT(predict(s, 0.01, cfg).cov.trace(), s.cov.trace());
}

TEST(Predict, LinearInTheMean) {
  std::mt19937_64 rng(22);
  const FilterConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const StateEstimate a = random_state(rng);
    const StateEstimate b = random_state(rng);
    StateEstimate mix = a;
    mix.mean = 2.5 * a.mean - 0.75 * b.mean;
    const Vec6 lhs = predict(mix, 0.05, cfg).mean;
    const Vec6 rhs = 2.5 * predict(a, 0.05, cfg).mean - 0.75 * predict(b, 0.05, cfg).mean;
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Initialize, UsesMeasurementAndConfiguredVariances) {
  FilterConfig cfg;
  cfg.p0_pos = 2.0;
  cfg.p0_vel = 9.0;
  const StateEstimate s = initialize({Vec3(1, 2, 3), 4.5, MeasurementSource::PrimaryDetector}, cfg);
  Vec6 expected_mean;
  expected_mean << 1, 2, 3, 0, 0, 0;
  EXPECT_EQ(s.mean, expected_mean);
  Vec6 diag;
  diag << 2, 2, 2, 9, 9, 9;
  EXPECT_EQ(s.cov, Mat6(diag.asDiagonal()));
  EXPECT_EQ(s.stamp, 4.5);
}

TEST(Update, PerfectMeasurementLimit) {
  FilterConfig cfg;
  cfg.r_diag = Vec3::Constant(1e-12);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const StateEstimate s = random_state(rng);
    const Vec3 z(4.0, -1.0, 7.5);
    const StateEstimate post = update(s, {z, s.stamp, MeasurementSource::PrimaryDetector}, cfg);
    EXPECT_LT((post.position() - z).norm(), 1e-5);
  }
}

TEST(Update, ZeroInnovationKeepsPosition) {
  std::mt19937_64 rng(24);
  const FilterConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const StateEstimate s = random_state(rng);
    const StateEstimate post = update(s, {s.position(), s.stamp, MeasurementSource::KfGuided}, cfg);
    EXPECT_LT((post.position() - s.position()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Update, PositionTraceNeverGrows) {
  std::mt19937_64 rng(25);
  std::normal_distribution<double> n(0.0, 2.0);
  FilterConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    cfg.r_diag = Vec3(0.01 + std::abs(n(rng)), 0.01 + std::abs(n(rng)), 0.01 + std::abs(n(rng)));
    const StateEstimate s = random_state(rng);
    const StateEstimate post = update(s, {Vec3(n(rng), n(rng), n(rng)), 0.0, MeasurementSource::PrimaryDetector}, cfg);
    EXPECT_LE(post.position_cov().trace(), s.position_cov().trace() + 1e-9);
  }
}

TEST(Update, MatchesJosephForm) {
  std::mt19937_64 rng(26);
  std::uniform_real_distribution<double> rv(1e-3, 2.0);
  FilterConfig cfg;
  for (int i = 0; i < 2000; ++i) {
    cfg.r_diag = Vec3(rv(rng), rv(rng), rv(rng));
    const StateEstimate s = random_state(rng);
    const StateEstimate post = update(s, {Vec3(1, 2, 3), 0.0, MeasurementSource::PrimaryDetector}, cfg);
    const Mat6 oracle = joseph_cov(s.cov, Mat3(cfg.r_diag.asDiagonal()));
    EXPECT_LE((post.cov - oracle).norm(), 1e-6 * oracle.norm());
  }
}

TEST(Update, IllConditionedInnovationIsRejected) {
  StateEstimate s;
  s.cov = Mat6::Zero();
  s.cov(0, 0) = 1e6;
  FilterConfig cfg;
  cfg.r_diag = Vec3::Constant(1e-9);
  EXPECT_EQ(code_of([&] { update(s, {Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector}, cfg); }),
            ErrorCode::SingularInnovation);
}

TEST(Covariance, RandomInterleavedSoakStaysSymmetricPsd) {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> dt(1e-3, 0.2), coin(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 5.0);
  FilterConfig cfg;
  cfg.q_scale = 30.0;
  cfg.r_diag = Vec3(0.02, 0.05, 0.01);
  StateEstimate s = initialize({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector}, cfg);
  for (int i = 0; i < 10000; ++i) {
    if (coin(rng) < 0.5) {
      s = predict(s, dt(rng), cfg);
    } else {
      s = update(s, {Vec3(n(rng), n(rng), n(rng)), s.stamp, MeasurementSource::PrimaryDetector}, cfg);
    }
    ASSERT_LT((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-9) << "step " << i;
    ASSERT_GE(min_eigenvalue(s.cov), -1e-9) << "step " << i;
  }
}

TEST(Convergence, NoiselessConstantVelocityTruth) {
  FilterConfig cfg;
  cfg.q_scale = 1e-6;
  cfg.r_diag = Vec3::Constant(1e-9);
  const Vec3 p0(1.0, -2.0, 10.0);
  const Vec3 v(1.5, -0.5, 0.25);
  const double dt = 0.05;
  StateEstimate s = initialize({p0, 0.0, MeasurementSource::PrimaryDetector}, cfg);
  double sq = 0.0;
  int counted = 0;
  for (int k = 1; k <= 500; ++k) {
    const double t = k * dt;
    s = predict(s, dt, cfg);
    s = update(s, {p0 + v * t, t, MeasurementSource::PrimaryDetector}, cfg);
    if (k > 250) {
      sq += (s.position() - (p0 + v * t)).squaredNorm();
      ++counted;
    }
  }
  EXPECT_LT(std::sqrt(sq / counted), 10.0 * std::sqrt(1e-9));
  EXPECT_LT((s.velocity() - v).norm(), 1e-3);
}

TEST(FilterConfig, RejectsNonPositiveFields) {
  FilterConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.p0_vel = 0.0;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    EXPECT_NE(std::string(e.what()).find("p0_vel"), std::string::npos);
  }
}

TEST(Track, InitializesOnFirstPrimaryOnly) {
  Track track(FilterConfig{});
  EXPECT_FALSE(track.initialized());
  EXPECT_EQ(code_of([&] { track.state(); }), ErrorCode::InvalidArgument);
  EXPECT_FALSE(track.correct({Vec3(1, 1, 1), 0.1, MeasurementSource::KfGuided}));
  EXPECT_FALSE(track.initialized());
  EXPECT_TRUE(track.correct({Vec3(1, 2, 3), 0.2, MeasurementSource::PrimaryDetector}));
  ASSERT_TRUE(track.initialized());
  EXPECT_EQ(track.state().position(), Vec3(1, 2, 3));
  EXPECT_EQ(track.state().stamp, 0.2);
}

TEST(Track, AdvanceUsesEqualSubSteps) {
  FilterConfig cfg;
  cfg.predict_rate = 100.0;
  Track track(cfg);
  track.correct({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector});
  track.advance_to(0.05);

  StateEstimate manual = initialize({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector}, cfg);
  for (int i = 0; i < 5; ++i) {
    manual = predict(manual, 0.01, cfg);
  }
  EXPECT_LT((track.state().cov - manual.cov).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_DOUBLE_EQ(track.state().stamp, 0.05);

  const Mat6 before = track.state().cov;
  track.advance_to(0.04);  // not ahead: no-op
  EXPECT_EQ(track.state().cov, before);
}

TEST(Track, StaleTrackReinitializesOnPrimary) {
  FilterConfig cfg;
  cfg.stale_timeout = 1.0;
  Track track(cfg);
  track.correct({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector});
  EXPECT_TRUE(track.is_fresh(0.5));
  EXPECT_TRUE(track.is_fresh(1.0));
  EXPECT_FALSE(track.is_fresh(1.5));

  track.advance_to(2.0);
  ASSERT_TRUE(track.correct({Vec3(5, 5, 5), 2.0, MeasurementSource::PrimaryDetector}));
  EXPECT_EQ(track.state().position(), Vec3(5, 5, 5));
  EXPECT_EQ(track.state().cov, initialize({Vec3(5, 5, 5), 2.0, MeasurementSource::PrimaryDetector}, cfg).cov);
  EXPECT_EQ(track.last_measurement_stamp(), 2.0);
}

TEST(Track, FreshTrackFusesInsteadOfReinitializing) {
  Track track(FilterConfig{});
  track.correct({Vec3::Zero(), 0.0, MeasurementSource::PrimaryDetector});
  track.correct({Vec3(1, 0, 0), 0.05, MeasurementSource::KfGuided});
  EXPECT_GT(track.state().position().x(), 0.0);
  EXPECT_LT(track.state().position().x(), 1.0);
  EXPECT_EQ(track.last_measurement_stamp(), 0.05);
}
