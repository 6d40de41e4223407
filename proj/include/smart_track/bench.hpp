#pragma once

#include "smart_track/depth_sim.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace smart_track {

enum class Mode { MeasurementsOnly, KfFeedback };

std::string_view to_string(Mode mode);
/// Accepts "feedback" and "measurements-only".
Mode parse_mode(std::string_view text);

enum class FrameSource { Primary, KfGuided, None };

std::string_view to_string(FrameSource source);

struct FrameRecord {
  double t = 0.0;
  Vec3 truth_pos = Vec3::Zero();
  Vec3 est_pos = Vec3::Zero();
  Vec3 est_vel = Vec3::Zero();
  double pos_error = 0.0;  // |truth_pos - est_pos|
  FrameSource source = FrameSource::None;
  double cov_trace = 0.0;  // trace of the position covariance block, m^2
};

struct RunSummary {
  std::string scenario;
  Mode mode = Mode::KfFeedback;
  std::uint64_t seed = 0;
  double rmse = 0.0;       // over frames with t >= settle_time; NaN if there are none
  double max_error = 0.0;  // same window
  int frames_total = 0;
  int frames_primary = 0;
  int frames_kf_guided = 0;
  int frames_none = 0;
  double mean_target_distance = 0.0;  // camera to target truth, all frames
};

/// One scenario rollout: the simulated world plus the tracker it feeds.
/// Frames before the first successful primary localization produce no record.
class Rollout {
 public:
  Rollout(ScenarioConfig cfg, Mode mode);

  bool done() const { return next_frame_ >= cfg_.frame_count(); }
  int next_frame() const { return next_frame_; }

  /// Renders and processes the next frame.
  std::optional<FrameRecord> step();

  const Track& track() const { return track_; }
  const DepthImage& last_image() const { return image_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  ScenarioConfig cfg_;
  Mode mode_;
  Track track_;
  DepthImage image_;
  int next_frame_ = 0;
};

struct RunResult {
  std::vector<FrameRecord> records;
  RunSummary summary;
};

/// Called after every frame with the rendered image and its index.
using FrameSink = std::function<void(int frame_idx, const DepthImage& img)>;

/// Validates `cfg` (ConfigError) and performs the full deterministic rollout.
RunResult run_scenario(const ScenarioConfig& cfg, Mode mode, const FrameSink& sink = {});

RunSummary summarize(const std::vector<FrameRecord>& records, const ScenarioConfig& cfg, Mode mode);

/// Runs every (mode, seed) pair for `cfg` on up to `workers` threads; the
/// result is ordered by (mode, seed) regardless of completion order.
std::vector<RunSummary> run_sweep(const ScenarioConfig& cfg, const std::vector<Mode>& modes,
                                  const std::vector<std::uint64_t>& seeds, unsigned workers = 0);

/// Mean of rmse, max_error and distance over runs of one (scenario, mode);
/// counts are summed.
RunSummary average(const std::vector<RunSummary>& runs);

void emit_csv(std::ostream& out, const std::vector<FrameRecord>& records);
/// Inverse of emit_csv for the columns it writes (est_vel is not stored).
std::vector<FrameRecord> parse_csv(std::istream& in);

/// Aligned text table with one row per summary.
std::string compare_report(const std::vector<RunSummary>& summaries);

}  // namespace smart_track
