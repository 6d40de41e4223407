#include "smart_track/bench.hpp"

#include "smart_track/error.hpp"
#include "smart_track/localization.hpp"
#include "smart_track/reacquisition.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace smart_track {

namespace {

// Failures that mean "no measurement this frame"; anything else is a bug.
bool is_frame_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::BehindCamera:
    case ErrorCode::NonPositiveDepth:
    case ErrorCode::NoValidDepth:
    case ErrorCode::OffImage:
    case ErrorCode::NoContour:
    case ErrorCode::SingularInnovation:
      return true;
    default:
      return false;
  }
}

std::string fmt_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return {buf, res.ptr};
}

double parse_double(std::string_view tok) {
  double x = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::Io, "bad CSV number '" + std::string(tok) + "'");
  }
  return x;
}

FrameSource parse_source(std::string_view text) {
  if (text == "primary") return FrameSource::Primary;
  if (text == "kf_guided") return FrameSource::KfGuided;
  if (text == "none") return FrameSource::None;
  throw Error(ErrorCode::Io, "bad CSV source '" + std::string(text) + "'");
}

constexpr const char* kCsvHeader = "t,truth_x,truth_y,truth_z,est_x,est_y,est_z,err,source,cov_trace";

}  // namespace

std::string_view to_string(Mode mode) {
  return mode == Mode::KfFeedback ? "feedback" : "measurements-only";
}

Mode parse_mode(std::string_view text) {
  if (text == "feedback") return Mode::KfFeedback;
  if (text == "measurements-only") return Mode::MeasurementsOnly;
  throw Error(ErrorCode::ConfigError, "mode must be 'feedback' or 'measurements-only'");
}

std::string_view to_string(FrameSource source) {
  switch (source) {
    case FrameSource::Primary: return "primary";
    case FrameSource::KfGuided: return "kf_guided";
    case FrameSource::None: return "none";
  }
  return "none";
}

Rollout::Rollout(ScenarioConfig cfg, Mode mode) : cfg_(std::move(cfg)), mode_(mode), track_(cfg_.filter) {
  cfg_.validate();
}

std::optional<FrameRecord> Rollout::step() {
  if (done()) {
    return std::nullopt;
  }
  const int k = next_frame_++;
  const double t = cfg_.frame_time(k);
  const TruthState truth = truth_state(cfg_.trajectory, t);
  image_ = render_depth(cfg_, truth.position, t, k);
  track_.advance_to(t);

  FrameSource source = FrameSource::None;
  if (const auto box = detect(cfg_, image_, truth.position, t, k)) {
    try {
      track_.correct(localize(image_, *box, cfg_.camera));
      source = FrameSource::Primary;
    } catch (const Error& e) {
      if (!is_frame_failure(e.code())) throw;
    }
  }
  if (source == FrameSource::None && mode_ == Mode::KfFeedback && track_.is_fresh(t)) {
    try {
      track_.correct(reacquire(image_, track_.state(), cfg_.camera, cfg_.reacquisition));
      source = FrameSource::KfGuided;
    } catch (const Error& e) {
      if (!is_frame_failure(e.code())) throw;
    }
  }
  if (!track_.initialized()) {
    return std::nullopt;
  }

  const StateEstimate& s = track_.state();
  FrameRecord rec;
  rec.t = t;
  rec.truth_pos = truth.position;
  rec.est_pos = s.position();
  rec.est_vel = s.velocity();
  rec.pos_error = (truth.position - rec.est_pos).norm();
  rec.source = source;
  rec.cov_trace = s.position_cov().trace();
  return rec;
}

RunSummary summarize(const std::vector<FrameRecord>& records, const ScenarioConfig& cfg, Mode mode) {
  RunSummary sum;
  sum.scenario = cfg.name;
  sum.mode = mode;
  sum.seed = cfg.seed;
  double sq = 0.0;
  double dist = 0.0;
  int scored = 0;
  for (const FrameRecord& r : records) {
    ++sum.frames_total;
    switch (r.source) {
      case FrameSource::Primary: ++sum.frames_primary; break;
      case FrameSource::KfGuided: ++sum.frames_kf_guided; break;
      case FrameSource::None: ++sum.frames_none; break;
    }
    dist += (r.truth_pos - cfg.rig.position).norm();
    if (r.t >= cfg.settle_time) {
      sq += r.pos_error * r.pos_error;
      sum.max_error = std::max(sum.max_error, r.pos_error);
      ++scored;
    }
  }
  sum.rmse = scored > 0 ? std::sqrt(sq / scored) : std::nan("");
  sum.mean_target_distance = records.empty() ? 0.0 : dist / static_cast<double>(records.size());
  return sum;
}

RunResult run_scenario(const ScenarioConfig& cfg, Mode mode, const FrameSink& sink) {
  Rollout rollout(cfg, mode);
  RunResult out;
  out.records.reserve(static_cast<std::size_t>(cfg.frame_count()));
  while (!rollout.done()) {
    const int k = rollout.next_frame();
    if (auto rec = rollout.step()) {
      out.records.push_back(*rec);
    }
    if (sink) {
      sink(k, rollout.last_image());
    }
  }
  out.summary = summarize(out.records, rollout.config(), mode);
  return out;
}

std::vector<RunSummary> run_sweep(const ScenarioConfig& cfg, const std::vector<Mode>& modes,
                                  const std::vector<std::uint64_t>& seeds, unsigned workers) {
  cfg.validate();
  struct Job {
    Mode mode;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (Mode m : modes) {
    for (std::uint64_t s : seeds) {
      jobs.push_back({m, s});
    }
  }
  std::vector<RunSummary> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      ScenarioConfig c = cfg;
      c.seed = jobs[i].seed;
      results[i] = run_scenario(c, jobs[i].mode).summary;
    }
  };
  if (workers == 0) {
    workers = std::max(1U, std::thread::hardware_concurrency());
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) {
      pool.emplace_back(worker);
    }
  }
  return results;
}

RunSummary average(const std::vector<RunSummary>& runs) {
  if (runs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cannot average an empty run list");
  }
  RunSummary out;
  out.scenario = runs.front().scenario;
  out.mode = runs.front().mode;
  out.seed = runs.front().seed;
  for (const RunSummary& r : runs) {
    out.rmse += r.rmse;
    out.max_error += r.max_error;
    out.mean_target_distance += r.mean_target_distance;
    out.frames_total += r.frames_total;
    out.frames_primary += r.frames_primary;
    out.frames_kf_guided += r.frames_kf_guided;
    out.frames_none += r.frames_none;
  }
  const double n = static_cast<double>(runs.size());
  out.rmse /= n;
  out.max_error /= n;
  out.mean_target_distance /= n;
  return out;
}

void emit_csv(std::ostream& out, const std::vector<FrameRecord>& records) {
  out << kCsvHeader << '\n';
  for (const FrameRecord& r : records) {
    out << fmt_double(r.t);
    for (const Vec3* v : {&r.truth_pos, &r.est_pos}) {
      for (int i = 0; i < 3; ++i) {
        out << ',' << fmt_double((*v)[i]);
      }
    }
    out << ',' << fmt_double(r.pos_error) << ',' << to_string(r.source) << ',' << fmt_double(r.cov_trace) << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::Io, "failed writing CSV");
  }
}

std::vector<FrameRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorCode::Io, "missing or unexpected CSV header");
  }
  std::vector<FrameRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
      cells.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    cells.push_back(rest);
    if (cells.size() != 10) {
      throw Error(ErrorCode::Io, "CSV row has " + std::to_string(cells.size()) + " cells, expected 10");
    }
    FrameRecord r;
    r.t = parse_double(cells[0]);
    r.truth_pos = {parse_double(cells[1]), parse_double(cells[2]), parse_double(cells[3])};
    r.est_pos = {parse_double(cells[4]), parse_double(cells[5]), parse_double(cells[6])};
    r.pos_error = parse_double(cells[7]);
    r.source = parse_source(cells[8]);
    r.cov_trace = parse_double(cells[9]);
    out.push_back(r);
  }
  return out;
}

std::string compare_report(const std::vector<RunSummary>& summaries) {
  if (summaries.empty()) {
    throw Error(ErrorCode::InvalidArgument, "compare_report needs at least one summary");
  }
  const std::vector<std::string> header = {"Experiment", "Method", "RMSE [m]", "Max error [m]", "Distance [m]"};
  std::vector<std::vector<std::string>> rows;
  for (const RunSummary& s : summaries) {
    rows.push_back({s.scenario, s.mode == Mode::KfFeedback ? "KF-Feedback" : "Measurements-Only", fmt_double(s.rmse),
                    fmt_double(s.max_error), fmt_double(s.mean_target_distance)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? " | " : "") << row[c] << std::string(width[c] - row[c].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "-+-" : "") << std::string(width[c], '-');
  }
  out << '\n';
  for (const auto& row : rows) {
    emit(row);
  }
  return out.str();
}

}  // namespace smart_track
