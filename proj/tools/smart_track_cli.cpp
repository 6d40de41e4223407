// Experiment driver: single rollouts, multi-seed comparisons, fixture regeneration.

#include "smart_track/bench.hpp"
#include "smart_track/error.hpp"
#include "smart_track/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;
using namespace smart_track;

namespace {

constexpr int kExitConfig = 2;

std::string frame_filename(int idx) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.pgm", idx);
  return buf;
}

void print_summary(std::ostream& out, const RunSummary& s) {
  out << s.scenario << " mode=" << to_string(s.mode) << " seed=" << s.seed << " rmse=" << s.rmse
      << " max_error=" << s.max_error << " frames=" << s.frames_total << " primary=" << s.frames_primary
      << " kf_guided=" << s.frames_kf_guided << " none=" << s.frames_none
      << " distance=" << s.mean_target_distance << '\n';
}

int cmd_run(const std::string& scenario, const std::string& mode_text, const std::optional<std::uint64_t>& seed,
            const std::string& out_csv, const std::string& dump_dir) {
  ScenarioConfig cfg = resolve_scenario(scenario);
  if (seed) {
    cfg.seed = *seed;
  }
  const Mode mode = parse_mode(mode_text);

  FrameSink sink;
  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    sink = [&](int idx, const DepthImage& img) { write_pgm((fs::path(dump_dir) / frame_filename(idx)).string(), img); };
  }
  const RunResult result = run_scenario(cfg, mode, sink);

  if (out_csv.empty() || out_csv == "-") {
    emit_csv(std::cout, result.records);
    print_summary(std::cerr, result.summary);
  } else {
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot open " + out_csv);
    }
    emit_csv(out, result.records);
    print_summary(std::cout, result.summary);
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& scenarios, int seeds, std::uint64_t first_seed, unsigned workers) {
  if (seeds < 1) {
    throw Error(ErrorCode::ConfigError, "--seeds must be at least 1");
  }
  std::vector<std::uint64_t> seed_list(static_cast<std::size_t>(seeds));
  std::iota(seed_list.begin(), seed_list.end(), first_seed);

  std::vector<RunSummary> rows;
  for (const std::string& name : scenarios) {
    const ScenarioConfig cfg = resolve_scenario(name);
    const auto runs = run_sweep(cfg, {Mode::MeasurementsOnly, Mode::KfFeedback}, seed_list, workers);
    for (Mode mode : {Mode::MeasurementsOnly, Mode::KfFeedback}) {
      std::vector<RunSummary> subset;
      std::copy_if(runs.begin(), runs.end(), std::back_inserter(subset),
                   [mode](const RunSummary& r) { return r.mode == mode; });
      rows.push_back(average(subset));
    }
  }
  std::cout << "Mean over " << seeds << " seed(s) starting at " << first_seed << "\n\n" << compare_report(rows);
  return 0;
}

int cmd_fixtures(const std::string& out_dir, const std::string& scenario_dir) {
  fs::create_directories(out_dir);
  if (!scenario_dir.empty()) {
    fs::create_directories(scenario_dir);
    for (const std::string& name : builtin_scenario_names()) {
      std::ofstream out(fs::path(scenario_dir) / (name + ".scn"));
      out << "# Generated by `smart_track fixtures`; edit freely.\n" << format_scenario(builtin_scenario(name));
    }
  }

  // Golden depth frame: first frame of the circle orbit with noise and dropout.
  ScenarioConfig circle = builtin_scenario("circle");
  const TruthState truth = truth_state(circle.trajectory, 0.0);
  write_pgm((fs::path(out_dir) / "circle_frame_000000.pgm").string(), render_depth(circle, truth.position, 0.0, 0));

  // Golden CSV: a short static rollout in feedback mode.
  ScenarioConfig stat = builtin_scenario("static");
  stat.duration = 15.0;
  std::ofstream csv(fs::path(out_dir) / "static_15s_feedback.csv", std::ios::binary);
  emit_csv(csv, run_scenario(stat, Mode::KfFeedback).records);

  std::cout << "fixtures written to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KF-guided depth reacquisition tracker: experiment driver"};
  app.require_subcommand(1);

  std::string scenario = "circle";
  std::string mode = "feedback";
  std::optional<std::uint64_t> seed;
  std::string out_csv;
  std::string dump_dir;
  auto* run = app.add_subcommand("run", "Run one scenario and emit per-frame CSV");
  run->add_option("--scenario", scenario, "Scenario file or built-in name (static, static_far, circle, fig8)");
  run->add_option("--mode", mode, "feedback | measurements-only");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out-csv", out_csv, "CSV output path (stdout when omitted)");
  run->add_option("--dump-frames", dump_dir, "Directory for 16-bit millimetre PGM depth frames");

  std::vector<std::string> compare_scenarios = {"static", "circle", "fig8"};
  int seeds = 5;
  std::uint64_t first_seed = 1;
  unsigned workers = 0;
  auto* compare = app.add_subcommand("compare", "Compare both modes over several seeds");
  compare->add_option("--scenario", compare_scenarios, "Scenario files or built-in names");
  compare->add_option("--seeds", seeds, "Number of seeds per scenario and mode");
  compare->add_option("--first-seed", first_seed, "First seed of the sweep");
  compare->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

  std::string fixture_dir = "tests/fixtures";
  std::string scenario_dir;
  auto* fixtures = app.add_subcommand("fixtures", "Regenerate golden PGM/CSV test fixtures");
  fixtures->add_option("--out-dir", fixture_dir, "Fixture output directory");
  fixtures->add_option("--scenario-dir", scenario_dir, "Also write the built-in .scn files here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(scenario, mode, seed, out_csv, dump_dir);
    if (*compare) return cmd_compare(compare_scenarios, seeds, first_seed, workers);
    if (*fixtures) return cmd_fixtures(fixture_dir, scenario_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kExitConfig : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
