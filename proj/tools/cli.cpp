#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>

#include "pipeflow/calibration.hpp"
#include "pipeflow/config.hpp"
#include "pipeflow/fpcf.hpp"
#include "pipeflow/io.hpp"
#include "pipeflow/measurement.hpp"
#include "pipeflow/simulator.hpp"
#include "pipeflow/velocity_profile.hpp"

namespace pipeflow::cli {

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

RunConfig load(const Common& common) {
  return common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
}

class Output {
public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw DataError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

class Input {
public:
  Input(const std::string& path, std::istream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ifstream>(path);
      if (!*file_) throw DataError("cannot open input file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::istream& operator*() { return *stream_; }

private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_;
};

double lowest_chord(const RunConfig& cfg) {
  double y = cfg.resolved_chords().front().height_mm;
  for (const ChordSpec& c : cfg.resolved_chords()) y = std::min(y, c.height_mm);
  return y;
}

int cmd_profile(const Common& common, double level_mm, int nx, int ny, std::ostream& out) {
  const RunConfig cfg = load(common);
  const PipeGeometry pipe = cfg.pipe();
  if (!(level_mm > 0.0) || level_mm > cfg.diameter_mm) {
    throw DataError("level " + format_double(level_mm) + " mm outside (0, " + format_double(cfg.diameter_mm) +
                    "] mm");
  }
  if (nx < 2 || ny < 2) throw DataError("grid needs nx >= 2 and ny >= 2");
  const ProfileModel model(pipe, WaterLevel::from_mm(level_mm), cfg.profile.params, cfg.profile.dip,
                           cfg.profile.options);
  Output o(common.out_path, out);
  write_profile_grid(*o, profile_grid(model, nx, ny));
  return kOk;
}

int cmd_fpcf(const Common& common, LevelRange range, std::optional<double> chord_mm, std::ostream& out,
             std::ostream& err) {
  const RunConfig cfg = load(common);
  const double y = chord_mm.value_or(lowest_chord(cfg));
  if (!(range.step_mm > 0.0) || !(range.max_mm >= range.min_mm)) throw DataError("empty level range");
  if (range.min_mm < y) throw DataError("minimum level lies below the chord");
  if (range.max_mm > cfg.diameter_mm) throw DataError("maximum level exceeds the pipe diameter");

  const FpcfTable table = tabulate_fpcf(cfg.pipe(), cfg.profile, y, range, cfg.quad);
  std::vector<FpcfSample> rows = table.samples;
  for (const FpcfSampleFailure& f : table.failures) {
    rows.push_back({f.level_mm, y, std::numeric_limits<double>::quiet_NaN()});
    err << "fpcf: H = " << format_double(f.level_mm) << " mm: " << f.message << '\n';
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.level_mm < b.level_mm; });
  Output o(common.out_path, out);
  write_fpcf_table(*o, rows);
  return kOk;
}

int cmd_fit(const Common& common, const std::string& input, int degree, std::istream& in, std::ostream& out,
            std::ostream& err) {
  Input i(input, in);
  std::vector<FpcfSample> samples;
  std::size_t skipped = 0;
  for (const FpcfSample& s : read_fpcf_table(*i)) {
    if (std::isfinite(s.value)) {
      samples.push_back(s);
    } else {
      ++skipped;
    }
  }
  if (skipped) err << "fit: skipped " << skipped << " rows without an FPCF value\n";
  FpcfPolynomial poly = [&] {
    try {
      return fit_polynomial(samples, degree);
    } catch (const FitError& e) {
      throw DataError(e.what());
    }
  }();
  Output o(common.out_path, out);
  *o << polynomial_document(poly);
  return kOk;
}

int cmd_process(const Common& common, const std::string& input, std::istream& in, std::ostream& out) {
  const RunConfig cfg = load(common);
  StreamProcessor processor(make_process_config(cfg));
  Input i(input, in);
  Output o(common.out_path, out);
  FrameReader reader(*i);
  while (auto frame = reader.next()) {
    for (const StreamRecord& r : processor.push(*frame)) write_record(*o, r);
  }
  if (processor.summary().frames > 0) write_summary(*o, processor.summary());
  return kOk;
}

int cmd_calibrate(const Common& common, const std::string& input, const std::string& csv_path,
                  std::istream& in, std::ostream& out) {
  Input i(input, in);
  const std::vector<TrialRecord> trials = read_trials(*i);
  const CalibrationReport report = calibrate(trials);
  Output o(common.out_path, out);
  *o << "k_cal " << format_double(report.factor) << "\n";
  *o << "calibration segments " << report.calibration_trials.size() << ", evaluation segments "
     << report.evaluation_trials.size() << "\n\nbefore\n";
  write_error_table_text(*o, report.before);
  *o << "\nafter\n";
  write_error_table_text(*o, report.after);
  if (!csv_path.empty()) {
    Output c(csv_path, out);
    *c << "k_cal," << format_double(report.factor) << "\n";
    *c << "table,";
    write_error_table_csv(*c, report.before);
    *c << "table,";
    write_error_table_csv(*c, report.after);
  }
  return kOk;
}

int cmd_metrics(const Common& common, const std::string& input, const std::string& csv_path,
                std::istream& in, std::ostream& out) {
  Input i(input, in);
  const MetricsInput data = read_metrics_input(*i);
  ErrorTable table;
  if (!data.trials.empty()) {
    table = error_table(data.trials);
  } else {
    if (data.errors.empty()) throw DataError("no rows");
    for (const RateError& e : data.errors) {
      table.rows.push_back({format_double(e.flow), e.flow, e.flow * (1.0 + e.error_pct / 100.0), e.error_pct, 1});
      table.max_abs_error_pct = std::max(table.max_abs_error_pct, std::abs(e.error_pct));
    }
    table.fwme_pct = fwme(data.errors);
  }
  Output o(common.out_path, out);
  write_error_table_text(*o, table);
  if (!csv_path.empty()) {
    Output c(csv_path, out);
    write_error_table_csv(*c, table);
  }
  return kOk;
}

struct SimulateOverrides {
  std::optional<double> flow_lps;
  std::optional<double> level_mm;
  std::optional<std::string> weir;
  std::optional<double> noise_ns;
  std::optional<std::size_t> frames;
};

int cmd_simulate(const Common& common, const SimulateOverrides& ov, std::ostream& out) {
  RunConfig cfg = load(common);
  if (common.seed) cfg.scenario.seed = *common.seed;
  if (ov.flow_lps) cfg.scenario.flow_lps = *ov.flow_lps;
  if (ov.level_mm) cfg.scenario.level_mm = *ov.level_mm;
  if (ov.noise_ns) cfg.scenario.noise_s = *ov.noise_ns * 1e-9;
  if (ov.frames) cfg.scenario.frame_count = *ov.frames;
  try {
    if (ov.weir) cfg.scenario.weir = parse_weir_mode(*ov.weir);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::vector<SensorFrame> frames = [&] {
    try {
      return generate(cfg.scenario, make_simulation_setup(cfg));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("simulate: ") + e.what());
    }
  }();
  Output o(common.out_path, out);
  write_frames(*o, frames);
  return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ultrasonic flow measurement in partially filled pipes"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::uint64_t seed = 0;
  app.add_option("--config", common.config_path, "Run configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (simulate)");
  app.add_option("--out", common.out_path, "Output file instead of standard output");

  std::function<int()> action;

  auto* profile = app.add_subcommand("profile", "Normalized velocity grid as CSV");
  double level_mm = 0.0;
  int nx = 41, ny = 41;
  profile->add_option("--level-mm", level_mm, "Water level")->required();
  profile->add_option("--nx", nx, "Grid columns");
  profile->add_option("--ny", ny, "Grid rows");
  profile->callback([&] { action = [&] { return cmd_profile(common, level_mm, nx, ny, out); }; });

  auto* fpcf_cmd = app.add_subcommand("fpcf", "Tabulate FPCF over water levels");
  LevelRange range;
  std::optional<double> chord_mm;
  fpcf_cmd->add_option("--min-mm", range.min_mm, "Lowest level");
  fpcf_cmd->add_option("--max-mm", range.max_mm, "Highest level");
  fpcf_cmd->add_option("--step-mm", range.step_mm, "Level step");
  fpcf_cmd->add_option("--chord-mm", chord_mm, "Chord height (lowest configured chord by default)");
  fpcf_cmd->callback([&] { action = [&] { return cmd_fpcf(common, range, chord_mm, out, err); }; });

  auto* fit = app.add_subcommand("fit", "Fit a polynomial to an FPCF table");
  std::string input = "-";
  int degree = 6;
  fit->add_option("input", input, "H_mm,fpcf table ('-' for standard input)");
  fit->add_option("--degree", degree, "Polynomial degree");
  fit->callback([&] { action = [&] { return cmd_fit(common, input, degree, in, out, err); }; });

  auto* process = app.add_subcommand("process", "Flow estimates and clogging alarms from sensor frames");
  process->add_option("input", input, "Frame CSV ('-' for standard input)");
  process->callback([&] { action = [&] { return cmd_process(common, input, in, out); }; });

  std::string csv_path;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibration factor from paired trials");
  calibrate_cmd->add_option("input", input, "Paired trial CSV ('-' for standard input)");
  calibrate_cmd->add_option("--csv", csv_path, "Also write the tables as CSV");
  calibrate_cmd->callback([&] { action = [&] { return cmd_calibrate(common, input, csv_path, in, out); }; });

  auto* metrics = app.add_subcommand("metrics", "Per-rate errors and FWME");
  metrics->add_option("input", input, "Paired trial CSV or flow_lps,error_pct table");
  metrics->add_option("--csv", csv_path, "Also write the table as CSV");
  metrics->callback([&] { action = [&] { return cmd_metrics(common, input, csv_path, in, out); }; });

  auto* simulate = app.add_subcommand("simulate", "Synthetic sensor frames");
  SimulateOverrides ov;
  simulate->add_option("--flow-lps", ov.flow_lps, "True flow rate");
  simulate->add_option("--level-mm", ov.level_mm, "Baseline level (rating curve by default)");
  simulate->add_option("--weir", ov.weir, "none, weir1 or weir2");
  simulate->add_option("--noise-ns", ov.noise_ns, "Gaussian sigma on transit times");
  simulate->add_option("--frames", ov.frames, "Frame count");
  simulate->callback([&] { action = [&] { return cmd_simulate(common, ov, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInvalidConfig;
  }
  if (*seed_opt) common.seed = seed;

  try {
    return action();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidData;
  }
}

} // namespace pipeflow::cli
