#pragma once

// Percent error, flow-weighted mean error, calibration factor and
// repeatability for meter trials.

#include <span>
#include <string>
#include <vector>

namespace pipeflow {

/// Signed 100 * (measured - reference) / reference.
double percent_error(double measured, double reference);

struct RateError {
  double flow = 0.0;      ///< reference flow, any unit
  double error_pct = 0.0; ///< signed
};

/// sum (Q_i/Q_max) E_i / sum (Q_i/Q_max).
double fwme(std::span<const RateError> errors);

struct TrialRecord {
  std::string segment_id;
  std::string flow_label;
  double q_ref_lps = 0.0;
  double q_meas_lps = 0.0;
};

/// Mean of Q_ref / Q_meas over the given trials.
double calibration_factor(std::span<const TrialRecord> trials);

/// Relative sample standard deviation, in percent.
double repeatability(std::span<const double> samples);

struct RateRow {
  std::string flow_label;
  double q_ref_lps = 0.0;  ///< mean reference flow of the label
  double q_meas_lps = 0.0; ///< mean measured flow of the label
  double error_pct = 0.0;
  std::size_t trials = 0;
};

struct ErrorTable {
  std::vector<RateRow> rows; ///< in order of first appearance of each label
  double fwme_pct = 0.0;
  double max_abs_error_pct = 0.0;
};

/// Groups trials by flow label; the per-label error is the percent error of
/// the mean measured flow against the mean reference flow, after multiplying
/// every measurement by `factor`.
ErrorTable error_table(std::span<const TrialRecord> trials, double factor = 1.0);

struct CalibrationReport {
  double factor = 1.0;
  std::vector<TrialRecord> calibration_trials; ///< first segment of each label
  std::vector<TrialRecord> evaluation_trials;  ///< everything else
  ErrorTable before;
  ErrorTable after;
};

/// The first segment seen for each flow label calibrates; the remaining
/// segments are scored with and without the factor. If a label has a single
/// segment, it is used for calibration only.
CalibrationReport calibrate(std::span<const TrialRecord> trials);

} // namespace pipeflow
