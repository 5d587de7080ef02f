#include "pipeflow/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace pipeflow {

double percent_error(double measured, double reference) {
  if (!(reference > 0.0)) {
    throw std::invalid_argument("percent_error: reference must be > 0, got " + std::to_string(reference));
  }
  return 100.0 * (measured - reference) / reference;
}

double fwme(std::span<const RateError> errors) {
  if (errors.empty()) throw std::invalid_argument("fwme: no errors given");
  double q_max = 0.0;
  for (const RateError& e : errors) {
    if (!(e.flow > 0.0)) throw std::invalid_argument("fwme: flows must be > 0");
    q_max = std::max(q_max, e.flow);
  }
  double num = 0.0;
  double den = 0.0;
  for (const RateError& e : errors) {
    const double w = e.flow / q_max;
    num += w * e.error_pct;
    den += w;
  }
  return num / den;
}

double calibration_factor(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("calibration_factor: no trials given");
  double sum = 0.0;
  for (const TrialRecord& t : trials) {
    if (!(t.q_meas_lps > 0.0)) {
      throw std::invalid_argument("calibration_factor: measured flow must be > 0 in segment '" +
                                  t.segment_id + "'");
    }
    if (!(t.q_ref_lps > 0.0)) {
      throw std::invalid_argument("calibration_factor: reference flow must be > 0 in segment '" +
                                  t.segment_id + "'");
    }
    sum += t.q_ref_lps / t.q_meas_lps;
  }
  return sum / static_cast<double>(trials.size());
}

double repeatability(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("repeatability: need at least two samples");
  double mean = 0.0;
  for (double q : samples) mean += q;
  mean /= static_cast<double>(samples.size());
  if (mean == 0.0) throw std::invalid_argument("repeatability: mean is zero");
  double ss = 0.0;
  for (double q : samples) ss += (q - mean) * (q - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return 100.0 * sd / std::abs(mean);
}

ErrorTable error_table(std::span<const TrialRecord> trials, double factor) {
  if (trials.empty()) throw std::invalid_argument("error_table: no trials given");
  ErrorTable table;
  std::map<std::string, std::size_t> index;
  for (const TrialRecord& t : trials) {
    if (!(t.q_ref_lps > 0.0)) {
      throw std::invalid_argument("error_table: reference flow must be > 0 in segment '" +
                                  t.segment_id + "'");
    }
    auto [it, inserted] = index.emplace(t.flow_label, table.rows.size());
    if (inserted) table.rows.push_back({t.flow_label, 0.0, 0.0, 0.0, 0});
    RateRow& row = table.rows[it->second];
    row.q_ref_lps += t.q_ref_lps;
    row.q_meas_lps += factor * t.q_meas_lps;
    ++row.trials;
  }
  std::vector<RateError> errors;
  for (RateRow& row : table.rows) {
    row.q_ref_lps /= static_cast<double>(row.trials);
    row.q_meas_lps /= static_cast<double>(row.trials);
    row.error_pct = percent_error(row.q_meas_lps, row.q_ref_lps);
    table.max_abs_error_pct = std::max(table.max_abs_error_pct, std::abs(row.error_pct));
    errors.push_back({row.q_ref_lps, row.error_pct});
  }
  table.fwme_pct = fwme(errors);
  return table;
}

CalibrationReport calibrate(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("calibrate: no trials given");
  CalibrationReport report;
  std::map<std::string, std::string> first_segment;
  for (const TrialRecord& t : trials) {
    auto [it, inserted] = first_segment.emplace(t.flow_label, t.segment_id);
    if (inserted || it->second == t.segment_id) {
      report.calibration_trials.push_back(t);
    } else {
      report.evaluation_trials.push_back(t);
    }
  }
  report.factor = calibration_factor(report.calibration_trials);
  const auto& scored =
      report.evaluation_trials.empty() ? report.calibration_trials : report.evaluation_trials;
  report.before = error_table(scored, 1.0);
  report.after = error_table(scored, report.factor);
  return report;
}

} // namespace pipeflow
