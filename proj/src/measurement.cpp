#include "pipeflow/measurement.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

namespace pipeflow {

void ChordSpec::validate() const {
  if (id.empty()) throw std::invalid_argument("ChordSpec: empty id");
  if (!(path_length_m > 0.0)) throw std::invalid_argument("ChordSpec " + id + ": path length must be > 0");
  if (!(beam_angle_rad > 0.0 && beam_angle_rad < 0.5 * std::numbers::pi)) {
    throw std::invalid_argument("ChordSpec " + id + ": beam angle must lie in (0, pi/2)");
  }
  if (!(weight >= 0.0)) throw std::invalid_argument("ChordSpec " + id + ": weight must be >= 0");
  if (!(height_mm > 0.0)) throw std::invalid_argument("ChordSpec " + id + ": height must be > 0");
}

std::vector<ChordSpec> crossed_pair(const PipeGeometry& pipe, double height_mm,
                                    double beam_angle_rad) {
  const double width = 2.0 * chord_half_width(height_mm * 1e-3, pipe);
  const double length = width / std::sin(beam_angle_rad);
  return {{"lower-a", height_mm, length, beam_angle_rad, 0.5},
          {"lower-b", height_mm, length, beam_angle_rad, 0.5}};
}

double line_velocity(double t_up_s, double t_down_s, const ChordSpec& chord) {
  if (!(t_up_s > 0.0) || !(t_down_s > 0.0) || !std::isfinite(t_up_s) || !std::isfinite(t_down_s)) {
    throw InvalidTimesError("line_velocity: transit times must be positive and finite");
  }
  return chord.path_length_m * (t_down_s - t_up_s) /
         (2.0 * t_up_s * t_down_s * std::cos(chord.beam_angle_rad));
}

std::string_view to_string(EstimateStatus status) noexcept {
  switch (status) {
  case EstimateStatus::Ok: return "ok";
  case EstimateStatus::FpcfOutOfRange: return "fpcf_out_of_range";
  case EstimateStatus::DryChord: return "dry_chord";
  case EstimateStatus::InvalidTimes: return "invalid_times";
  }
  return "unknown";
}

FlowEstimate estimate_flow(const SensorFrame& frame, std::span<const ChordSpec> chords,
                           const FpcfPolynomial& poly, const PipeGeometry& pipe,
                           const EstimatorSettings& settings) {
  const double diameter_mm = pipe.diameter() * 1e3;
  if (!(frame.level_mm >= 0.0) || frame.level_mm > diameter_mm) {
    throw std::domain_error("estimate_flow: level " + std::to_string(frame.level_mm) +
                            " mm outside [0, " + std::to_string(diameter_mm) + "] mm");
  }

  std::unordered_map<std::string_view, const ChordSpec*> by_id;
  for (const ChordSpec& c : chords) by_id.emplace(c.id, &c);
  std::unordered_set<std::string_view> seen;

  FlowEstimate est;
  est.timestamp_s = frame.timestamp_s;
  est.level_mm = frame.level_mm;
  est.calibration_factor = settings.calibration_factor;
  est.area_m2 = segment_area(WaterLevel::from_mm(frame.level_mm), pipe);

  bool any_wet = false;
  double weighted = 0.0;
  double weight_sum = 0.0;
  double plain_sum = 0.0;
  for (const ChordReading& r : frame.readings) {
    auto it = by_id.find(r.chord_id);
    if (it == by_id.end()) throw std::invalid_argument("estimate_flow: unknown chord '" + r.chord_id + "'");
    if (!seen.insert(it->first).second) {
      throw std::invalid_argument("estimate_flow: duplicate reading for chord '" + r.chord_id + "'");
    }
    const ChordSpec& chord = *it->second;
    if (!(chord.height_mm < frame.level_mm)) continue;
    any_wet = true;
    double v;
    try {
      v = line_velocity(r.t_up_s, r.t_down_s, chord);
    } catch (const InvalidTimesError&) {
      continue;
    }
    est.chords.push_back({chord.id, v, std::abs(v) > settings.plausibility_cap_m_s});
    weighted += chord.weight * v;
    weight_sum += chord.weight;
    plain_sum += v;
  }

  if (!any_wet) {
    est.status = EstimateStatus::DryChord;
    return est;
  }
  if (est.chords.empty()) {
    est.status = EstimateStatus::InvalidTimes;
    return est;
  }

  const double mean_velocity = weight_sum > 0.0
                                   ? weighted / weight_sum
                                   : plain_sum / static_cast<double>(est.chords.size());
  est.mean_line_velocity = mean_velocity;

  if (poly.in_range(frame.level_mm)) {
    est.fpcf = poly.evaluate_unchecked(frame.level_mm);
    est.status = EstimateStatus::Ok;
  } else {
    est.fpcf = 1.0;
    est.status = EstimateStatus::FpcfOutOfRange;
  }
  est.flow_m3s = settings.calibration_factor * est.fpcf * mean_velocity * est.area_m2;
  return est;
}

// -------------------------------------------------------------
// Stream processing
// -------------------------------------------------------------

StreamProcessor::StreamProcessor(ProcessConfig config) : config_(std::move(config)) {
  if (config_.chords.empty()) throw std::invalid_argument("StreamProcessor: no chords configured");
  for (const ChordSpec& c : config_.chords) c.validate();
  config_.boundary.validate();
  if (config_.debounce < 1) throw std::invalid_argument("StreamProcessor: debounce must be >= 1");
  alarm_.debounce = config_.debounce;
}

std::vector<StreamRecord> StreamProcessor::push(const FrameInput& input) {
  std::vector<StreamRecord> out;
  ++summary_.frames;
  if (const auto* diag = std::get_if<FrameDiagnostic>(&input)) {
    ++summary_.diagnostics;
    out.emplace_back(*diag);
    return out;
  }
  const SensorFrame& frame = std::get<SensorFrame>(input);
  if (last_timestamp_ && frame.timestamp_s < *last_timestamp_) {
    ++summary_.diagnostics;
    out.emplace_back(FrameDiagnostic{frame.timestamp_s, 0, "timestamp goes backwards"});
    return out;
  }

  FlowEstimate estimate;
  try {
    estimate = estimate_flow(frame, config_.chords, config_.poly, config_.pipe, config_.settings);
  } catch (const std::exception& e) {
    ++summary_.diagnostics;
    out.emplace_back(FrameDiagnostic{frame.timestamp_s, 0, e.what()});
    return out;
  }
  last_timestamp_ = frame.timestamp_s;
  ++summary_.estimates;

  EstimateRecord record{std::move(estimate), std::nullopt, alarm_.level};
  std::optional<AlarmEventRecord> event;
  if (record.estimate.mean_line_velocity) {
    const double v = *record.estimate.mean_line_velocity;
    const Verdict verdict = classify(frame.level_mm, v, config_.boundary);
    const AlarmStep step = step_alarm(alarm_, verdict);
    alarm_ = step.state;
    record.verdict = verdict;
    record.alarm = alarm_.level;
    if (step.event) {
      event = AlarmEventRecord{frame.timestamp_s, *step.event, frame.level_mm, v, alarm_.consecutive};
      if (*step.event == AlarmEventKind::Raised) {
        ++summary_.alarms_raised;
      } else {
        ++summary_.alarms_cleared;
      }
    }
  }
  out.emplace_back(std::move(record));
  if (event) out.emplace_back(*event);
  return out;
}

std::vector<StreamRecord> process_stream(std::span<const FrameInput> frames,
                                         const ProcessConfig& config) {
  StreamProcessor processor(config);
  std::vector<StreamRecord> out;
  for (const FrameInput& f : frames) {
    auto records = processor.push(f);
    for (auto& r : records) out.push_back(std::move(r));
  }
  return out;
}

} // namespace pipeflow
