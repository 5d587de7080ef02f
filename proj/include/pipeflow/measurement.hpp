#pragma once

// From transit times and a level reading to a corrected flow rate, frame by
// frame.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pipeflow/clogging.hpp"
#include "pipeflow/fpcf.hpp"
#include "pipeflow/geometry.hpp"

namespace pipeflow {

/// One acoustic path.
struct ChordSpec {
  std::string id;
  double height_mm = 50.0;
  double path_length_m = 0.0;
  double beam_angle_rad = 0.0; ///< angle between the sound path and the flow
  double weight = 1.0;

  void validate() const;
};

/// Two crossed paths at the same height, each spanning the full chord width
/// at `beam_angle_rad` to the pipe axis.
std::vector<ChordSpec> crossed_pair(const PipeGeometry& pipe, double height_mm,
                                    double beam_angle_rad = 0.7853981633974483);

struct ChordReading {
  std::string chord_id;
  double t_up_s = 0.0;   ///< with-flow transit time
  double t_down_s = 0.0; ///< against-flow transit time
};

struct SensorFrame {
  double timestamp_s = 0.0;
  double level_mm = 0.0;
  std::vector<ChordReading> readings;
};

class InvalidTimesError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// v = L (t_down - t_up) / (2 t_up t_down cos(theta)); positive for flow from
/// upstream to downstream.
double line_velocity(double t_up_s, double t_down_s, const ChordSpec& chord);

enum class EstimateStatus { Ok, FpcfOutOfRange, DryChord, InvalidTimes };
std::string_view to_string(EstimateStatus status) noexcept;

struct ChordVelocity {
  std::string chord_id;
  double velocity_m_s = 0.0;
  bool implausible = false; ///< |v| above the plausibility cap
};

struct FlowEstimate {
  double timestamp_s = 0.0;
  double level_mm = 0.0;
  std::vector<ChordVelocity> chords; ///< wet chords with valid times
  std::optional<double> mean_line_velocity;
  double area_m2 = 0.0;
  double fpcf = 1.0;
  double calibration_factor = 1.0;
  std::optional<double> flow_m3s;
  EstimateStatus status = EstimateStatus::Ok;

  std::optional<double> flow_lps() const {
    return flow_m3s ? std::optional<double>(*flow_m3s * 1e3) : std::nullopt;
  }
};

struct EstimatorSettings {
  double calibration_factor = 1.0;
  double plausibility_cap_m_s = 15.0;
};

/// Q = k_cal * FPCF(H) * v_L * A(H), where v_L is the weight-normalized mean of
/// the wet chords. Outside the polynomial's range FPCF falls back to 1 and the
/// status says so. Throws std::invalid_argument / std::domain_error only for
/// malformed frames (unknown or duplicate chord ids, level outside the pipe).
FlowEstimate estimate_flow(const SensorFrame& frame, std::span<const ChordSpec> chords,
                           const FpcfPolynomial& poly, const PipeGeometry& pipe,
                           const EstimatorSettings& settings = {});

// -------------------------------------------------------------
// Stream processing
// -------------------------------------------------------------

struct FrameDiagnostic {
  std::optional<double> timestamp_s;
  std::size_t line = 0; ///< first input line of the frame, 0 if unknown
  std::string message;
};

using FrameInput = std::variant<SensorFrame, FrameDiagnostic>;

struct EstimateRecord {
  FlowEstimate estimate;
  std::optional<Verdict> verdict; ///< absent when no line velocity was available
  AlarmLevel alarm = AlarmLevel::Normal;
};

struct AlarmEventRecord {
  double timestamp_s = 0.0;
  AlarmEventKind kind = AlarmEventKind::Raised;
  double level_mm = 0.0;
  double velocity_m_s = 0.0;
  int consecutive = 0;
};

using StreamRecord = std::variant<EstimateRecord, FrameDiagnostic, AlarmEventRecord>;

struct ProcessConfig {
  PipeGeometry pipe{0.25};
  std::vector<ChordSpec> chords;
  FpcfPolynomial poly = FpcfPolynomial::published_250mm();
  EstimatorSettings settings{};
  DecisionBoundary boundary{};
  int debounce = 5;
};

struct StreamSummary {
  std::size_t frames = 0;
  std::size_t estimates = 0;
  std::size_t diagnostics = 0;
  std::size_t alarms_raised = 0;
  std::size_t alarms_cleared = 0;
};

/// In-order, single-consumer pipeline. Each pushed frame yields an estimate or
/// a diagnostic, followed by at most one alarm event.
class StreamProcessor {
public:
  explicit StreamProcessor(ProcessConfig config);

  std::vector<StreamRecord> push(const FrameInput& input);

  const AlarmState& alarm_state() const noexcept { return alarm_; }
  const StreamSummary& summary() const noexcept { return summary_; }
  const ProcessConfig& config() const noexcept { return config_; }

private:
  ProcessConfig config_;
  AlarmState alarm_;
  StreamSummary summary_;
  std::optional<double> last_timestamp_;
};

std::vector<StreamRecord> process_stream(std::span<const FrameInput> frames,
                                         const ProcessConfig& config);

} // namespace pipeflow
