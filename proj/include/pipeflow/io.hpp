#pragma once

// Text formats: sensor frame CSV, FPCF tables, paired trial CSV, profile
// grids and the JSON Lines output of stream processing.

#include <cstddef>
#include <deque>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeflow/calibration.hpp"
#include "pipeflow/fpcf.hpp"
#include "pipeflow/measurement.hpp"
#include "pipeflow/velocity_profile.hpp"

namespace pipeflow {

/// Input that cannot be interpreted at all (missing or wrong header, bad
/// numbers in a table).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFrameHeader = "timestamp_s,chord_id,t_up_ns,t_down_ns,level_mm";

/// Reads `timestamp_s,chord_id,t_up_ns,t_down_ns,level_mm` rows and groups
/// consecutive rows with the same timestamp into frames. A bad row turns its
/// frame into a FrameDiagnostic. Transit times are nanoseconds and may carry
/// a fractional part.
class FrameReader {
public:
  explicit FrameReader(std::istream& in);

  /// Next frame or diagnostic; nullopt at end of input. Throws DataError if the
  /// first non-blank line is not the header.
  std::optional<FrameInput> next();

private:
  struct Pending {
    double timestamp_s = 0.0;
    std::size_t line = 0;
    SensorFrame frame;
    std::optional<std::string> error;
  };

  bool read_header();
  FrameInput finish(Pending&& p) const;

  std::istream& in_;
  std::size_t line_ = 0;
  bool header_checked_ = false;
  std::optional<Pending> pending_;
  std::deque<FrameInput> ready_;
};

std::vector<FrameInput> read_frames(std::istream& in);
void write_frames(std::ostream& out, std::span<const SensorFrame> frames);

/// One JSON object per line.
void write_record(std::ostream& out, const StreamRecord& record);
void write_summary(std::ostream& out, const StreamSummary& summary);

std::vector<FpcfSample> read_fpcf_table(std::istream& in, double chord_height_mm = 0.0);
void write_fpcf_table(std::ostream& out, std::span<const FpcfSample> samples);

void write_profile_grid(std::ostream& out, const ProfileGrid& grid);

std::vector<TrialRecord> read_trials(std::istream& in);

/// Either paired trials or a `flow_lps,error_pct` column, told apart by the
/// header.
struct MetricsInput {
  std::vector<TrialRecord> trials;
  std::vector<RateError> errors;
};
MetricsInput read_metrics_input(std::istream& in);

void write_error_table_text(std::ostream& out, const ErrorTable& table);
void write_error_table_csv(std::ostream& out, const ErrorTable& table);

} // namespace pipeflow
