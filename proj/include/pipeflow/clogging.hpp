#pragma once

// Linear velocity-level decision boundary and a debounced alarm.

#include <optional>
#include <string_view>

namespace pipeflow {

/// v_boundary(H) = slope * H + intercept, H in mm, v in m/s.
struct DecisionBoundary {
  double slope = 0.00321;
  double intercept = -0.02;

  void validate() const;
  double velocity_at(double level_mm) const noexcept { return slope * level_mm + intercept; }
};

enum class Verdict { Normal, Clogging };

/// Clogging iff v lies strictly below the boundary.
Verdict classify(double level_mm, double velocity_m_s, const DecisionBoundary& boundary = {});

enum class AlarmLevel { Normal, Suspect, Alarm };
enum class AlarmEventKind { Raised, Cleared };

struct AlarmState {
  AlarmLevel level = AlarmLevel::Normal;
  int consecutive = 0; ///< consecutive Clogging verdicts
  int debounce = 5;
};

struct AlarmStep {
  AlarmState state;
  std::optional<AlarmEventKind> event;
};

AlarmStep step_alarm(const AlarmState& state, Verdict verdict);

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(AlarmLevel level) noexcept;
std::string_view to_string(AlarmEventKind kind) noexcept;

} // namespace pipeflow
