#include "pipeflow/clogging.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pipeflow {

void DecisionBoundary::validate() const {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw std::invalid_argument("DecisionBoundary: slope must be positive");
  }
  if (!std::isfinite(intercept)) throw std::invalid_argument("DecisionBoundary: intercept must be finite");
}

Verdict classify(double level_mm, double velocity_m_s, const DecisionBoundary& boundary) {
  if (!(level_mm >= 0.0)) {
    throw std::invalid_argument("classify: level must be >= 0, got " + std::to_string(level_mm));
  }
  // On the line counts as normal.
  return velocity_m_s < boundary.velocity_at(level_mm) ? Verdict::Clogging : Verdict::Normal;
}

AlarmStep step_alarm(const AlarmState& state, Verdict verdict) {
  if (state.debounce < 1) throw std::invalid_argument("step_alarm: debounce must be >= 1");
  AlarmStep step{state, std::nullopt};
  AlarmState& next = step.state;
  if (verdict == Verdict::Normal) {
    if (state.level == AlarmLevel::Alarm) step.event = AlarmEventKind::Cleared;
    next.consecutive = 0;
    next.level = AlarmLevel::Normal;
    return step;
  }
  next.consecutive = state.consecutive + 1;
  if (next.consecutive >= state.debounce) {
    if (state.level != AlarmLevel::Alarm) step.event = AlarmEventKind::Raised;
    next.level = AlarmLevel::Alarm;
  } else {
    next.level = AlarmLevel::Suspect;
  }
  return step;
}

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::Normal ? "normal" : "clogging";
}

std::string_view to_string(AlarmLevel level) noexcept {
  switch (level) {
  case AlarmLevel::Normal: return "normal";
  case AlarmLevel::Suspect: return "suspect";
  case AlarmLevel::Alarm: return "alarm";
  }
  return "unknown";
}

std::string_view to_string(AlarmEventKind kind) noexcept {
  return kind == AlarmEventKind::Raised ? "raised" : "cleared";
}

} // namespace pipeflow
