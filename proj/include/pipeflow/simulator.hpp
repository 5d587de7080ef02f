#pragma once

// Synthetic sensor frames from a known operating point, with an empirical
// weir backwater model for blockage scenarios.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pipeflow/fpcf.hpp"
#include "pipeflow/measurement.hpp"

namespace pipeflow {

enum class WeirMode { None, Weir1, Weir2 };
std::string_view to_string(WeirMode mode) noexcept;
WeirMode parse_weir_mode(std::string_view text);

/// Level uplift factors: H_shifted = H * (1 + u).
struct WeirModel {
  double uplift_weir1 = 0.35;
  double uplift_weir2 = 0.80;

  void validate() const;
  double uplift(WeirMode mode) const noexcept;
};

struct ScenarioSpec {
  std::string id = "scenario";
  double flow_lps = 4.0;
  std::optional<double> level_mm; ///< baseline level; the rating curve when absent
  WeirMode weir = WeirMode::None;
  double sound_speed_m_s = 1480.0;
  double noise_s = 0.0; ///< Gaussian sigma on each transit time
  std::uint64_t seed = 0;
  std::size_t frame_count = 100;
  double interval_s = 1.0;
  double start_s = 0.0;

  void validate() const;
};

struct SimulationSetup {
  PipeGeometry pipe{0.25};
  std::vector<ChordSpec> chords;
  ProfileSetup profile{};
  QuadratureSpec quad{};
  WeirModel weir{};
};

/// Free-flow level for a flow rate on the test rig: 65 mm at 2 L/s and 100 mm
/// at 6 L/s, power law in between.
double baseline_level_mm(double flow_lps);

/// Line velocity that a chord at Y sees when Q flows at level H, using the
/// quadrature FPCF: v = Q / (A(H) * FPCF(H, Y)).
double chord_velocity_from_truth(double flow_m3s, WaterLevel level, const ChordSpec& chord,
                                 const PipeGeometry& pipe, const ProfileSetup& profile,
                                 const QuadratureSpec& quad = {});

struct TransitTimes {
  double t_up_s = 0.0;
  double t_down_s = 0.0;
};

/// t_up = L/(c + v cos(theta)), t_down = L/(c - v cos(theta)).
TransitTimes transit_times(double velocity_m_s, const ChordSpec& chord, double sound_speed_m_s);

struct OperatingPoint {
  double level_mm = 0.0;
  double velocity_m_s = 0.0;
};

/// Backwater behind a weir at constant Q: the level rises by the uplift factor
/// and the flow pools, so every chord sees the section mean Q / A(H_shifted).
/// WeirMode::None returns the baseline point unchanged.
OperatingPoint weir_shift(double flow_m3s, const OperatingPoint& baseline, WeirMode mode,
                          const PipeGeometry& pipe, const WeirModel& weir = {});

/// Noise-free chord velocities for the scenario, one per configured chord;
/// NaN marks a dry chord.
struct ScenarioTruth {
  double level_mm = 0.0;
  std::vector<double> chord_velocity_m_s;
};
ScenarioTruth scenario_truth(const ScenarioSpec& scenario, const SimulationSetup& setup);

/// Frames at the scenario interval. Each transit time gets independent
/// Gaussian jitter; the stream is seeded from (seed, scenario id). Dry chords
/// are omitted from the readings.
std::vector<SensorFrame> generate(const ScenarioSpec& scenario, const SimulationSetup& setup);

} // namespace pipeflow
