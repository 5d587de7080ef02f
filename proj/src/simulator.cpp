#include "pipeflow/simulator.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace pipeflow {

std::string_view to_string(WeirMode mode) noexcept {
  switch (mode) {
  case WeirMode::None: return "none";
  case WeirMode::Weir1: return "weir1";
  case WeirMode::Weir2: return "weir2";
  }
  return "unknown";
}

WeirMode parse_weir_mode(std::string_view text) {
  if (text == "none") return WeirMode::None;
  if (text == "weir1") return WeirMode::Weir1;
  if (text == "weir2") return WeirMode::Weir2;
  throw std::invalid_argument("unknown weir mode '" + std::string(text) + "'");
}

void WeirModel::validate() const {
  if (!(uplift_weir1 > 0.0) || !(uplift_weir2 > 0.0)) {
    throw std::invalid_argument("WeirModel: uplift factors must be > 0");
  }
}

double WeirModel::uplift(WeirMode mode) const noexcept {
  switch (mode) {
  case WeirMode::Weir1: return uplift_weir1;
  case WeirMode::Weir2: return uplift_weir2;
  case WeirMode::None: break;
  }
  return 0.0;
}

void ScenarioSpec::validate() const {
  if (!(flow_lps >= 0.0) || !std::isfinite(flow_lps)) {
    throw std::invalid_argument("ScenarioSpec: flow must be >= 0");
  }
  if (level_mm && !(*level_mm > 0.0)) throw std::invalid_argument("ScenarioSpec: level must be > 0");
  if (!level_mm && !(flow_lps > 0.0)) {
    throw std::invalid_argument("ScenarioSpec: zero flow needs an explicit level");
  }
  if (!(sound_speed_m_s > 0.0)) throw std::invalid_argument("ScenarioSpec: sound speed must be > 0");
  if (!(noise_s >= 0.0)) throw std::invalid_argument("ScenarioSpec: noise sigma must be >= 0");
  if (!(interval_s > 0.0)) throw std::invalid_argument("ScenarioSpec: frame interval must be > 0");
}

double baseline_level_mm(double flow_lps) {
  if (!(flow_lps > 0.0)) throw std::invalid_argument("baseline_level_mm: flow must be > 0");
  static const double exponent = std::log(100.0 / 65.0) / std::log(3.0);
  return 65.0 * std::pow(flow_lps / 2.0, exponent);
}

double chord_velocity_from_truth(double flow_m3s, WaterLevel level, const ChordSpec& chord,
                                 const PipeGeometry& pipe, const ProfileSetup& profile,
                                 const QuadratureSpec& quad) {
  const double y = chord.height_mm * 1e-3;
  if (!(y < level.meters())) {
    throw DryPathError("chord_velocity_from_truth: chord '" + chord.id + "' is dry");
  }
  if (flow_m3s == 0.0) return 0.0;
  const ProfileModel model(pipe, level, profile.params, profile.dip, profile.options);
  return flow_m3s / (segment_area(level, pipe) * fpcf(model, y, quad));
}

TransitTimes transit_times(double velocity_m_s, const ChordSpec& chord, double sound_speed_m_s) {
  const double axial = velocity_m_s * std::cos(chord.beam_angle_rad);
  if (!(std::abs(axial) < sound_speed_m_s)) {
    throw std::domain_error("transit_times: axial velocity reaches the speed of sound");
  }
  return {chord.path_length_m / (sound_speed_m_s + axial),
          chord.path_length_m / (sound_speed_m_s - axial)};
}

OperatingPoint weir_shift(double flow_m3s, const OperatingPoint& baseline, WeirMode mode,
                          const PipeGeometry& pipe, const WeirModel& weir) {
  if (mode == WeirMode::None) return baseline;
  weir.validate();
  const double shifted = baseline.level_mm * (1.0 + weir.uplift(mode));
  if (shifted > pipe.diameter() * 1e3) {
    throw std::domain_error("weir_shift: backwater level " + std::to_string(shifted) +
                            " mm exceeds the pipe crown");
  }
  return {shifted, flow_m3s / segment_area(WaterLevel::from_mm(shifted), pipe)};
}

ScenarioTruth scenario_truth(const ScenarioSpec& scenario, const SimulationSetup& setup) {
  scenario.validate();
  const double flow = scenario.flow_lps * 1e-3;
  const double baseline = scenario.level_mm ? *scenario.level_mm : baseline_level_mm(scenario.flow_lps);
  if (baseline > setup.pipe.diameter() * 1e3) {
    throw std::domain_error("scenario level exceeds the pipe diameter");
  }

  ScenarioTruth truth;
  truth.chord_velocity_m_s.assign(setup.chords.size(), std::numeric_limits<double>::quiet_NaN());
  if (scenario.weir == WeirMode::None) {
    truth.level_mm = baseline;
    const WaterLevel level = WaterLevel::from_mm(baseline);
    for (std::size_t i = 0; i < setup.chords.size(); ++i) {
      if (!(setup.chords[i].height_mm < baseline)) continue;
      // Chords at the same height share one quadrature.
      bool reused = false;
      for (std::size_t j = 0; j < i; ++j) {
        if (setup.chords[j].height_mm == setup.chords[i].height_mm) {
          truth.chord_velocity_m_s[i] = truth.chord_velocity_m_s[j];
          reused = true;
          break;
        }
      }
      if (!reused) {
        truth.chord_velocity_m_s[i] = chord_velocity_from_truth(flow, level, setup.chords[i],
                                                                setup.pipe, setup.profile, setup.quad);
      }
    }
    return truth;
  }

  const OperatingPoint point = weir_shift(flow, {baseline, 0.0}, scenario.weir, setup.pipe, setup.weir);
  truth.level_mm = point.level_mm;
  for (std::size_t i = 0; i < setup.chords.size(); ++i) {
    if (setup.chords[i].height_mm < point.level_mm) truth.chord_velocity_m_s[i] = point.velocity_m_s;
  }
  return truth;
}

std::vector<SensorFrame> generate(const ScenarioSpec& scenario, const SimulationSetup& setup) {
  if (setup.chords.empty()) throw std::invalid_argument("generate: no chords configured");
  for (const ChordSpec& c : setup.chords) c.validate();
  const ScenarioTruth truth = scenario_truth(scenario, setup);

  std::vector<TransitTimes> clean(setup.chords.size());
  for (std::size_t i = 0; i < setup.chords.size(); ++i) {
    if (std::isnan(truth.chord_velocity_m_s[i])) continue;
    clean[i] = transit_times(truth.chord_velocity_m_s[i], setup.chords[i], scenario.sound_speed_m_s);
  }

  const std::uint64_t id_hash = std::hash<std::string>{}(scenario.id);
  std::seed_seq seq{static_cast<std::uint32_t>(scenario.seed), static_cast<std::uint32_t>(scenario.seed >> 32),
                    static_cast<std::uint32_t>(id_hash), static_cast<std::uint32_t>(id_hash >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> jitter(0.0, 1.0);

  std::vector<SensorFrame> frames;
  frames.reserve(scenario.frame_count);
  for (std::size_t k = 0; k < scenario.frame_count; ++k) {
    SensorFrame frame;
    frame.timestamp_s = scenario.start_s + static_cast<double>(k) * scenario.interval_s;
    frame.level_mm = truth.level_mm;
    for (std::size_t i = 0; i < setup.chords.size(); ++i) {
      if (std::isnan(truth.chord_velocity_m_s[i])) continue;
      ChordReading r{setup.chords[i].id, clean[i].t_up_s, clean[i].t_down_s};
      if (scenario.noise_s > 0.0) {
        r.t_up_s += scenario.noise_s * jitter(rng);
        r.t_down_s += scenario.noise_s * jitter(rng);
      }
      frame.readings.push_back(std::move(r));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

} // namespace pipeflow
