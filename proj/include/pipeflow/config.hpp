#pragma once

// Flat `key = value` run configuration.
//
//   pipe.diameter_mm = 250
//   chord.lower-a.height_mm = 50
//   chord.lower-a.angle_deg = 45
//   fpcf.mode = derive
//
// Blank lines and lines starting with '#' are ignored. Unknown and repeated
// keys are errors.

#include <cstddef>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pipeflow/calibration.hpp"
#include "pipeflow/clogging.hpp"
#include "pipeflow/fpcf.hpp"
#include "pipeflow/measurement.hpp"
#include "pipeflow/simulator.hpp"

namespace pipeflow {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict parse of the whole string; nullopt on any trailing text.
std::optional<double> parse_double(std::string_view text);

/// Fit the FPCF polynomial from the profile model at start-up.
struct FpcfDerive {
  LevelRange range{50.0, 120.0, 10.0};
  std::optional<double> chord_height_mm; ///< lowest chord when absent
  int degree = 6;
};

struct RunConfig {
  double diameter_mm = 250.0;
  ProfileSetup profile{};
  std::vector<ChordSpec> chords; ///< two crossed chords at 50 mm when empty
  std::variant<FpcfDerive, FpcfPolynomial> fpcf = FpcfDerive{};
  EstimatorSettings estimator{};
  DecisionBoundary boundary{};
  int debounce = 5;
  double viscosity_m2_s = kWaterViscosity;
  QuadratureSpec quad{};
  ScenarioSpec scenario{};
  WeirModel weir{};

  PipeGeometry pipe() const { return PipeGeometry::from_mm(diameter_mm); }
  /// Configured chords, or the default crossed pair.
  std::vector<ChordSpec> resolved_chords() const;
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// The polynomial to use at run time; a derive directive tabulates the
/// profile model and fits it. Throws ConfigError if that fails.
FpcfPolynomial resolve_polynomial(const RunConfig& config);

ProcessConfig make_process_config(const RunConfig& config);
ProcessConfig make_process_config(const RunConfig& config, FpcfPolynomial poly);
SimulationSetup make_simulation_setup(const RunConfig& config);

/// Config lines that select a fitted polynomial, with the fit residuals.
std::string polynomial_document(const FpcfPolynomial& poly);

} // namespace pipeflow
