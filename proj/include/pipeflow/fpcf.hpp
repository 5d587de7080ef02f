#pragma once

// Flow Profile Correction Factor: ratio of the area-mean to the chord-mean
// normalized velocity, its tabulation over water levels, and the polynomial
// used at run time.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pipeflow/geometry.hpp"
#include "pipeflow/quadrature.hpp"
#include "pipeflow/velocity_profile.hpp"

namespace pipeflow {

/// The acoustic chord lies above the free surface.
class DryPathError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// One of the two mean velocities is not positive, so the ratio is meaningless.
class DegenerateProfileError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Level outside the polynomial's validity range.
class FpcfRangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// -------------------------------------------------------------
// Segment and chord means of an arbitrary field f(x, y)
// -------------------------------------------------------------

namespace detail {

inline QuadratureSpec inner_spec(const QuadratureSpec& outer, double width) {
  QuadratureSpec inner = outer;
  inner.rel_tol = 0.1 * outer.rel_tol;
  inner.abs_tol = std::max(0.1 * outer.abs_tol, 1e-3 * outer.rel_tol * width);
  return inner;
}

inline void require_chord(double chord_height_m, WaterLevel level) {
  if (!(chord_height_m > 0.0)) {
    throw std::domain_error("chord height must be above the invert, got " +
                            std::to_string(chord_height_m) + " m");
  }
  if (chord_height_m > level.meters()) {
    throw DryPathError("chord at " + std::to_string(chord_height_m * 1e3) +
                       " mm lies above the water level " + std::to_string(level.millimeters()) +
                       " mm");
  }
}

} // namespace detail

/// (1/A) * integral of field over the wetted segment; y outer, x inner, with
/// the inner limits mapped exactly onto [-w(y), w(y)].
template <typename Field>
double mean_area_velocity(const Field& field, const PipeGeometry& pipe, WaterLevel level,
                          const QuadratureSpec& quad = {}) {
  if (!(level.meters() > 0.0)) throw std::domain_error("mean_area_velocity: level must be > 0");
  const double area = segment_area(level, pipe);
  QuadratureSpec outer = quad;
  outer.abs_tol = std::max(quad.abs_tol, 1e-2 * quad.rel_tol * area);

  auto row = [&](double y) {
    const double w = chord_half_width(y, pipe);
    if (w <= 0.0) return 0.0;
    auto along = [&](double x) { return field(x, y); };
    return integrate(along, -w, w, detail::inner_spec(quad, 2.0 * w));
  };
  return integrate(row, 0.0, level.meters(), outer) / area;
}

/// (1/2w) * integral of field along the horizontal chord at height y.
template <typename Field>
double mean_chord_velocity(const Field& field, const PipeGeometry& pipe, WaterLevel level,
                           double chord_height_m, const QuadratureSpec& quad = {}) {
  detail::require_chord(chord_height_m, level);
  const double w = chord_half_width(chord_height_m, pipe);
  if (!(w > 0.0)) throw std::domain_error("mean_chord_velocity: chord has zero length");
  QuadratureSpec spec = quad;
  spec.abs_tol = std::max(quad.abs_tol, 1e-2 * quad.rel_tol * 2.0 * w);
  auto along = [&](double x) { return field(x, chord_height_m); };
  return integrate(along, -w, w, spec) / (2.0 * w);
}

template <typename Field>
double fpcf(const Field& field, const PipeGeometry& pipe, WaterLevel level, double chord_height_m,
            const QuadratureSpec& quad = {}) {
  const double chord_mean = mean_chord_velocity(field, pipe, level, chord_height_m, quad);
  if (!(chord_mean > 0.0)) {
    throw DegenerateProfileError("fpcf: chord-mean velocity " + std::to_string(chord_mean) +
                                 " is not positive");
  }
  const double area_mean = mean_area_velocity(field, pipe, level, quad);
  if (!(area_mean > 0.0)) {
    throw DegenerateProfileError("fpcf: area-mean velocity " + std::to_string(area_mean) +
                                 " is not positive");
  }
  return area_mean / chord_mean;
}

double mean_area_velocity(const ProfileModel& model, const QuadratureSpec& quad = {});
double mean_chord_velocity(const ProfileModel& model, double chord_height_m,
                           const QuadratureSpec& quad = {});
double fpcf(const ProfileModel& model, double chord_height_m, const QuadratureSpec& quad = {});

/// FPCF evaluated with a uniform tensor rule of `panels` x `panels` panels.
/// Used for refinement studies; carries no error control.
double fpcf_uniform(const ProfileModel& model, double chord_height_m, int panels,
                    int nodes_per_panel = 8);

// -------------------------------------------------------------
// Tabulation
// -------------------------------------------------------------

struct FpcfSample {
  double level_mm = 0.0;
  double chord_height_mm = 0.0;
  double value = 0.0;
};

struct FpcfSampleFailure {
  double level_mm = 0.0;
  std::string message;
};

struct FpcfTable {
  std::vector<FpcfSample> samples;
  std::vector<FpcfSampleFailure> failures;

  bool complete() const noexcept { return failures.empty(); }
};

struct LevelRange {
  double min_mm = 50.0;
  double max_mm = 250.0;
  double step_mm = 10.0;

  /// Levels min, min+step, ... not exceeding max.
  std::vector<double> levels() const;
};

struct ProfileSetup {
  EntropyParams params{};
  DipPositionPoly dip{};
  ProfileOptions options{};
};

/// Evaluates the FPCF at every level of `range`. Samples are computed in
/// parallel; output order follows the levels. A sample that throws is recorded
/// in `failures` instead of `samples`.
FpcfTable tabulate_fpcf(const PipeGeometry& pipe, const ProfileSetup& profile,
                        double chord_height_mm, const LevelRange& range,
                        const QuadratureSpec& quad = {});

// -------------------------------------------------------------
// Polynomial
// -------------------------------------------------------------

struct FitDiagnostics {
  double rms_residual = 0.0;
  double max_residual = 0.0;
  double max_relative_residual = 0.0;
  std::size_t sample_count = 0;
};

/// FPCF(H) = sum c_k H^k with H in millimeters, valid on [min_mm, max_mm].
class FpcfPolynomial {
public:
  FpcfPolynomial(std::vector<double> coefficients, double min_mm, double max_mm);

  /// The degree-6 polynomial published for the 250 mm test rig.
  static FpcfPolynomial published_250mm();

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
  double min_mm() const noexcept { return min_mm_; }
  double max_mm() const noexcept { return max_mm_; }
  bool in_range(double level_mm) const noexcept;

  /// Horner evaluation without the range guard.
  double evaluate_unchecked(double level_mm) const noexcept;

  const std::optional<FitDiagnostics>& diagnostics() const noexcept { return diagnostics_; }
  void set_diagnostics(FitDiagnostics d) { diagnostics_ = d; }

private:
  std::vector<double> coefficients_;
  double min_mm_;
  double max_mm_;
  std::optional<FitDiagnostics> diagnostics_;
};

/// Least-squares fit of FPCF against level (mm). The abscissa is scaled by
/// max|H| before building the Vandermonde system, then the coefficients are
/// mapped back.
FpcfPolynomial fit_polynomial(std::span<const FpcfSample> samples, int degree = 6);

/// Guarded evaluation; throws FpcfRangeError outside the validity range.
double eval_fpcf(const FpcfPolynomial& poly, double level_mm);

} // namespace pipeflow
