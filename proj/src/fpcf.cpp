#include "pipeflow/fpcf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

namespace pipeflow {

namespace {

struct ModelField {
  const ProfileModel& model;
  double operator()(double x, double y) const { return model.normalized_velocity(x, y); }
};

} // namespace

double mean_area_velocity(const ProfileModel& model, const QuadratureSpec& quad) {
  return mean_area_velocity(ModelField{model}, model.pipe(), model.level(), quad);
}

double mean_chord_velocity(const ProfileModel& model, double chord_height_m,
                           const QuadratureSpec& quad) {
  return mean_chord_velocity(ModelField{model}, model.pipe(), model.level(), chord_height_m, quad);
}

double fpcf(const ProfileModel& model, double chord_height_m, const QuadratureSpec& quad) {
  return fpcf(ModelField{model}, model.pipe(), model.level(), chord_height_m, quad);
}

double fpcf_uniform(const ProfileModel& model, double chord_height_m, int panels,
                    int nodes_per_panel) {
  detail::require_chord(chord_height_m, model.level());
  const PipeGeometry& pipe = model.pipe();
  const double level = model.level().meters();

  auto row = [&](double y) {
    const double w = chord_half_width(y, pipe);
    if (w <= 0.0) return 0.0;
    return integrate_uniform([&](double x) { return model.normalized_velocity(x, y); }, -w, w,
                             panels, nodes_per_panel);
  };
  const double area_mean =
      integrate_uniform(row, 0.0, level, panels, nodes_per_panel) / segment_area(model.level(), pipe);

  const double w = chord_half_width(chord_height_m, pipe);
  const double chord_mean =
      integrate_uniform([&](double x) { return model.normalized_velocity(x, chord_height_m); }, -w,
                        w, panels, nodes_per_panel) /
      (2.0 * w);
  if (!(chord_mean > 0.0) || !(area_mean > 0.0)) {
    throw DegenerateProfileError("fpcf_uniform: non-positive mean velocity");
  }
  return area_mean / chord_mean;
}

// -------------------------------------------------------------
// Tabulation
// -------------------------------------------------------------

std::vector<double> LevelRange::levels() const {
  if (!(step_mm > 0.0)) throw std::invalid_argument("LevelRange: step must be > 0");
  if (!(max_mm >= min_mm)) throw std::invalid_argument("LevelRange: max must be >= min");
  const auto count = static_cast<std::size_t>(std::floor((max_mm - min_mm) / step_mm + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = min_mm + static_cast<double>(i) * step_mm;
  return out;
}

FpcfTable tabulate_fpcf(const PipeGeometry& pipe, const ProfileSetup& profile,
                        double chord_height_mm, const LevelRange& range,
                        const QuadratureSpec& quad) {
  if (range.min_mm < chord_height_mm) {
    throw std::invalid_argument("tabulate_fpcf: minimum level " + std::to_string(range.min_mm) +
                                " mm lies below the chord at " + std::to_string(chord_height_mm) +
                                " mm");
  }
  if (range.max_mm > pipe.diameter() * 1e3 * (1.0 + 1e-12)) {
    throw std::invalid_argument("tabulate_fpcf: maximum level exceeds the pipe diameter");
  }
  const std::vector<double> levels = range.levels();

  struct Outcome {
    std::optional<double> value;
    std::string error;
  };
  auto evaluate = [&](double level_mm) -> Outcome {
    try {
      const ProfileModel model(pipe, WaterLevel::from_mm(level_mm), profile.params, profile.dip,
                               profile.options);
      return {fpcf(model, chord_height_mm * 1e-3, quad), {}};
    } catch (const std::exception& e) {
      return {std::nullopt, e.what()};
    }
  };

  std::vector<Outcome> outcomes(levels.size());
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, levels.size());
  std::vector<std::future<void>> jobs;
  jobs.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < levels.size(); i += workers) outcomes[i] = evaluate(levels[i]);
    }));
  }
  for (auto& job : jobs) job.get();

  FpcfTable table;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (outcomes[i].value) {
      table.samples.push_back({levels[i], chord_height_mm, *outcomes[i].value});
    } else {
      table.failures.push_back({levels[i], outcomes[i].error});
    }
  }
  return table;
}

// -------------------------------------------------------------
// Polynomial
// -------------------------------------------------------------

FpcfPolynomial::FpcfPolynomial(std::vector<double> coefficients, double min_mm, double max_mm)
    : coefficients_(std::move(coefficients)), min_mm_(min_mm), max_mm_(max_mm) {
  if (coefficients_.empty()) throw std::invalid_argument("FpcfPolynomial: no coefficients");
  if (!(max_mm_ >= min_mm_)) throw std::invalid_argument("FpcfPolynomial: empty validity range");
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw std::invalid_argument("FpcfPolynomial: non-finite coefficient");
  }
}

FpcfPolynomial FpcfPolynomial::published_250mm() {
  return FpcfPolynomial({6.03e-1, 1.24e-2, -1.81e-4, 1.24e-6, -1.96e-9, -1.35e-11, 4.22e-14}, 50.0,
                        250.0);
}

bool FpcfPolynomial::in_range(double level_mm) const noexcept {
  const double slack = 1e-9 * std::max(1.0, std::abs(max_mm_));
  return level_mm >= min_mm_ - slack && level_mm <= max_mm_ + slack;
}

double FpcfPolynomial::evaluate_unchecked(double level_mm) const noexcept {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * level_mm + *it;
  return acc;
}

double eval_fpcf(const FpcfPolynomial& poly, double level_mm) {
  if (!poly.in_range(level_mm)) {
    throw FpcfRangeError("eval_fpcf: level " + std::to_string(level_mm) + " mm outside [" +
                         std::to_string(poly.min_mm()) + ", " + std::to_string(poly.max_mm()) +
                         "] mm");
  }
  return poly.evaluate_unchecked(level_mm);
}

FpcfPolynomial fit_polynomial(std::span<const FpcfSample> samples, int degree) {
  if (degree < 0) throw FitError("fit_polynomial: degree must be >= 0");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index terms = degree + 1;
  if (n <= degree) {
    throw FitError("fit_polynomial: " + std::to_string(n) + " samples cannot determine a degree " +
                   std::to_string(degree) + " polynomial");
  }

  Eigen::VectorXd level(n), value(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    level(i) = samples[static_cast<std::size_t>(i)].level_mm;
    value(i) = samples[static_cast<std::size_t>(i)].value;
  }
  if (!level.allFinite() || !value.allFinite()) throw FitError("fit_polynomial: non-finite sample");
  const double scale = level.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw FitError("fit_polynomial: all levels are zero");

  const Eigen::ArrayXd x = level.array() / scale;
  Eigen::MatrixXd vandermonde(n, terms);
  vandermonde.col(0).setOnes();
  for (Eigen::Index k = 1; k < terms; ++k) {
    vandermonde.col(k) = (vandermonde.col(k - 1).array() * x).matrix();
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  qr.setThreshold(1e-12);
  if (qr.rank() < terms) {
    throw FitError("fit_polynomial: rank-deficient system (rank " + std::to_string(qr.rank()) +
                   " < " + std::to_string(terms) + ")");
  }
  const Eigen::VectorXd scaled = qr.solve(value);

  std::vector<double> coefficients(static_cast<std::size_t>(terms));
  double power = 1.0;
  for (Eigen::Index k = 0; k < terms; ++k) {
    coefficients[static_cast<std::size_t>(k)] = scaled(k) / power;
    power *= scale;
  }

  FpcfPolynomial poly(std::move(coefficients), level.minCoeff(), level.maxCoeff());
  FitDiagnostics diag;
  diag.sample_count = samples.size();
  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = poly.evaluate_unchecked(level(i)) - value(i);
    sum_sq += r * r;
    diag.max_residual = std::max(diag.max_residual, std::abs(r));
    if (value(i) != 0.0) {
      diag.max_relative_residual = std::max(diag.max_relative_residual, std::abs(r / value(i)));
    }
  }
  diag.rms_residual = std::sqrt(sum_sq / static_cast<double>(n));
  poly.set_diagnostics(diag);
  return poly;
}

} // namespace pipeflow
