#include "pipeflow/velocity_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pipeflow {

namespace {

constexpr double kGeomEps = 1e-12;

// pow() for the non-integer exponents of the CDF; the base must be >= 0.
double checked_pow(double base, double exponent, const char* what) {
  if (base < 0.0) {
    if (base > -1e-14) return 0.0;
    throw NumericalDomainError(std::string("velocity_cdf: negative base in ") + what + " (" +
                               std::to_string(base) + ")");
  }
  return std::pow(base, exponent);
}

} // namespace

void EntropyParams::validate() const {
  if (!(M > 0.0 && M < 1.0)) {
    throw std::invalid_argument("EntropyParams: M must lie in (0, 1), got " + std::to_string(M));
  }
  if (!(q > 1.0) || !std::isfinite(q)) {
    throw std::invalid_argument("EntropyParams: q must exceed 1, got " + std::to_string(q));
  }
}

double EntropyParams::floor_term() const { return std::pow(1.0 - M, q / (q - 1.0)); }

double dip_ratio(double relative_level, const DipPositionPoly& dip) {
  if (!(relative_level >= 0.0 && relative_level <= 1.0)) {
    throw std::domain_error("dip_ratio: relative level " + std::to_string(relative_level) +
                            " outside [0, 1]");
  }
  return std::clamp(dip.raw(relative_level), DipPositionPoly::kFloor, 1.0);
}

ProfileModel::ProfileModel(PipeGeometry pipe, WaterLevel level, EntropyParams params,
                           DipPositionPoly dip, ProfileOptions options)
    : pipe_(pipe), level_(level), params_(params), options_(options) {
  params_.validate();
  if (!(level.meters() > 0.0) || level.meters() > pipe.diameter()) {
    throw std::domain_error("ProfileModel: level " + std::to_string(level.meters()) +
                            " m must lie in (0, D]");
  }
  dip_ratio_ = pipeflow::dip_ratio(level.meters() / pipe.diameter(), dip);
  floor_term_ = params_.floor_term();
}

double ProfileModel::wall_offset(double x) const noexcept {
  const double r = pipe_.radius();
  const double w2 = r * r - x * x;
  return r - (w2 > 0.0 ? std::sqrt(w2) : 0.0);
}

bool ProfileModel::is_wetted(ProfilePoint p) const noexcept {
  const double r = pipe_.radius();
  const double tol = kGeomEps * pipe_.diameter();
  if (std::abs(p.x) > r + tol) return false;
  if (p.y > level_.meters() + tol || p.y < -tol) return false;
  return p.y >= wall_offset(std::min(std::abs(p.x), r)) - tol;
}

LocalFrame ProfileModel::local_frame(ProfilePoint p) const {
  const double offset = wall_offset(std::min(std::abs(p.x), pipe_.radius()));
  LocalFrame f;
  f.y_local = std::max(p.y - offset, 0.0);
  f.depth_local = level_.meters() - offset;
  if (!(f.depth_local > 0.0)) {
    throw std::domain_error("local_frame: vertical at x = " + std::to_string(p.x) +
                            " m has no wetted depth");
  }
  f.dip_local = dip_ratio_ * f.depth_local;
  return f;
}

double ProfileModel::velocity_cdf(ProfilePoint p) const {
  if (!is_wetted(p)) {
    throw std::domain_error("velocity_cdf: point (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") outside the wetted segment");
  }
  const double offset = wall_offset(std::min(std::abs(p.x), pipe_.radius()));
  if (p.y - offset <= 0.0) return 0.0;

  const LocalFrame f = local_frame(p);
  const double two_r = pipe_.diameter();
  const double s = std::numbers::ln2 / (std::log(two_r) - std::log(f.dip_local));

  const double u = f.y_local / two_r;
  const double us = checked_pow(u, s, "(y'/2R)^s");
  const double vertical = 4.0 * (us - us * us);

  const double t = f.y_local / f.dip_local - 1.0;
  double dip_term;
  if (f.y_local <= f.dip_local) {
    dip_term = 1.0 - t * t;
  } else {
    const double l_exp = 2.0 * dip_ratio_;
    const double k_exp = 2.0 * (1.0 - dip_ratio_);
    double base = 1.0 - checked_pow(t, 2.0 * l_exp, "(y'/h' - 1)^(2L)");
    if (base < 0.0 && options_.upper_branch == UpperBranchPolicy::ClampToZero) base = 0.0;
    dip_term = checked_pow(base, k_exp, "(1 - (y'/h' - 1)^(2L))^K");
  }

  const double lateral_exp = pipe_.diameter() / level_.meters();
  const double lateral =
      1.0 - checked_pow(std::min(std::abs(p.x) / pipe_.radius(), 1.0), lateral_exp, "(|x|/R)^(D/H)");

  const double cdf = vertical * dip_term * lateral;
  if (std::isnan(cdf)) throw NumericalDomainError("velocity_cdf: NaN");
  return std::clamp(cdf, 0.0, 1.0);
}

double ProfileModel::bracket_factor(double y_local, double y) const noexcept {
  if (options_.bracket == BracketFactor::Unity) return 1.0;
  return y > 0.0 ? std::min(y_local / y, 1.0) : 0.0;
}

double ProfileModel::velocity_from_cdf(double factor, double cdf) const {
  const double inv_m = 1.0 / params_.M;
  const double bracket = factor * (1.0 - floor_term_) * cdf + floor_term_;
  double v = 1.0 - inv_m + inv_m * std::pow(bracket, 1.0 / params_.q);
  if (options_.clamp_nonnegative) v = std::max(v, 0.0);
  return v;
}

double ProfileModel::wall_value() const noexcept {
  return 1.0 - 1.0 / params_.M + std::pow(floor_term_, 1.0 / params_.q) / params_.M;
}

double ProfileModel::normalized_velocity(ProfilePoint p) const {
  const double cdf = velocity_cdf(p);
  if (p.y <= 0.0) return velocity_from_cdf(0.0, 0.0);
  const double offset = wall_offset(std::min(std::abs(p.x), pipe_.radius()));
  const double y_local = std::max(p.y - offset, 0.0);
  return velocity_from_cdf(bracket_factor(y_local, p.y), cdf);
}

Eigen::Index ProfileGrid::wetted_count() const {
  return (values == values).count();
}

ProfileGrid profile_grid(const ProfileModel& model, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("profile_grid: nx and ny must be >= 2");
  const double r = model.pipe().radius();
  const double h = model.level().meters();

  ProfileGrid grid;
  // Built from signed integers so that x(j) == -x(nx-1-j) exactly.
  grid.x.resize(nx);
  for (int j = 0; j < nx; ++j) grid.x(j) = r * static_cast<double>(2 * j - (nx - 1)) / (nx - 1);
  grid.y = Eigen::VectorXd::LinSpaced(ny, 0.0, h);
  grid.values.setConstant(ny, nx, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      const ProfilePoint p{grid.x(j), grid.y(i)};
      if (model.is_wetted(p)) grid.values(i, j) = model.normalized_velocity(p);
    }
  }
  return grid;
}

} // namespace pipeflow
