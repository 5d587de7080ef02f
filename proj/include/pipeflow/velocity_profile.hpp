#pragma once

// Tsallis-entropy velocity distribution for a partially filled circular pipe,
// evaluated in normalized form v / v_max.

#include <Eigen/Core>

#include <array>
#include <stdexcept>
#include <string>

#include "pipeflow/geometry.hpp"

namespace pipeflow {

struct EntropyParams {
  double M = 0.89;
  double q = 1.15;

  void validate() const;
  /// (1 - M)^(q/(q-1)), the additive floor inside the bracket.
  double floor_term() const;
};

/// Cubic h/H = c3 (H/D)^3 + c2 (H/D)^2 + c1 (H/D) + c0 for the height of the
/// velocity maximum on the centerline.
struct DipPositionPoly {
  double c3 = 1.78;
  double c2 = -2.46;
  double c1 = -0.18;
  double c0 = 1.00;

  /// Smallest ratio returned; keeps ln(h') finite.
  static constexpr double kFloor = 1e-3;

  double raw(double relative_level) const {
    return ((c3 * relative_level + c2) * relative_level + c1) * relative_level + c0;
  }
};

/// Ratio h/H for a relative level H/D, clamped into [kFloor, 1].
double dip_ratio(double relative_level, const DipPositionPoly& dip = {});

/// Multiplier applied to F inside the bracket of the normalized-velocity law.
enum class BracketFactor {
  WallOverHeight, ///< y'/y, as printed
  Unity,          ///< alternate reading, for sensitivity studies
};

/// Treatment of 1 - (y'/h' - 1)^(2L) when it turns negative above the dip.
/// This happens whenever H' > 2h', i.e. the dip sits in the lower half of the
/// local depth (H/D above roughly 0.51 with the default dip polynomial).
enum class UpperBranchPolicy {
  ClampToZero, ///< F = 0 beyond the zero crossing (continuous extension)
  Fault,       ///< throw NumericalDomainError
};

struct ProfileOptions {
  bool clamp_nonnegative = false;
  BracketFactor bracket = BracketFactor::WallOverHeight;
  UpperBranchPolicy upper_branch = UpperBranchPolicy::ClampToZero;
};

/// A negative base reached a non-integer power.
class NumericalDomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

struct ProfilePoint {
  double x = 0.0; ///< horizontal offset from the centerline, m
  double y = 0.0; ///< height above the invert, m
};

/// Local quantities on the vertical through x.
struct LocalFrame {
  double y_local = 0.0;     ///< y' : height above the wall
  double depth_local = 0.0; ///< H' : local depth
  double dip_local = 0.0;   ///< h' : local dip height
};

class ProfileModel {
public:
  ProfileModel(PipeGeometry pipe, WaterLevel level, EntropyParams params = {},
               DipPositionPoly dip = {}, ProfileOptions options = {});

  const PipeGeometry& pipe() const noexcept { return pipe_; }
  WaterLevel level() const noexcept { return level_; }
  const EntropyParams& params() const noexcept { return params_; }
  const ProfileOptions& options() const noexcept { return options_; }

  double dip_ratio() const noexcept { return dip_ratio_; }
  /// h, height of the velocity maximum on the centerline.
  double dip_height() const noexcept { return dip_ratio_ * level_.meters(); }

  bool is_wetted(ProfilePoint p) const noexcept;
  LocalFrame local_frame(ProfilePoint p) const;
  double velocity_cdf(ProfilePoint p) const;
  double normalized_velocity(ProfilePoint p) const;
  double normalized_velocity(double x, double y) const { return normalized_velocity({x, y}); }

  /// Value of the law at F = 0 (pipe wall), before optional clamping.
  double wall_value() const noexcept;

private:
  double wall_offset(double x) const noexcept;
  double bracket_factor(double y_local, double y) const noexcept;
  double velocity_from_cdf(double factor, double cdf) const;

  PipeGeometry pipe_;
  WaterLevel level_;
  EntropyParams params_;
  ProfileOptions options_;
  double dip_ratio_;
  double floor_term_;
};

/// Rectangular sample of the profile over x in [-R, R], y in [0, H]. Points
/// outside the wetted segment hold NaN.
struct ProfileGrid {
  Eigen::VectorXd x;      ///< nx abscissae, m
  Eigen::VectorXd y;      ///< ny ordinates, m
  Eigen::ArrayXXd values; ///< ny x nx, row i at y(i)

  Eigen::Index wetted_count() const;
};

ProfileGrid profile_grid(const ProfileModel& model, int nx, int ny);

} // namespace pipeflow
