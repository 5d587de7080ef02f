#pragma once

// Circular-segment geometry of a partially filled pipe.
//
// The scalar kernels are templated so that tests can evaluate the same
// expressions in long double; the strong-typed overloads below are what the
// rest of the library uses.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pipeflow {

template <typename Scalar>
inline constexpr Scalar pi_v = std::numbers::pi_v<Scalar>;

/// Water kinematic viscosity at about 20 degC, m^2/s.
inline constexpr double kWaterViscosity = 1.0e-6;

class PipeGeometry {
public:
  explicit PipeGeometry(double diameter_m) : diameter_(diameter_m) {
    if (!(diameter_m > 0.0) || !std::isfinite(diameter_m)) {
      throw std::invalid_argument("PipeGeometry: diameter must be positive, got " +
                                  std::to_string(diameter_m));
    }
  }

  static PipeGeometry from_mm(double diameter_mm) { return PipeGeometry(diameter_mm * 1e-3); }

  double diameter() const noexcept { return diameter_; }
  double radius() const noexcept { return 0.5 * diameter_; }
  double full_area() const noexcept { return 0.25 * pi_v<double> * diameter_ * diameter_; }

private:
  double diameter_;
};

/// Liquid depth measured from the inner pipe invert, in meters.
class WaterLevel {
public:
  constexpr explicit WaterLevel(double level_m) : level_(level_m) {}
  static constexpr WaterLevel from_mm(double level_mm) { return WaterLevel(level_mm * 1e-3); }

  constexpr double meters() const noexcept { return level_; }
  constexpr double millimeters() const noexcept { return level_ * 1e3; }

private:
  double level_;
};

namespace detail {

template <typename Scalar>
void require_level(Scalar level, Scalar diameter, const char* what) {
  if (!(level >= Scalar(0)) || !(level <= diameter)) {
    throw std::domain_error(std::string(what) + ": level " +
                            std::to_string(static_cast<double>(level)) +
                            " m outside [0, " + std::to_string(static_cast<double>(diameter)) +
                            "] m");
  }
}

} // namespace detail

// -------------------------------------------------------------
// Scalar kernels
// -------------------------------------------------------------

template <typename Scalar>
Scalar wetted_angle(Scalar level, Scalar diameter) {
  detail::require_level(level, diameter, "wetted_angle");
  using std::acos;
  Scalar arg = Scalar(1) - Scalar(2) * level / diameter;
  if (arg > Scalar(1)) arg = Scalar(1);
  if (arg < Scalar(-1)) arg = Scalar(-1);
  return Scalar(2) * acos(arg);
}

template <typename Scalar>
Scalar segment_area(Scalar level, Scalar diameter) {
  using std::sin;
  const Scalar theta = wetted_angle(level, diameter);
  return diameter * diameter / Scalar(8) * (theta - sin(theta));
}

/// Half-width of the horizontal chord at height y above the invert.
template <typename Scalar>
Scalar chord_half_width(Scalar y, Scalar diameter) {
  if (!(y >= Scalar(0)) || !(y <= diameter)) {
    throw std::domain_error("chord_half_width: height " + std::to_string(static_cast<double>(y)) +
                            " m outside the pipe");
  }
  using std::sqrt;
  const Scalar r = diameter / Scalar(2);
  const Scalar d = y - r;
  const Scalar w2 = r * r - d * d;
  return w2 > Scalar(0) ? sqrt(w2) : Scalar(0);
}

/// Wetted perimeter R*theta; the free surface is not part of it.
template <typename Scalar>
Scalar wetted_perimeter(Scalar level, Scalar diameter) {
  return diameter / Scalar(2) * wetted_angle(level, diameter);
}

template <typename Scalar>
Scalar hydraulic_diameter(Scalar level, Scalar diameter) {
  detail::require_level(level, diameter, "hydraulic_diameter");
  if (!(level > Scalar(0))) {
    throw std::domain_error("hydraulic_diameter: zero level has no wetted perimeter");
  }
  if (level == diameter) return diameter;
  return Scalar(4) * segment_area(level, diameter) / wetted_perimeter(level, diameter);
}

// -------------------------------------------------------------
// Strong-typed overloads
// -------------------------------------------------------------

inline double wetted_angle(WaterLevel level, const PipeGeometry& pipe) {
  return wetted_angle(level.meters(), pipe.diameter());
}

inline double segment_area(WaterLevel level, const PipeGeometry& pipe) {
  return segment_area(level.meters(), pipe.diameter());
}

inline double chord_half_width(double y_m, const PipeGeometry& pipe) {
  return chord_half_width(y_m, pipe.diameter());
}

inline double wetted_perimeter(WaterLevel level, const PipeGeometry& pipe) {
  return wetted_perimeter(level.meters(), pipe.diameter());
}

inline double hydraulic_diameter(WaterLevel level, const PipeGeometry& pipe) {
  return hydraulic_diameter(level.meters(), pipe.diameter());
}

/// Re = (Q/A) * D_h / nu, with D_h = 4A/P.
inline double reynolds(double flow_m3s, WaterLevel level, const PipeGeometry& pipe,
                       double kinematic_viscosity = kWaterViscosity) {
  if (!(flow_m3s >= 0.0)) throw std::invalid_argument("reynolds: flow rate must be >= 0");
  if (!(kinematic_viscosity > 0.0)) throw std::invalid_argument("reynolds: viscosity must be > 0");
  const double dh = hydraulic_diameter(level, pipe);
  const double area = segment_area(level, pipe);
  return flow_m3s / area * dh / kinematic_viscosity;
}

} // namespace pipeflow
