#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pipeflow/fpcf.hpp"
#include "pipeflow/quadrature.hpp"

using namespace pipeflow;

namespace {

// Antiderivative of (R^2 - u^2)^(3/2).
double g32(double u, double r) {
  return u / 8.0 * (5.0 * r * r - 2.0 * u * u) * std::sqrt(std::max(r * r - u * u, 0.0)) +
         3.0 * r * r * r * r / 8.0 * std::asin(std::clamp(u / r, -1.0, 1.0));
}

} // namespace

TEST_SUITE("quadrature") {

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 2, 5, 8, 16}) {
    const GaussLegendreRule& rule = gauss_legendre(n);
    CHECK(rule.size() == n);
    CHECK(rule.weights().sum() == doctest::Approx(2.0).epsilon(1e-14));
    // Exact for degree 2n - 1.
    const int deg = 2 * n - 1;
    const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
    const double even_exact = 2.0 / deg; // x^(deg-1), deg - 1 even
    CHECK(rule.apply([&](double x) { return std::pow(x, deg); }, -1.0, 1.0) ==
          doctest::Approx(exact).epsilon(1e-13));
    CHECK(rule.apply([&](double x) { return std::pow(x, deg - 1); }, -1.0, 1.0) ==
          doctest::Approx(even_exact).epsilon(1e-13));
  }
  CHECK(&gauss_legendre(8) == &gauss_legendre(8));
  CHECK_THROWS_AS(GaussLegendreRule(0), std::invalid_argument);
}

TEST_CASE("adaptive integration of smooth and singular integrands") {
  QuadratureSpec spec;
  spec.rel_tol = 1e-10;
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0, spec) ==
        doctest::Approx(std::numbers::e - 1.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, spec) ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::pow(x, 0.56); }, 0.0, 2.0, spec) ==
        doctest::Approx(std::pow(2.0, 1.56) / 1.56).epsilon(1e-10));
  CHECK(integrate([](double) { return 1.0; }, 3.0, 3.0, spec) == 0.0);
}

TEST_CASE("non-convergence is reported") {
  QuadratureSpec spec;
  spec.rel_tol = 1e-14;
  spec.max_depth = 2;
  auto f = [](double x) { return 1.0 / std::sqrt(x + 1e-12); };
  const QuadratureResult r = integrate_adaptive(f, 0.0, 1.0, spec);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, spec), QuadratureError);
  QuadratureSpec bad;
  bad.rel_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("segment moments match closed forms") {
  QuadratureSpec spec;
  spec.rel_tol = 1e-9;
  const PipeGeometry pipe = PipeGeometry::from_mm(250);
  const double r = pipe.radius();
  for (double level_mm : {30.0, 90.0, 125.0, 200.0, 250.0}) {
    const WaterLevel level = WaterLevel::from_mm(level_mm);
    const double h = level.meters();
    const double area = segment_area(level, pipe);

    const double y_moment = r * area - 2.0 / 3.0 * std::pow(r * r - (h - r) * (h - r), 1.5);
    const double x2_moment = 2.0 / 3.0 * (g32(h - r, r) - g32(-r, r));

    const double mean_y = mean_area_velocity([](double, double y) { return y; }, pipe, level, spec);
    const double mean_x2 = mean_area_velocity([](double x, double) { return x * x; }, pipe, level, spec);
    const double mean_one = mean_area_velocity([](double, double) { return 1.0; }, pipe, level, spec);
    CHECK(mean_y == doctest::Approx(y_moment / area).epsilon(1e-8));
    CHECK(mean_x2 == doctest::Approx(x2_moment / area).epsilon(1e-8));
    CHECK(mean_one == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("uniform refinement of FPCF at 125 mm converges") {
  const ProfileModel model(PipeGeometry::from_mm(250), WaterLevel::from_mm(125));
  double prev = fpcf_uniform(model, 0.05, 4);
  double prev_diff = 1.0;
  for (int panels : {8, 16, 32, 64}) {
    const double cur = fpcf_uniform(model, 0.05, panels);
    const double diff = std::abs(cur - prev);
    CHECK(diff < prev_diff);
    prev_diff = diff;
    prev = cur;
  }
  CHECK(prev_diff < 1e-4);
  CHECK(prev == doctest::Approx(fpcf(model, 0.05)).epsilon(1e-5));
}

} // TEST_SUITE
