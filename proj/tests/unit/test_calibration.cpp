#include <doctest.h>

#include <random>
#include <stdexcept>

#include "pipeflow/calibration.hpp"

using namespace pipeflow;

namespace {

std::vector<RateError> column(const std::vector<double>& flows, const std::vector<double>& errors) {
  std::vector<RateError> out;
  for (std::size_t i = 0; i < flows.size(); ++i) out.push_back({flows[i], errors[i]});
  return out;
}

} // namespace

TEST_SUITE("calibration") {

TEST_CASE("percent error") {
  CHECK(percent_error(4.0, 4.0) == 0.0);
  CHECK(percent_error(2.1702, 2.0) == doctest::Approx(8.51).epsilon(1e-12));
  CHECK(percent_error(3.0, 4.0) == -25.0);
  CHECK_THROWS_AS(percent_error(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("FWME of the published error columns") {
  const std::vector<double> five = {2, 3, 4, 5, 6};
  CHECK(fwme(column(five, {8.51, 2.62, 1.46, 0.42, 0.23})) == doctest::Approx(1.71).epsilon(0.005 / 1.71));
  CHECK(std::abs(fwme(column(five, {3.57, -0.42, -0.44, -0.60, 0.07})) - 0.08) <= 0.005);
  const std::vector<double> four = {2, 3, 4, 5};
  CHECK(std::abs(fwme(column(four, {3.31, 7.61, 7.15, 4.95})) - 5.91) <= 0.005);
  CHECK(std::abs(fwme(column(four, {-2.57, 0.33, -0.81, -1.85})) - -1.19) <= 0.005);
  CHECK(std::abs(fwme(column(four, {3.57, -0.42, -0.44, -0.60})) - 0.08) <= 0.005);
}

TEST_CASE("FWME properties") {
  CHECK(fwme(column({3.0}, {-2.5})) == -2.5);
  const auto base = column({2, 3, 5}, {1.0, -2.0, 4.0});
  const auto scaled = column({20, 30, 50}, {1.0, -2.0, 4.0});
  CHECK(fwme(base) == doctest::Approx(fwme(scaled)).epsilon(1e-14));
  CHECK(fwme(column({4, 4, 4}, {1, 2, 6})) == doctest::Approx(3.0));
  CHECK_THROWS_AS(fwme({}), std::invalid_argument);
  CHECK_THROWS_AS(fwme(column({0.0}, {1.0})), std::invalid_argument);
}

TEST_CASE("calibration factor") {
  std::vector<TrialRecord> same = {{"s1", "2", 2.0, 2.0}, {"s1", "4", 4.0, 4.0}};
  CHECK(calibration_factor(same) == 1.0);
  std::vector<TrialRecord> biased = {{"s1", "2", 2.0, 2.2}, {"s1", "4", 4.0, 4.4}};
  const double k = calibration_factor(biased);
  CHECK(k == doctest::Approx(1.0 / 1.1).epsilon(1e-12));

  std::vector<TrialRecord> corrected = biased;
  for (auto& t : corrected) t.q_meas_lps *= k;
  CHECK(calibration_factor(corrected) == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<TrialRecord> zero = {{"s1", "2", 2.0, 0.0}};
  CHECK_THROWS_AS(calibration_factor(zero), std::invalid_argument);
  CHECK_THROWS_AS(calibration_factor({}), std::invalid_argument);
}

TEST_CASE("calibration is idempotent on noisy trials") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(1.04, 0.02);
  std::vector<TrialRecord> trials;
  for (int i = 0; i < 12; ++i) {
    const double q = 2.0 + i % 5;
    trials.push_back({"s" + std::to_string(i), std::to_string(q), q, q * noise(rng)});
  }
  const double k = calibration_factor(trials);
  for (auto& t : trials) t.q_meas_lps *= k;
  CHECK(std::abs(calibration_factor(trials) - 1.0) <= 1e-12);
}

TEST_CASE("repeatability") {
  CHECK(repeatability(std::vector<double>{9, 10, 11}) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(repeatability(std::vector<double>{4.2, 4.2, 4.2, 4.2}) == 0.0);
  CHECK(repeatability(std::vector<double>{90, 100, 110}) ==
        doctest::Approx(repeatability(std::vector<double>{9, 10, 11})).epsilon(1e-14));
  CHECK_THROWS_AS(repeatability(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(repeatability(std::vector<double>{-1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("error table and calibrate report") {
  std::vector<TrialRecord> trials;
  for (int seg = 1; seg <= 3; ++seg) {
    for (double q : {2.0, 4.0, 6.0}) {
      trials.push_back({"seg" + std::to_string(seg), std::to_string(static_cast<int>(q)), q,
                        q * 1.05 * (1.0 + 0.001 * seg)});
    }
  }
  const ErrorTable raw = error_table(trials);
  REQUIRE(raw.rows.size() == 3);
  CHECK(raw.rows[0].flow_label == "2");
  CHECK(raw.rows[0].trials == 3);
  CHECK(raw.rows[0].error_pct == doctest::Approx(5.0 + 0.2 * 1.05).epsilon(1e-9));

  const CalibrationReport r = calibrate(trials);
  CHECK(r.calibration_trials.size() == 3);
  CHECK(r.evaluation_trials.size() == 6);
  CHECK(r.factor == doctest::Approx(1.0 / (1.05 * 1.001)).epsilon(1e-12));
  CHECK(std::abs(r.after.fwme_pct) < std::abs(r.before.fwme_pct));
  CHECK(std::abs(r.after.fwme_pct) < 0.2);
  CHECK(r.before.max_abs_error_pct >= r.before.fwme_pct);
}

} // TEST_SUITE
