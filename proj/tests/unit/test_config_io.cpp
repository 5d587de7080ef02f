#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pipeflow/config.hpp"
#include "pipeflow/io.hpp"

using namespace pipeflow;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<FrameInput> frames(const std::string& text) {
  std::istringstream in(text);
  return read_frames(in);
}

} // namespace

TEST_SUITE("config_io") {

TEST_CASE("defaults") {
  const RunConfig c = parse("");
  CHECK(c.diameter_mm == 250.0);
  CHECK(std::holds_alternative<FpcfDerive>(c.fpcf));
  const auto chords = c.resolved_chords();
  REQUIRE(chords.size() == 2);
  CHECK(chords[0].height_mm == 50.0);
  CHECK(c.debounce == 5);
  CHECK(c.boundary.slope == 0.00321);
}

TEST_CASE("full configuration") {
  const RunConfig c = parse(R"(# rig
pipe.diameter_mm = 300
chord.low.height_mm = 60
chord.low.angle_deg = 30
chord.low.weight = 2
chord.mid.height_mm = 100
chord.mid.path_length_m = 0.5
fpcf.coefficients = 0.9, 0.001
fpcf.min_mm = 60
fpcf.max_mm = 200
calibration.factor = 0.97
clogging.slope = 0.004
clogging.intercept = -0.01
clogging.debounce = 3
simulate.weir = weir1
simulate.noise_ns = 2
simulate.seed = 9
)");
  CHECK(c.diameter_mm == 300.0);
  REQUIRE(c.chords.size() == 2);
  CHECK(c.chords[0].id == "low");
  CHECK(c.chords[0].beam_angle_rad == doctest::Approx(std::numbers::pi / 6));
  CHECK(c.chords[0].weight == 2.0);
  CHECK(c.chords[0].path_length_m ==
        doctest::Approx(2 * chord_half_width(0.06, PipeGeometry::from_mm(300)) / 0.5));
  CHECK(c.chords[1].path_length_m == 0.5);
  const auto& p = std::get<FpcfPolynomial>(c.fpcf);
  CHECK(p.coefficients() == std::vector<double>{0.9, 0.001});
  CHECK(c.estimator.calibration_factor == 0.97);
  CHECK(c.debounce == 3);
  CHECK(c.scenario.weir == WeirMode::Weir1);
  CHECK(c.scenario.noise_s == doctest::Approx(2e-9));
  CHECK(c.scenario.seed == 9);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse("nonsense"), ConfigError);
  CHECK_THROWS_AS(parse("pipe.size = 3"), ConfigError);
  CHECK_THROWS_AS(parse("pipe.diameter_mm = 250\npipe.diameter_mm = 250"), ConfigError);
  CHECK_THROWS_AS(parse("pipe.diameter_mm = 25o"), ConfigError);
  CHECK_THROWS_AS(parse("pipe.diameter_mm = -1"), ConfigError);
  CHECK_THROWS_AS(parse("profile.q = 0.5"), ConfigError);
  CHECK_THROWS_AS(parse("clogging.slope = 0"), ConfigError);
  CHECK_THROWS_AS(parse("clogging.debounce = 0"), ConfigError);
  CHECK_THROWS_AS(parse("chord.a.angle_deg = 45"), ConfigError);
  CHECK_THROWS_AS(parse("chord.a.height_mm = 50\nchord.a.colour = 1"), ConfigError);
  CHECK_THROWS_AS(parse("fpcf.mode = polynomial"), ConfigError);
  CHECK_THROWS_AS(parse("fpcf.coefficients = 1\nfpcf.min_mm = 50"), ConfigError);
  // Polynomial range starting below the chord.
  CHECK_THROWS_AS(parse("fpcf.coefficients = 1\nfpcf.min_mm = 40\nfpcf.max_mm = 250"), ConfigError);
  CHECK_THROWS_AS(parse("fpcf.derive_min_mm = 30"), ConfigError);
  CHECK_THROWS_AS(parse("simulate.weir = dam"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("derived polynomial") {
  const FpcfPolynomial p = resolve_polynomial(parse(""));
  CHECK(p.degree() == 6);
  CHECK(p.min_mm() == 50.0);
  CHECK(p.max_mm() == 120.0);
  CHECK(p.diagnostics()->rms_residual < 1e-3);
  CHECK_THROWS_AS(resolve_polynomial(parse("fpcf.derive_max_mm = 250")), ConfigError);
}

TEST_CASE("numbers survive text bit for bit") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> exponent(-300, 300), mant(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double v = mant(rng) * std::pow(10.0, exponent(rng));
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(parse_double("1e-3 ") == std::nullopt);
  CHECK(parse_double("+2.5") == 2.5);
  CHECK(parse_double("") == std::nullopt);
}

TEST_CASE("fitted coefficients round trip through the config parser") {
  const FpcfPolynomial p = resolve_polynomial(parse(""));
  const RunConfig back = parse(polynomial_document(p));
  const auto& q = std::get<FpcfPolynomial>(back.fpcf);
  CHECK(q.coefficients() == p.coefficients());
  CHECK(q.min_mm() == p.min_mm());
  CHECK(q.max_mm() == p.max_mm());
}

TEST_CASE("frame CSV grouping") {
  CHECK(frames("").empty());
  CHECK(frames(std::string(kFrameHeader) + "\n").empty());
  CHECK_THROWS_AS(frames("a,b\n1,2\n"), DataError);

  const auto f = frames(std::string(kFrameHeader) +
                        "\n0,a,1000,1001,80\n0,b,1000,1002,80\n1,a,1000,1001.5,81\n\n2,a,1000,1001,82\n");
  REQUIRE(f.size() == 3);
  const auto& first = std::get<SensorFrame>(f[0]);
  CHECK(first.readings.size() == 2);
  CHECK(first.level_mm == 80.0);
  CHECK(first.readings[1].t_down_s == doctest::Approx(1002e-9));
  CHECK(std::get<SensorFrame>(f[1]).readings[0].t_down_s == doctest::Approx(1001.5e-9));
}

TEST_CASE("malformed rows become diagnostics") {
  const auto f = frames(std::string(kFrameHeader) +
                        "\n0,a,1000,1001,80\n1,a,xx,1001,80\n2,a,1000,1001,80\nabc,a,1,1,1\n3,a,1000,1001,80\n"
                        "4,a,1000,1001\n4,b,1000,1001,80\n5,a,1000,1001,80\n5,b,1000,1001,81\n");
  REQUIRE(f.size() == 7);
  CHECK(std::holds_alternative<SensorFrame>(f[0]));
  const auto& bad_time = std::get<FrameDiagnostic>(f[1]);
  CHECK(bad_time.timestamp_s == 1.0);
  CHECK(bad_time.line == 3);
  CHECK(std::holds_alternative<SensorFrame>(f[2]));
  const auto& no_ts = std::get<FrameDiagnostic>(f[3]);
  CHECK_FALSE(no_ts.timestamp_s);
  CHECK(std::holds_alternative<SensorFrame>(f[4]));
  CHECK(std::holds_alternative<FrameDiagnostic>(f[5])); // short row
  CHECK(std::get<FrameDiagnostic>(f[6]).message.find("level") != std::string::npos);
}

TEST_CASE("frame CSV round trip") {
  SensorFrame a{0.5, 85.3, {{"lower-a", 1.910803328586182e-4, 1.911395580408145e-4}}};
  SensorFrame b{1.5, 85.3, {{"lower-a", 1.9e-4, 1.9000001e-4}, {"lower-b", 2e-4, 2.1e-4}}};
  std::ostringstream out;
  write_frames(out, std::vector<SensorFrame>{a, b});
  const auto back = frames(out.str());
  REQUIRE(back.size() == 2);
  const auto& a2 = std::get<SensorFrame>(back[0]);
  CHECK(a2.timestamp_s == 0.5);
  CHECK(a2.level_mm == 85.3);
  CHECK(a2.readings[0].t_up_s == doctest::Approx(a.readings[0].t_up_s).epsilon(1e-15));
  CHECK(a2.readings[0].t_down_s == doctest::Approx(a.readings[0].t_down_s).epsilon(1e-15));
  CHECK(std::get<SensorFrame>(back[1]).readings.size() == 2);
}

TEST_CASE("JSON records") {
  EstimateRecord e;
  e.estimate.timestamp_s = 1.0;
  e.estimate.level_mm = 80.0;
  e.estimate.status = EstimateStatus::DryChord;
  std::ostringstream out;
  write_record(out, e);
  write_record(out, FrameDiagnostic{std::nullopt, 4, "bad \"row\""});
  write_record(out, AlarmEventRecord{2.0, AlarmEventKind::Raised, 90, 0.1, 5});
  write_summary(out, {3, 1, 1, 1, 0});
  const std::string s = out.str();
  CHECK(s.find(R"("status":"dry_chord")") != std::string::npos);
  CHECK(s.find(R"("q_lps":null)") != std::string::npos);
  CHECK(s.find(R"("message":"bad \"row\"")") != std::string::npos);
  CHECK(s.find(R"("event":"raised")") != std::string::npos);
  CHECK(s.find(R"({"type":"summary","frames":3)") != std::string::npos);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

TEST_CASE("tables") {
  std::istringstream fp("H_mm,fpcf\n50,0.7\n60,nan\n");
  const auto samples = read_fpcf_table(fp);
  REQUIRE(samples.size() == 2);
  CHECK(std::isnan(samples[1].value));
  std::istringstream bad("H,f\n1,2\n");
  CHECK_THROWS_AS(read_fpcf_table(bad), DataError);

  std::istringstream trials("segment_id,flow_label,q_ref_lps,q_meas_lps\ns1,2,2.0,2.1\ns2,2,2.0,2.05\n");
  const auto t = read_trials(trials);
  REQUIRE(t.size() == 2);
  CHECK(t[1].q_meas_lps == 2.05);
  std::istringstream neg("segment_id,flow_label,q_ref_lps,q_meas_lps\ns1,2,0,2.1\n");
  CHECK_THROWS_AS(read_trials(neg), DataError);

  std::istringstream errs("flow_lps, error_pct\n2,8.51\n3,2.62\n");
  const MetricsInput m = read_metrics_input(errs);
  CHECK(m.trials.empty());
  CHECK(m.errors.size() == 2);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_metrics_input(empty), DataError);
}

} // TEST_SUITE
