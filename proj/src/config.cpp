#include "pipeflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace pipeflow {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct ChordDraft {
  std::optional<double> height_mm;
  std::optional<double> path_length_m;
  std::optional<double> angle_deg;
  std::optional<double> weight;
};

class Parser {
public:
  explicit Parser(RunConfig& cfg) : cfg_(cfg) {}

  void line(std::string_view raw, std::size_t number) {
    line_ = number;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') return;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!seen_.insert(key).second) fail("duplicate key '" + key + "'");
    assign(key, value);
  }

  void finish() {
    if (!coefficients_ && (poly_min_ || poly_max_)) {
      throw ConfigError("config: fpcf.min_mm / fpcf.max_mm given without fpcf.coefficients");
    }
    const bool explicit_poly = mode_ ? *mode_ == "polynomial" : coefficients_.has_value();
    if (explicit_poly) {
      if (!coefficients_) throw ConfigError("config: fpcf.mode = polynomial needs fpcf.coefficients");
      if (!poly_min_ || !poly_max_) {
        throw ConfigError("config: fpcf.coefficients needs fpcf.min_mm and fpcf.max_mm");
      }
      try {
        cfg_.fpcf = FpcfPolynomial(*coefficients_, *poly_min_, *poly_max_);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    } else {
      if (coefficients_) throw ConfigError("config: fpcf.coefficients given with fpcf.mode = derive");
      cfg_.fpcf = derive_;
    }

    if (!(cfg_.diameter_mm > 0.0)) throw ConfigError("config: pipe.diameter_mm must be > 0");
    const PipeGeometry pipe = cfg_.pipe();
    for (const auto& id : chord_order_) {
      const ChordDraft& d = chords_.at(id);
      ChordSpec c;
      c.id = id;
      if (!d.height_mm) throw ConfigError("config: chord '" + id + "' has no height_mm");
      c.height_mm = *d.height_mm;
      c.beam_angle_rad = d.angle_deg.value_or(45.0) * std::numbers::pi / 180.0;
      c.weight = d.weight.value_or(1.0);
      if (d.path_length_m) {
        c.path_length_m = *d.path_length_m;
      } else {
        if (!(c.height_mm > 0.0 && c.height_mm < cfg_.diameter_mm)) {
          throw ConfigError("config: chord '" + id + "' lies outside the pipe");
        }
        c.path_length_m = 2.0 * chord_half_width(c.height_mm * 1e-3, pipe) / std::sin(c.beam_angle_rad);
      }
      cfg_.chords.push_back(std::move(c));
    }
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + what);
  }

  double number(std::string_view v, const std::string& key) const {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) fail("'" + key + "' expects a finite number, got '" + std::string(v) + "'");
    return *d;
  }

  long integer(std::string_view v, const std::string& key) const {
    long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
      fail("'" + key + "' expects an integer, got '" + std::string(v) + "'");
    }
    return out;
  }

  std::vector<double> list(std::string_view v, const std::string& key) const {
    std::vector<double> out;
    while (true) {
      const auto comma = v.find(',');
      out.push_back(number(trim(v.substr(0, comma)), key));
      if (comma == std::string_view::npos) break;
      v.remove_prefix(comma + 1);
    }
    return out;
  }

  void assign(const std::string& key, std::string_view v) {
    if (key.rfind("chord.", 0) == 0) {
      chord_key(key, v);
      return;
    }
    using Setter = std::function<void(std::string_view)>;
    const std::map<std::string, Setter> setters = {
        {"pipe.diameter_mm", [&](auto s) { cfg_.diameter_mm = number(s, key); }},
        {"profile.M", [&](auto s) { cfg_.profile.params.M = number(s, key); }},
        {"profile.q", [&](auto s) { cfg_.profile.params.q = number(s, key); }},
        {"profile.dip_coefficients",
         [&](auto s) {
           const auto c = list(s, key);
           if (c.size() != 4) fail("'" + key + "' expects four values c3, c2, c1, c0");
           cfg_.profile.dip = {c[0], c[1], c[2], c[3]};
         }},
        {"profile.upper_branch",
         [&](auto s) {
           if (s == "clamp") cfg_.profile.options.upper_branch = UpperBranchPolicy::ClampToZero;
           else if (s == "fault") cfg_.profile.options.upper_branch = UpperBranchPolicy::Fault;
           else fail("'" + key + "' expects clamp or fault");
         }},
        {"profile.bracket",
         [&](auto s) {
           if (s == "wall_over_height") cfg_.profile.options.bracket = BracketFactor::WallOverHeight;
           else if (s == "unity") cfg_.profile.options.bracket = BracketFactor::Unity;
           else fail("'" + key + "' expects wall_over_height or unity");
         }},
        {"profile.clamp_nonnegative",
         [&](auto s) {
           if (s == "true") cfg_.profile.options.clamp_nonnegative = true;
           else if (s == "false") cfg_.profile.options.clamp_nonnegative = false;
           else fail("'" + key + "' expects true or false");
         }},
        {"fpcf.mode",
         [&](auto s) {
           if (s != "derive" && s != "polynomial") fail("'" + key + "' expects derive or polynomial");
           mode_ = std::string(s);
         }},
        {"fpcf.coefficients", [&](auto s) { coefficients_ = list(s, key); }},
        {"fpcf.min_mm", [&](auto s) { poly_min_ = number(s, key); }},
        {"fpcf.max_mm", [&](auto s) { poly_max_ = number(s, key); }},
        {"fpcf.derive_min_mm", [&](auto s) { derive_.range.min_mm = number(s, key); }},
        {"fpcf.derive_max_mm", [&](auto s) { derive_.range.max_mm = number(s, key); }},
        {"fpcf.derive_step_mm", [&](auto s) { derive_.range.step_mm = number(s, key); }},
        {"fpcf.chord_height_mm", [&](auto s) { derive_.chord_height_mm = number(s, key); }},
        {"fpcf.degree", [&](auto s) { derive_.degree = static_cast<int>(integer(s, key)); }},
        // Written by `fit`; informational.
        {"fit.samples", [&](auto s) { integer(s, key); }},
        {"fit.rms_residual", [&](auto s) { number(s, key); }},
        {"fit.max_residual", [&](auto s) { number(s, key); }},
        {"calibration.factor", [&](auto s) { cfg_.estimator.calibration_factor = number(s, key); }},
        {"measurement.plausibility_cap_m_s",
         [&](auto s) { cfg_.estimator.plausibility_cap_m_s = number(s, key); }},
        {"viscosity_m2_s", [&](auto s) { cfg_.viscosity_m2_s = number(s, key); }},
        {"clogging.slope", [&](auto s) { cfg_.boundary.slope = number(s, key); }},
        {"clogging.intercept", [&](auto s) { cfg_.boundary.intercept = number(s, key); }},
        {"clogging.debounce", [&](auto s) { cfg_.debounce = static_cast<int>(integer(s, key)); }},
        {"quadrature.rel_tol", [&](auto s) { cfg_.quad.rel_tol = number(s, key); }},
        {"quadrature.max_depth", [&](auto s) { cfg_.quad.max_depth = static_cast<int>(integer(s, key)); }},
        {"quadrature.nodes", [&](auto s) { cfg_.quad.nodes_per_panel = static_cast<int>(integer(s, key)); }},
        {"simulate.id", [&](auto s) { cfg_.scenario.id = std::string(s); }},
        {"simulate.flow_lps", [&](auto s) { cfg_.scenario.flow_lps = number(s, key); }},
        {"simulate.level_mm", [&](auto s) { cfg_.scenario.level_mm = number(s, key); }},
        {"simulate.weir",
         [&](auto s) {
           try {
             cfg_.scenario.weir = parse_weir_mode(s);
           } catch (const std::invalid_argument& e) {
             fail(e.what());
           }
         }},
        {"simulate.sound_speed_m_s", [&](auto s) { cfg_.scenario.sound_speed_m_s = number(s, key); }},
        {"simulate.noise_ns", [&](auto s) { cfg_.scenario.noise_s = number(s, key) * 1e-9; }},
        {"simulate.frames",
         [&](auto s) {
           const long n = integer(s, key);
           if (n < 0) fail("'" + key + "' must be >= 0");
           cfg_.scenario.frame_count = static_cast<std::size_t>(n);
         }},
        {"simulate.interval_s", [&](auto s) { cfg_.scenario.interval_s = number(s, key); }},
        {"simulate.start_s", [&](auto s) { cfg_.scenario.start_s = number(s, key); }},
        {"simulate.seed",
         [&](auto s) {
           const long n = integer(s, key);
           if (n < 0) fail("'" + key + "' must be >= 0");
           cfg_.scenario.seed = static_cast<std::uint64_t>(n);
         }},
        {"weir.uplift1", [&](auto s) { cfg_.weir.uplift_weir1 = number(s, key); }},
        {"weir.uplift2", [&](auto s) { cfg_.weir.uplift_weir2 = number(s, key); }},
    };
    const auto it = setters.find(key);
    if (it == setters.end()) fail("unknown key '" + key + "'");
    it->second(v);
  }

  void chord_key(const std::string& key, std::string_view v) {
    const auto dot = key.rfind('.');
    const std::string id = key.substr(6, dot - 6);
    const std::string field = key.substr(dot + 1);
    if (dot <= 6 || id.empty()) fail("chord keys look like chord.<id>.<field>");
    if (id.find_first_of(", \t\"") != std::string::npos) fail("chord id '" + id + "' has invalid characters");
    if (!chords_.count(id)) chord_order_.push_back(id);
    ChordDraft& d = chords_[id];
    if (field == "height_mm") d.height_mm = number(v, key);
    else if (field == "path_length_m") d.path_length_m = number(v, key);
    else if (field == "angle_deg") d.angle_deg = number(v, key);
    else if (field == "weight") d.weight = number(v, key);
    else fail("unknown chord field '" + field + "'");
  }

  RunConfig& cfg_;
  std::size_t line_ = 0;
  std::set<std::string> seen_;
  std::optional<std::string> mode_;
  std::optional<std::vector<double>> coefficients_;
  std::optional<double> poly_min_, poly_max_;
  FpcfDerive derive_{};
  std::vector<std::string> chord_order_;
  std::map<std::string, ChordDraft> chords_;
};

} // namespace

std::vector<ChordSpec> RunConfig::resolved_chords() const {
  if (!chords.empty()) return chords;
  return crossed_pair(pipe(), 50.0);
}

void RunConfig::validate() const {
  auto wrap = [](auto&& check) {
    try {
      check();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  };
  if (!(diameter_mm > 0.0)) throw ConfigError("config: pipe.diameter_mm must be > 0");
  wrap([&] { profile.params.validate(); });
  wrap([&] { boundary.validate(); });
  wrap([&] { quad.validate(); });
  wrap([&] { weir.validate(); });
  if (debounce < 1) throw ConfigError("config: clogging.debounce must be >= 1");
  if (!(viscosity_m2_s > 0.0)) throw ConfigError("config: viscosity_m2_s must be > 0");
  if (!(estimator.calibration_factor > 0.0)) throw ConfigError("config: calibration.factor must be > 0");
  if (!(estimator.plausibility_cap_m_s > 0.0)) {
    throw ConfigError("config: measurement.plausibility_cap_m_s must be > 0");
  }

  const std::vector<ChordSpec> resolved = resolved_chords();
  double lowest = resolved.front().height_mm;
  for (const ChordSpec& c : resolved) {
    wrap([&] { c.validate(); });
    if (!(c.height_mm < diameter_mm)) throw ConfigError("config: chord '" + c.id + "' lies above the crown");
    lowest = std::min(lowest, c.height_mm);
  }

  if (const auto* poly = std::get_if<FpcfPolynomial>(&fpcf)) {
    if (poly->min_mm() < lowest) {
      throw ConfigError("config: fpcf.min_mm " + format_double(poly->min_mm()) +
                        " lies below the lowest chord at " + format_double(lowest) + " mm");
    }
  } else {
    const FpcfDerive& d = std::get<FpcfDerive>(fpcf);
    const double y = d.chord_height_mm.value_or(lowest);
    if (!(d.range.step_mm > 0.0) || !(d.range.max_mm >= d.range.min_mm)) {
      throw ConfigError("config: empty fpcf derive range");
    }
    if (d.range.min_mm < y) throw ConfigError("config: fpcf.derive_min_mm lies below the chord");
    if (d.range.max_mm > diameter_mm) throw ConfigError("config: fpcf.derive_max_mm exceeds the diameter");
    if (d.degree < 0) throw ConfigError("config: fpcf.degree must be >= 0");
  }
  try {
    scenario.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  Parser parser(cfg);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) parser.line(line, ++number);
  parser.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

FpcfPolynomial resolve_polynomial(const RunConfig& config) {
  if (const auto* poly = std::get_if<FpcfPolynomial>(&config.fpcf)) return *poly;
  const FpcfDerive& d = std::get<FpcfDerive>(config.fpcf);
  double lowest = config.resolved_chords().front().height_mm;
  for (const ChordSpec& c : config.resolved_chords()) lowest = std::min(lowest, c.height_mm);
  const double y = d.chord_height_mm.value_or(lowest);

  const FpcfTable table = tabulate_fpcf(config.pipe(), config.profile, y, d.range, config.quad);
  if (!table.complete()) {
    const auto& f = table.failures.front();
    throw ConfigError("config: cannot derive the FPCF polynomial, level " + format_double(f.level_mm) +
                      " mm failed: " + f.message);
  }
  try {
    return fit_polynomial(table.samples, d.degree);
  } catch (const FitError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ProcessConfig make_process_config(const RunConfig& config, FpcfPolynomial poly) {
  return ProcessConfig{config.pipe(), config.resolved_chords(), std::move(poly), config.estimator,
                       config.boundary, config.debounce};
}

ProcessConfig make_process_config(const RunConfig& config) {
  return make_process_config(config, resolve_polynomial(config));
}

SimulationSetup make_simulation_setup(const RunConfig& config) {
  return SimulationSetup{config.pipe(), config.resolved_chords(), config.profile, config.quad, config.weir};
}

std::string polynomial_document(const FpcfPolynomial& poly) {
  std::ostringstream out;
  out << "fpcf.mode = polynomial\n";
  out << "fpcf.coefficients = ";
  for (std::size_t i = 0; i < poly.coefficients().size(); ++i) {
    out << (i ? ", " : "") << format_double(poly.coefficients()[i]);
  }
  out << "\nfpcf.min_mm = " << format_double(poly.min_mm()) << "\n";
  out << "fpcf.max_mm = " << format_double(poly.max_mm()) << "\n";
  if (const auto& d = poly.diagnostics()) {
    out << "fit.samples = " << d->sample_count << "\n";
    out << "fit.rms_residual = " << format_double(d->rms_residual) << "\n";
    out << "fit.max_residual = " << format_double(d->max_residual) << "\n";
  }
  return out.str();
}

} // namespace pipeflow
