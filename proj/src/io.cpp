#include "pipeflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "pipeflow/config.hpp"

namespace pipeflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::string compact_header(std::string_view line) {
  std::string out;
  for (auto f : split(line)) {
    if (!out.empty()) out += ',';
    out += f;
  }
  return out;
}

/// Lines of a small CSV table after its header; blank lines dropped.
struct Table {
  std::string header;
  std::vector<std::pair<std::size_t, std::string>> rows;
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t n = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    if (!have_header) {
      t.header = compact_header(line);
      have_header = true;
    } else {
      t.rows.emplace_back(n, line);
    }
  }
  if (!have_header) throw DataError("input is empty");
  return t;
}

double field_number(std::string_view text, std::size_t line, const char* name) {
  const auto v = parse_double(text);
  if (!v || !std::isfinite(*v)) {
    throw DataError("line " + std::to_string(line) + ": bad " + name + " '" + std::string(text) + "'");
  }
  return *v;
}

nlohmann::ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

} // namespace

// -------------------------------------------------------------
// Frames
// -------------------------------------------------------------

FrameReader::FrameReader(std::istream& in) : in_(in) {}

bool FrameReader::read_header() {
  header_checked_ = true;
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    if (compact_header(line) != kFrameHeader) {
      throw DataError("line " + std::to_string(line_) + ": expected header '" + kFrameHeader + "'");
    }
    return true;
  }
  return false;
}

FrameInput FrameReader::finish(Pending&& p) const {
  if (p.error) return FrameDiagnostic{p.timestamp_s, p.line, *p.error};
  return std::move(p.frame);
}

std::optional<FrameInput> FrameReader::next() {
  if (!header_checked_ && !read_header()) return std::nullopt;
  std::string line;
  while (ready_.empty() && std::getline(in_, line)) {
    ++line_;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    const auto ts = parse_double(fields[0]);
    if (!ts || !std::isfinite(*ts)) {
      // No usable timestamp: the row stands alone.
      if (pending_) {
        ready_.push_back(finish(std::move(*pending_)));
        pending_.reset();
      }
      ready_.push_back(FrameDiagnostic{std::nullopt, line_,
                                       "line " + std::to_string(line_) + ": bad timestamp '" +
                                           std::string(fields[0]) + "'"});
      continue;
    }

    if (pending_ && !(pending_->timestamp_s == *ts)) {
      ready_.push_back(finish(std::move(*pending_)));
      pending_.reset();
    }
    if (!pending_) {
      pending_ = Pending{*ts, line_, {}, std::nullopt};
      pending_->frame.timestamp_s = *ts;
    }
    Pending& p = *pending_;
    auto row_error = [&](const std::string& what) {
      if (!p.error) p.error = "line " + std::to_string(line_) + ": " + what;
    };

    if (fields.size() != 5) {
      row_error("expected 5 fields, got " + std::to_string(fields.size()));
    } else if (fields[1].empty()) {
      row_error("empty chord id");
    } else {
      const auto up = parse_double(fields[2]);
      const auto down = parse_double(fields[3]);
      const auto level = parse_double(fields[4]);
      if (!up || !down) {
        row_error("bad transit time");
      } else if (!level || !std::isfinite(*level)) {
        row_error("bad level '" + std::string(fields[4]) + "'");
      } else if (!p.frame.readings.empty() && *level != p.frame.level_mm) {
        row_error("level changes within a frame");
      } else {
        p.frame.level_mm = *level;
        p.frame.readings.push_back({std::string(fields[1]), *up * 1e-9, *down * 1e-9});
      }
    }
  }
  if (ready_.empty() && pending_) {
    ready_.push_back(finish(std::move(*pending_)));
    pending_.reset();
  }
  if (ready_.empty()) return std::nullopt;
  FrameInput out = std::move(ready_.front());
  ready_.pop_front();
  return out;
}

std::vector<FrameInput> read_frames(std::istream& in) {
  FrameReader reader(in);
  std::vector<FrameInput> out;
  while (auto f = reader.next()) out.push_back(std::move(*f));
  return out;
}

void write_frames(std::ostream& out, std::span<const SensorFrame> frames) {
  out << kFrameHeader << '\n';
  for (const SensorFrame& f : frames) {
    for (const ChordReading& r : f.readings) {
      out << format_double(f.timestamp_s) << ',' << r.chord_id << ',' << format_double(r.t_up_s * 1e9)
          << ',' << format_double(r.t_down_s * 1e9) << ',' << format_double(f.level_mm) << '\n';
    }
  }
}

// -------------------------------------------------------------
// Stream records
// -------------------------------------------------------------

namespace {

struct RecordJson {
  nlohmann::ordered_json operator()(const EstimateRecord& r) const {
    const FlowEstimate& e = r.estimate;
    nlohmann::ordered_json j;
    j["type"] = "estimate";
    j["timestamp_s"] = e.timestamp_s;
    j["level_mm"] = e.level_mm;
    j["v_mean_m_s"] = number_or_null(e.mean_line_velocity);
    j["area_m2"] = e.area_m2;
    j["fpcf"] = e.fpcf;
    j["k_cal"] = e.calibration_factor;
    j["q_lps"] = number_or_null(e.flow_lps());
    j["status"] = to_string(e.status);
    j["clog"] = r.verdict ? nlohmann::ordered_json(*r.verdict == Verdict::Clogging) : nullptr;
    j["alarm"] = to_string(r.alarm);
    auto chords = nlohmann::ordered_json::array();
    for (const ChordVelocity& c : e.chords) {
      nlohmann::ordered_json cj;
      cj["id"] = c.chord_id;
      cj["v_m_s"] = c.velocity_m_s;
      if (c.implausible) cj["implausible"] = true;
      chords.push_back(std::move(cj));
    }
    j["chords"] = std::move(chords);
    return j;
  }
  nlohmann::ordered_json operator()(const FrameDiagnostic& d) const {
    nlohmann::ordered_json j;
    j["type"] = "diagnostic";
    j["timestamp_s"] = number_or_null(d.timestamp_s);
    j["line"] = d.line;
    j["message"] = d.message;
    return j;
  }
  nlohmann::ordered_json operator()(const AlarmEventRecord& a) const {
    nlohmann::ordered_json j;
    j["type"] = "alarm";
    j["event"] = to_string(a.kind);
    j["timestamp_s"] = a.timestamp_s;
    j["level_mm"] = a.level_mm;
    j["v_mean_m_s"] = a.velocity_m_s;
    j["consecutive"] = a.consecutive;
    return j;
  }
};

} // namespace

void write_record(std::ostream& out, const StreamRecord& record) {
  out << std::visit(RecordJson{}, record).dump() << '\n';
}

void write_summary(std::ostream& out, const StreamSummary& s) {
  nlohmann::ordered_json j;
  j["type"] = "summary";
  j["frames"] = s.frames;
  j["estimates"] = s.estimates;
  j["diagnostics"] = s.diagnostics;
  j["alarms_raised"] = s.alarms_raised;
  j["alarms_cleared"] = s.alarms_cleared;
  out << j.dump() << '\n';
}

// -------------------------------------------------------------
// Tables
// -------------------------------------------------------------

std::vector<FpcfSample> read_fpcf_table(std::istream& in, double chord_height_mm) {
  const Table t = read_table(in);
  if (t.header != "H_mm,fpcf") throw DataError("expected header 'H_mm,fpcf'");
  std::vector<FpcfSample> out;
  for (const auto& [n, row] : t.rows) {
    const auto f = split(row);
    if (f.size() != 2) throw DataError("line " + std::to_string(n) + ": expected 2 fields");
    // nan marks a level where the FPCF is undefined.
    const auto value = parse_double(f[1]);
    if (!value || std::isinf(*value)) {
      throw DataError("line " + std::to_string(n) + ": bad fpcf '" + std::string(f[1]) + "'");
    }
    out.push_back({field_number(f[0], n, "H_mm"), chord_height_mm, *value});
  }
  return out;
}

void write_fpcf_table(std::ostream& out, std::span<const FpcfSample> samples) {
  out << "H_mm,fpcf\n";
  for (const FpcfSample& s : samples) out << format_double(s.level_mm) << ',' << format_double(s.value) << '\n';
}

void write_profile_grid(std::ostream& out, const ProfileGrid& grid) {
  out << "x_mm,y_mm,v_norm\n";
  for (Eigen::Index i = 0; i < grid.y.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.x.size(); ++j) {
      out << format_double(grid.x(j) * 1e3) << ',' << format_double(grid.y(i) * 1e3) << ','
          << format_double(grid.values(i, j)) << '\n';
    }
  }
}

namespace {

std::vector<TrialRecord> parse_trials(const Table& t) {
  std::vector<TrialRecord> out;
  for (const auto& [n, row] : t.rows) {
    const auto f = split(row);
    if (f.size() != 4) throw DataError("line " + std::to_string(n) + ": expected 4 fields");
    if (f[0].empty() || f[1].empty()) throw DataError("line " + std::to_string(n) + ": empty id or label");
    TrialRecord r{std::string(f[0]), std::string(f[1]), field_number(f[2], n, "q_ref_lps"),
                  field_number(f[3], n, "q_meas_lps")};
    if (!(r.q_ref_lps > 0.0)) throw DataError("line " + std::to_string(n) + ": q_ref_lps must be > 0");
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace

std::vector<TrialRecord> read_trials(std::istream& in) {
  const Table t = read_table(in);
  if (t.header != "segment_id,flow_label,q_ref_lps,q_meas_lps") {
    throw DataError("expected header 'segment_id,flow_label,q_ref_lps,q_meas_lps'");
  }
  return parse_trials(t);
}

MetricsInput read_metrics_input(std::istream& in) {
  const Table t = read_table(in);
  MetricsInput out;
  if (t.header == "segment_id,flow_label,q_ref_lps,q_meas_lps") {
    out.trials = parse_trials(t);
    return out;
  }
  if (t.header != "flow_lps,error_pct") {
    throw DataError("expected header 'segment_id,flow_label,q_ref_lps,q_meas_lps' or 'flow_lps,error_pct'");
  }
  for (const auto& [n, row] : t.rows) {
    const auto f = split(row);
    if (f.size() != 2) throw DataError("line " + std::to_string(n) + ": expected 2 fields");
    RateError e{field_number(f[0], n, "flow_lps"), field_number(f[1], n, "error_pct")};
    if (!(e.flow > 0.0)) throw DataError("line " + std::to_string(n) + ": flow_lps must be > 0");
    out.errors.push_back(e);
  }
  return out;
}

void write_error_table_text(std::ostream& out, const ErrorTable& table) {
  std::size_t label_width = std::string_view("flow").size();
  for (const RateRow& r : table.rows) label_width = std::max(label_width, r.flow_label.size());
  out << std::left << std::setw(static_cast<int>(label_width)) << "flow" << std::right << std::setw(12)
      << "q_ref_lps" << std::setw(12) << "q_meas_lps" << std::setw(11) << "error_%" << std::setw(8)
      << "trials" << '\n';
  out << std::fixed;
  for (const RateRow& r : table.rows) {
    out << std::left << std::setw(static_cast<int>(label_width)) << r.flow_label << std::right
        << std::setprecision(4) << std::setw(12) << r.q_ref_lps << std::setw(12) << r.q_meas_lps
        << std::setprecision(2) << std::setw(11) << r.error_pct << std::setw(8) << r.trials << '\n';
  }
  out << "FWME_%          " << std::setprecision(2) << table.fwme_pct << '\n';
  out << "max_abs_error_% " << std::setprecision(2) << table.max_abs_error_pct << '\n';
  out.unsetf(std::ios_base::floatfield);
}

void write_error_table_csv(std::ostream& out, const ErrorTable& table) {
  out << "flow_label,q_ref_lps,q_meas_lps,error_pct,trials\n";
  for (const RateRow& r : table.rows) {
    out << r.flow_label << ',' << format_double(r.q_ref_lps) << ',' << format_double(r.q_meas_lps) << ','
        << format_double(r.error_pct) << ',' << r.trials << '\n';
  }
  out << "fwme,,," << format_double(table.fwme_pct) << ",\n";
  out << "max_abs_error,,," << format_double(table.max_abs_error_pct) << ",\n";
}

} // namespace pipeflow
