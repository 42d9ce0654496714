#include "emv/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace emv::csv {

namespace {

constexpr std::size_t kResultColumns = 20;

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string optional_field(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("csv: bad number '" + text + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::runtime_error("csv: bad integer '" + text + "'");
  }
  return value;
}

std::optional<double> parse_optional(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return parse_double(text);
}

void expect_header(std::istream& in, const char* header) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw std::runtime_error("csv: unexpected header '" + line + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

std::string format_row(const ResultRow& row) {
  std::string s;
  s += quote(row.scenario_id) + ',';
  s += quote(row.method) + ',';
  s += format_double(row.mu) + ',';
  s += format_double(row.sigma) + ',';
  s += format_double(row.r) + ',';
  s += format_double(row.lambda) + ',';
  s += std::to_string(row.episodes) + ',';
  s += std::to_string(row.seed) + ',';
  s += optional_field(row.mean) + ',';
  s += optional_field(row.variance) + ',';
  s += optional_field(row.sharpe) + ',';
  s += optional_field(row.w_learned) + ',';
  s += optional_field(row.w_analytic) + ',';
  s += optional_field(row.phi1) + ',';
  s += optional_field(row.phi2) + ',';
  s += optional_field(row.theta0) + ',';
  s += optional_field(row.theta1) + ',';
  s += optional_field(row.theta2) + ',';
  s += optional_field(row.theta3) + ',';
  s += std::to_string(row.failures);
  return s;
}

ResultRow parse_row(const std::string& line) {
  const auto f = split_record(line);
  if (f.size() != kResultColumns) {
    throw std::runtime_error("csv: expected 20 fields, got " + std::to_string(f.size()));
  }
  ResultRow row;
  row.scenario_id = f[0];
  row.method = f[1];
  row.mu = parse_double(f[2]);
  row.sigma = parse_double(f[3]);
  row.r = parse_double(f[4]);
  row.lambda = parse_double(f[5]);
  row.episodes = parse_unsigned(f[6]);
  row.seed = parse_unsigned(f[7]);
  row.mean = parse_optional(f[8]);
  row.variance = parse_optional(f[9]);
  row.sharpe = parse_optional(f[10]);
  row.w_learned = parse_optional(f[11]);
  row.w_analytic = parse_optional(f[12]);
  row.phi1 = parse_optional(f[13]);
  row.phi2 = parse_optional(f[14]);
  row.theta0 = parse_optional(f[15]);
  row.theta1 = parse_optional(f[16]);
  row.theta2 = parse_optional(f[17]);
  row.theta3 = parse_optional(f[18]);
  row.failures = parse_unsigned(f[19]);
  return row;
}

void write_results(std::ostream& out, std::span<const ResultRow> rows) {
  out << kResultsHeader << '\n';
  for (const auto& row : rows) out << format_row(row) << '\n';
}

std::vector<ResultRow> read_results(std::istream& in) {
  expect_header(in, kResultsHeader);
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(parse_row(line));
  }
  return rows;
}

void write_curve(std::ostream& out, std::span<const stats::CurvePoint> curve) {
  out << kCurveHeader << '\n';
  for (const auto& p : curve) {
    out << p.bucket << ',' << p.episode_start << ',' << format_double(p.mean) << ','
        << (std::isnan(p.variance) ? std::string() : format_double(p.variance)) << '\n';
  }
}

std::vector<stats::CurvePoint> read_curve(std::istream& in) {
  expect_header(in, kCurveHeader);
  std::vector<stats::CurvePoint> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_record(line);
    if (f.size() != 4) throw std::runtime_error("csv: curve row needs 4 fields");
    stats::CurvePoint p;
    p.bucket = parse_unsigned(f[0]);
    p.episode_start = parse_unsigned(f[1]);
    p.mean = parse_double(f[2]);
    p.variance = f[3].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[3]);
    out.push_back(p);
  }
  return out;
}

void write_episodes(std::ostream& out, std::span<const double> terminal_wealths) {
  out << kEpisodeHeader << '\n';
  for (std::size_t k = 0; k < terminal_wealths.size(); ++k) {
    const double x = terminal_wealths[k];
    const bool failed = !std::isfinite(x);
    out << k << ',' << (failed ? std::string() : format_double(x)) << ',' << (failed ? 1 : 0)
        << '\n';
  }
}

std::vector<double> read_episodes(std::istream& in) {
  expect_header(in, kEpisodeHeader);
  std::vector<double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_record(line);
    if (f.size() != 3) throw std::runtime_error("csv: episode row needs 3 fields");
    if (parse_unsigned(f[0]) != out.size()) {
      throw std::runtime_error("csv: episode rows out of order");
    }
    const bool failed = parse_unsigned(f[2]) != 0;
    out.push_back(failed || f[1].empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : parse_double(f[1]));
  }
  return out;
}

}  // namespace emv::csv
