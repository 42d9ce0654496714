#include "emv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace emv::stats {

namespace {

struct Moments {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();
  std::size_t n = 0;
};

// Two-pass moments over the finite entries.
Moments moments(std::span<const double> values) {
  Moments m;
  double sum = 0.0;
  double first = 0.0;
  bool constant = true;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (m.n == 0) first = v;
    constant = constant && v == first;
    sum += v;
    ++m.n;
  }
  if (m.n == 0) return m;
  // A constant sample keeps its exact value and zero spread; summation
  // rounding would otherwise leave a spurious tiny variance.
  m.mean = constant ? first : sum / static_cast<double>(m.n);
  if (m.n < 2) return m;
  if (constant) {
    m.variance = 0.0;
    return m;
  }
  double sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    sq += (v - m.mean) * (v - m.mean);
  }
  m.variance = sq / static_cast<double>(m.n - 1);
  return m;
}

}  // namespace

TrailingStats trailing_stats(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("trailing_stats: need at least 2 values");
  const Moments m = moments(values);
  if (m.n < 2) throw std::invalid_argument("trailing_stats: need at least 2 finite values");
  TrailingStats s{m.mean, m.variance, std::nullopt};
  if (m.variance > 0.0) s.sharpe = (m.mean - 1.0) / std::sqrt(m.variance);
  return s;
}

std::vector<double> last_finite(std::span<const double> values, std::size_t count) {
  std::vector<double> out;
  for (auto it = values.rbegin(); it != values.rend() && out.size() < count; ++it) {
    if (std::isfinite(*it)) out.push_back(*it);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t default_window(std::size_t episodes) {
  return std::min(kTrailingWindow, episodes / 2);
}

std::vector<CurvePoint> learning_curve(std::span<const double> terminal_wealths,
                                       std::size_t bucket) {
  if (bucket == 0) throw std::invalid_argument("learning_curve: bucket must be >= 1");
  std::vector<CurvePoint> out;
  for (std::size_t start = 0; start + bucket <= terminal_wealths.size(); start += bucket) {
    const Moments m = moments(terminal_wealths.subspan(start, bucket));
    out.push_back({out.size(), start, m.mean, m.variance});
  }
  return out;
}

}  // namespace emv::stats
