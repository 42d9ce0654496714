#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace emv::stats {

/// Default size of the trailing window of terminal wealths.
inline constexpr std::size_t kTrailingWindow = 2000;

struct TrailingStats {
  double mean = 0.0;
  double variance = 0.0;          ///< unbiased (n - 1)
  std::optional<double> sharpe;   ///< (mean - 1) / sqrt(variance); empty when variance == 0
};

/// Requires at least two values.
TrailingStats trailing_stats(std::span<const double> values);

/// The last `count` finite entries of `values`, in order. Failed episodes are
/// logged as NaN and skipped here.
std::vector<double> last_finite(std::span<const double> values, std::size_t count);

/// Desk-scale default window: min(2000, M / 2).
std::size_t default_window(std::size_t episodes);

struct CurvePoint {
  std::size_t bucket = 0;
  std::size_t episode_start = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased; NaN with fewer than two finite values
};

/// Non-overlapping buckets of `bucket` consecutive episodes; a trailing
/// partial bucket is dropped and NaN entries are ignored inside a bucket.
std::vector<CurvePoint> learning_curve(std::span<const double> terminal_wealths,
                                       std::size_t bucket);

}  // namespace emv::stats
