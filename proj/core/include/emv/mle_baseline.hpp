#pragma once

/**
 * @file mle_baseline.hpp
 * @brief Adaptive-control baseline: estimate (mu, sigma) from a rolling window
 *        of prices, then act with the classical optimal control.
 */

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "emv/market_sim.hpp"

namespace emv::mle {

inline constexpr std::size_t kWindowSize = 100;
inline constexpr double kSigmaFloor = 1e-6;
inline constexpr double kMinSharpe = 1e-8;

/// The most recent `capacity` price observations, spaced dt apart, kept as
/// log prices.
class EstimationWindow {
 public:
  explicit EstimationWindow(double dt, std::size_t capacity = kWindowSize);

  void push(double price);
  void push_log(double log_price);
  bool warmed_up() const noexcept { return prices_.size() == capacity_; }
  std::size_t size() const noexcept { return prices_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  double dt() const noexcept { return dt_; }
  std::vector<double> log_prices() const { return {prices_.begin(), prices_.end()}; }

 private:
  std::deque<double> prices_;  // logs
  double dt_;
  std::size_t capacity_;
};

struct Estimate {
  double mu = 0.0;
  double sigma = 0.0;
};

/// Log-return moment estimator: sigma^2 = sample variance (n - 1) / dt,
/// mu = mean / dt + sigma^2 / 2, with sigma floored at 1e-6.
Estimate mle_estimate(std::span<const double> prices, double dt);
Estimate mle_estimate_from_logs(std::span<const double> log_prices, double dt);
Estimate mle_estimate(const EstimationWindow& window);

/// Classical optimal allocation with the estimates plugged into both the
/// control and the Lagrange multiplier. Falls back to 0 when the estimated
/// Sharpe ratio is below 1e-8 in magnitude.
double plug_in_control(double t, double x, double mu_hat, double sigma_hat, double r,
                       double z, double x0_episode, double horizon);

struct EpisodeOutcome {
  double terminal_wealth = 0.0;  ///< NaN when failed
  bool failed = false;
  Estimate estimate;             ///< last estimate used in the episode
};

struct MleRun {
  std::vector<EpisodeOutcome> episodes;
  std::size_t failures = 0;

  std::vector<double> terminal_wealths() const;
};

/**
 * Warms the window up with 100 prices (the initial price plus 99 steps under
 * zero allocation), then runs M episodes. At every t_i the window, which keeps
 * rolling across episodes, is re-estimated and the plug-in control is applied.
 */
MleRun run_mle_experiment(sim::Market& market, const sim::TimeGrid& grid,
                          std::size_t episodes, double z, double x0, std::uint64_t seed);

}  // namespace emv::mle
