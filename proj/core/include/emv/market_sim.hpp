#pragma once

/**
 * @file market_sim.hpp
 * @brief Monte Carlo simulation of a one-risky-asset market.
 *
 * The risky asset follows a geometric Brownian motion (or the slow
 * stochastic-factor variant), the riskless asset grows at rate r, and all
 * wealth is discounted, so a position of u currency units in the risky asset
 * moves wealth by
 *
 *     dx = sigma * u * (rho * dt + dW),   rho = (mu - r) / sigma.
 *
 * Every random number consumed by learning and evaluation comes through this
 * module.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "emv/rng.hpp"

namespace emv::sim {

/// Constant market coefficients, annualized.
struct MarketParams {
  double mu = 0.0;     ///< drift of the risky asset
  double sigma = 0.1;  ///< volatility, > 0
  double r = 0.0;      ///< riskless rate

  /// Throws std::invalid_argument unless sigma > 0 and the Sharpe ratio is finite.
  void validate() const;
};

double sharpe_ratio(const MarketParams& params);

/// State of the slow factor model  d rho = delta dt,
/// d sigma = sigma (delta dt + sqrt(delta) dW1),  d<W, W1> = gamma dt.
struct FactorState {
  double rho = 0.0;
  double sigma = 0.1;
  double delta = 0.0;
  double gamma = 0.0;

  void validate() const;
};

/// One Euler-Maruyama step of the classical wealth equation.
double wealth_step(double x, double u, double rho, double sigma, double dt,
                   double z) noexcept;

/// Exact lognormal step of the price; always returns a positive value for s > 0.
double price_step(double s, double mu, double sigma, double dt, double z) noexcept;

/// Euler step of the exploratory (relaxed-control) wealth equation driven by a
/// control distribution with the given mean and variance.
double exploratory_wealth_step(double x, double policy_mean, double policy_var,
                               double rho, double sigma, double dt, double z);

/// Advances the factor state over dt. The volatility uses the exact lognormal
/// step so it stays positive.
FactorState advance_factor(const FactorState& state, double dt, double z1) noexcept;

struct CorrelatedDraws {
  double z = 0.0;
  double z1 = 0.0;
};

/// Maps two independent standard normals to a pair with correlation gamma.
CorrelatedDraws correlated_draws(double z, double z_perp, double gamma);

/**
 * Uniform grid t_0 = 0 < t_1 < ... < t_{l+1} = T with spacing dt.
 *
 * T / dt must be an integer (to 1e-9 relative); the grid then has
 * steps() = T / dt transitions and points() = steps() + 1 time stamps.
 */
class TimeGrid {
 public:
  TimeGrid(double horizon, double dt);

  double horizon() const noexcept { return horizon_; }
  double dt() const noexcept { return dt_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t points() const noexcept { return steps_ + 1; }
  /// Number of interior steps l, so that the last index is l + 1.
  std::size_t interior() const noexcept { return steps_ - 1; }
  double time(std::size_t i) const noexcept;

 private:
  double horizon_;
  double dt_;
  std::size_t steps_;
};

/**
 * Market environment: the current coefficients plus the risky-asset price.
 *
 * A stationary market keeps (mu, sigma) fixed. A stochastic-factor market
 * carries its factor state from step to step and from episode to episode, so
 * over M episodes the factor runs on [0, M T].
 */
class Market {
 public:
  static Market stationary(const MarketParams& params, double s0 = 1.0);
  static Market stochastic_factor(const FactorState& initial, double r,
                                  double s0 = 1.0);

  double rho() const noexcept;
  double sigma() const noexcept;
  double mu() const noexcept { return r_ + rho() * sigma(); }
  double r() const noexcept { return r_; }
  /// exp(log_price()); overflows to infinity on very long high-drift runs.
  double price() const noexcept { return std::exp(log_price_); }
  /// The price is tracked in logs so that long runs stay finite.
  double log_price() const noexcept { return log_price_; }
  bool has_factor() const noexcept { return factor_.has_value(); }
  const std::optional<FactorState>& factor() const noexcept { return factor_; }

  /// Draws the Brownian increment for one step, moves the price (and the
  /// factor, if any) forward and returns the standard-normal draw z that
  /// drives the wealth equation over the same step.
  double advance(double dt, Rng& rng);

 private:
  Market() = default;

  MarketParams params_{};
  std::optional<FactorState> factor_;
  double r_ = 0.0;
  double log_price_ = 0.0;
};

/// Sampled trajectory of one episode.
struct WealthPath {
  std::vector<double> t;  ///< t_0 .. t_{l+1}
  std::vector<double> x;  ///< wealth at each t_i
  std::vector<double> u;  ///< allocation held over [t_i, t_{i+1})
  bool failed = false;    ///< wealth or allocation became non-finite

  std::size_t transitions() const noexcept { return u.size(); }
};

/// What the action sampler sees at t_i.
struct StepContext {
  std::size_t index = 0;
  double t = 0.0;
  double x = 0.0;
  double price = 0.0;
  double rho = 0.0;    ///< exposed for oracles and baselines that know the model
  double sigma = 0.0;
};

using ActionSampler = std::function<double(const StepContext&, Rng&)>;
/// Called after every transition with the path observed so far.
using StepObserver = std::function<void(const WealthPath&)>;

/**
 * Simulates one episode on `grid` starting from x0.
 *
 * At each t_i the sampler draws u_i (policy noise is taken from the same
 * episode stream), then the market advances and x_{i+1} follows from
 * wealth_step with the coefficients in force at t_i. A non-finite allocation
 * or wealth ends the episode with `failed` set; the path then holds the
 * states observed up to the failure.
 */
WealthPath run_episode(const TimeGrid& grid, Market& market,
                       const ActionSampler& sampler, double x0, Rng& rng,
                       const StepObserver& observer = {});

WealthPath run_episode(const TimeGrid& grid, Market& market,
                       const ActionSampler& sampler, double x0,
                       std::uint64_t seed, const StepObserver& observer = {});

}  // namespace emv::sim
