#include "emv/market_sim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emv::sim {

void MarketParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("MarketParams: sigma must be positive and finite");
  }
  if (!std::isfinite(mu) || !std::isfinite(r)) {
    throw std::invalid_argument("MarketParams: mu and r must be finite");
  }
}

double sharpe_ratio(const MarketParams& params) {
  return (params.mu - params.r) / params.sigma;
}

void FactorState::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("FactorState: sigma must be > 0");
  if (!(delta >= 0.0)) throw std::invalid_argument("FactorState: delta must be >= 0");
  if (!(std::abs(gamma) < 1.0)) {
    throw std::invalid_argument("FactorState: |gamma| must be < 1");
  }
  if (!std::isfinite(rho)) throw std::invalid_argument("FactorState: rho must be finite");
}

double wealth_step(double x, double u, double rho, double sigma, double dt,
                   double z) noexcept {
  return x + sigma * u * (rho * dt + std::sqrt(dt) * z);
}

double price_step(double s, double mu, double sigma, double dt, double z) noexcept {
  return s * std::exp((mu - 0.5 * sigma * sigma) * dt + sigma * std::sqrt(dt) * z);
}

double exploratory_wealth_step(double x, double policy_mean, double policy_var,
                               double rho, double sigma, double dt, double z) {
  if (policy_var < 0.0) {
    throw std::invalid_argument("exploratory_wealth_step: negative policy variance");
  }
  if (policy_var == 0.0) return wealth_step(x, policy_mean, rho, sigma, dt, z);
  // The diffusion amplitude carries the sign of the mean so that a Dirac
  // policy moves with the noise exactly as the classical step does; the law
  // of the step is unchanged because z is symmetric.
  const double amplitude =
      std::copysign(std::sqrt(policy_mean * policy_mean + policy_var), policy_mean);
  return x + sigma * (rho * policy_mean * dt + amplitude * std::sqrt(dt) * z);
}

FactorState advance_factor(const FactorState& state, double dt, double z1) noexcept {
  FactorState next = state;
  const double d = state.delta;
  next.rho = state.rho + d * dt;
  next.sigma = state.sigma * std::exp((d - 0.5 * d) * dt + std::sqrt(d * dt) * z1);
  return next;
}

CorrelatedDraws correlated_draws(double z, double z_perp, double gamma) {
  if (!(std::abs(gamma) < 1.0)) {
    throw std::invalid_argument("correlated_draws: |gamma| must be < 1");
  }
  return {z, gamma * z + std::sqrt(1.0 - gamma * gamma) * z_perp};
}

TimeGrid::TimeGrid(double horizon, double dt) : horizon_(horizon), dt_(dt) {
  if (!(horizon > 0.0) || !(dt > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("TimeGrid: horizon and dt must be positive");
  }
  const double ratio = horizon / dt;
  const double n = std::round(ratio);
  if (n < 2.0 || std::abs(ratio - n) > 1e-9 * n) {
    throw std::invalid_argument("TimeGrid: T/dt must be an integer >= 2, got " +
                                std::to_string(ratio));
  }
  steps_ = static_cast<std::size_t>(n);
}

double TimeGrid::time(std::size_t i) const noexcept {
  if (i >= steps_) return horizon_;
  return horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
}

Market Market::stationary(const MarketParams& params, double s0) {
  params.validate();
  if (!(s0 > 0.0)) throw std::invalid_argument("Market: initial price must be > 0");
  Market m;
  m.params_ = params;
  m.r_ = params.r;
  m.log_price_ = std::log(s0);
  return m;
}

Market Market::stochastic_factor(const FactorState& initial, double r, double s0) {
  initial.validate();
  if (!(s0 > 0.0)) throw std::invalid_argument("Market: initial price must be > 0");
  Market m;
  m.factor_ = initial;
  m.r_ = r;
  m.log_price_ = std::log(s0);
  m.params_ = {r + initial.rho * initial.sigma, initial.sigma, r};
  return m;
}

double Market::rho() const noexcept {
  return factor_ ? factor_->rho : sharpe_ratio(params_);
}

double Market::sigma() const noexcept {
  return factor_ ? factor_->sigma : params_.sigma;
}

double Market::advance(double dt, Rng& rng) {
  const double z = rng.normal();
  const double vol = sigma();
  log_price_ += (mu() - 0.5 * vol * vol) * dt + vol * std::sqrt(dt) * z;
  if (factor_) {
    const auto draws = correlated_draws(z, rng.normal(), factor_->gamma);
    factor_ = advance_factor(*factor_, dt, draws.z1);
  }
  return z;
}

WealthPath run_episode(const TimeGrid& grid, Market& market,
                       const ActionSampler& sampler, double x0, Rng& rng,
                       const StepObserver& observer) {
  WealthPath path;
  const std::size_t n = grid.steps();
  path.t.reserve(n + 1);
  path.x.reserve(n + 1);
  path.u.reserve(n);
  path.t.push_back(0.0);
  path.x.push_back(x0);

  const double dt = grid.dt();
  for (std::size_t i = 0; i < n; ++i) {
    const StepContext ctx{i, path.t.back(), path.x.back(), market.price(),
                          market.rho(), market.sigma()};
    const double u = sampler(ctx, rng);
    const double rho = market.rho();
    const double sigma = market.sigma();
    const double z = market.advance(dt, rng);
    const double next = wealth_step(ctx.x, u, rho, sigma, dt, z);
    if (!std::isfinite(u) || !std::isfinite(next)) {
      path.failed = true;
      return path;
    }
    path.u.push_back(u);
    path.t.push_back(grid.time(i + 1));
    path.x.push_back(next);
    if (observer) observer(path);
  }
  return path;
}

WealthPath run_episode(const TimeGrid& grid, Market& market,
                       const ActionSampler& sampler, double x0,
                       std::uint64_t seed, const StepObserver& observer) {
  Rng rng(seed);
  return run_episode(grid, market, sampler, x0, rng, observer);
}

}  // namespace emv::sim
