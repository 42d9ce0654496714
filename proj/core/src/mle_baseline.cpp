#include "emv/mle_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "emv/rng.hpp"

namespace emv::mle {

EstimationWindow::EstimationWindow(double dt, std::size_t capacity)
    : dt_(dt), capacity_(capacity) {
  if (!(dt > 0.0)) throw std::invalid_argument("EstimationWindow: dt must be > 0");
  if (capacity < 2) throw std::invalid_argument("EstimationWindow: capacity must be >= 2");
}

void EstimationWindow::push(double price) {
  if (!(price > 0.0) || !std::isfinite(price)) {
    throw std::invalid_argument("EstimationWindow: price must be finite and > 0");
  }
  push_log(std::log(price));
}

void EstimationWindow::push_log(double log_price) {
  if (!std::isfinite(log_price)) {
    throw std::invalid_argument("EstimationWindow: log price must be finite");
  }
  prices_.push_back(log_price);
  if (prices_.size() > capacity_) prices_.pop_front();
}

Estimate mle_estimate(std::span<const double> prices, double dt) {
  std::vector<double> logs;
  logs.reserve(prices.size());
  for (double p : prices) {
    if (!(p > 0.0)) throw std::invalid_argument("mle_estimate: prices must be > 0");
    logs.push_back(std::log(p));
  }
  return mle_estimate_from_logs(logs, dt);
}

Estimate mle_estimate_from_logs(std::span<const double> log_prices, double dt) {
  if (log_prices.size() < 2) throw std::invalid_argument("mle_estimate: need at least 2 prices");
  if (!(dt > 0.0)) throw std::invalid_argument("mle_estimate: dt must be > 0");
  const std::size_t n = log_prices.size() - 1;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += log_prices[i + 1] - log_prices[i];
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = log_prices[i + 1] - log_prices[i] - mean;
    sq += d * d;
  }
  const double var = n > 1 ? sq / static_cast<double>(n - 1) : 0.0;
  const double sigma = std::max(std::sqrt(var / dt), kSigmaFloor);
  return {mean / dt + 0.5 * sigma * sigma, sigma};
}

Estimate mle_estimate(const EstimationWindow& window) {
  const std::vector<double> logs = window.log_prices();
  return mle_estimate_from_logs(logs, window.dt());
}

double plug_in_control(double /*t*/, double x, double mu_hat, double sigma_hat, double r,
                       double z, double x0_episode, double horizon) {
  if (!(sigma_hat > 0.0)) throw std::invalid_argument("plug_in_control: sigma_hat must be > 0");
  const double rho_hat = (mu_hat - r) / sigma_hat;
  if (!(std::abs(rho_hat) >= kMinSharpe)) return 0.0;
  // z + (z - x0) / (e^{rho^2 T} - 1), the overflow-safe form of the multiplier.
  const double w_hat = z + (z - x0_episode) / std::expm1(rho_hat * rho_hat * horizon);
  return -(rho_hat / sigma_hat) * (x - w_hat);
}

std::vector<double> MleRun::terminal_wealths() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.terminal_wealth);
  return out;
}

MleRun run_mle_experiment(sim::Market& market, const sim::TimeGrid& grid,
                          std::size_t episodes, double z, double x0, std::uint64_t seed) {
  MleRun run;
  if (episodes == 0) return run;
  run.episodes.reserve(episodes);

  EstimationWindow window(grid.dt());
  {
    Rng warmup(substream_seed(seed, streams::kWarmup, 0));
    window.push_log(market.log_price());
    while (!window.warmed_up()) {
      market.advance(grid.dt(), warmup);
      window.push_log(market.log_price());
    }
  }

  const double r = market.r();
  const double T = grid.horizon();
  for (std::size_t k = 0; k < episodes; ++k) {
    Estimate last{};
    auto sampler = [&](const sim::StepContext& ctx, Rng&) {
      last = mle_estimate(window);
      return plug_in_control(ctx.t, ctx.x, last.mu, last.sigma, r, z, x0, T);
    };
    auto observer = [&](const sim::WealthPath&) { window.push_log(market.log_price()); };
    const sim::WealthPath path = sim::run_episode(
        grid, market, sampler, x0, substream_seed(seed, streams::kEpisode, k), observer);

    EpisodeOutcome outcome;
    outcome.estimate = last;
    outcome.failed = path.failed;
    if (path.failed) {
      // The failing step moved the market without reaching the observer.
      window.push_log(market.log_price());
      outcome.terminal_wealth = std::numeric_limits<double>::quiet_NaN();
      ++run.failures;
    } else {
      outcome.terminal_wealth = path.x.back();
    }
    run.episodes.push_back(outcome);
  }
  return run;
}

}  // namespace emv::mle
