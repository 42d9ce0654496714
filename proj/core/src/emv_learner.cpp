#include "emv/emv_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace emv::learn {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite_state(const ValueParams& theta, const PolicyParams& phi) {
  return std::isfinite(theta.theta0) && std::isfinite(theta.theta1) &&
         std::isfinite(theta.theta2) && std::isfinite(theta.theta3) &&
         std::isfinite(phi.phi1) && std::isfinite(phi.phi2);
}

}  // namespace

void LearnerConfig::validate() const {
  if (avg_window < 1) throw std::invalid_argument("LearnerConfig: N must be >= 1");
  if (episodes != 0 && episodes < avg_window) {
    throw std::invalid_argument("LearnerConfig: M must be >= N");
  }
  if (!(alpha > 0.0) || !(eta_theta > 0.0) || !(eta_phi > 0.0)) {
    throw std::invalid_argument("LearnerConfig: learning rates must be > 0");
  }
  if (!(lambda0 > 0.0)) throw std::invalid_argument("LearnerConfig: lambda0 must be > 0");
  (void)grid();
}

double v_theta(double t, double x, const ValueParams& theta, double w, double horizon) {
  const double d = x - w;
  return d * d * std::exp(-theta.theta3 * (horizon - t)) + theta.theta2 * t * t +
         theta.theta1 * t + theta.theta0;
}

double vdot(const ValueParams& theta, double w, double horizon, double t_i, double x_i,
            double t_next, double x_next, double dt) {
  return (v_theta(t_next, x_next, theta, w, horizon) - v_theta(t_i, x_i, theta, w, horizon)) /
         dt;
}

analytic::GaussianAction policy_from_phi(double t, double x, const PolicyParams& phi,
                                         double lambda, double w, double horizon) {
  if (!(phi.phi2 > 0.0)) throw std::invalid_argument("policy_from_phi: phi2 must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("policy_from_phi: lambda must be > 0");
  const double coeff =
      std::sqrt(2.0 * phi.phi2 / (lambda * kPi)) * std::exp((2.0 * phi.phi1 - 1.0) / 2.0);
  const double mean = -static_cast<double>(phi.sign_hint) * coeff * (x - w);
  const double variance =
      std::exp(2.0 * phi.phi2 * (horizon - t) + 2.0 * phi.phi1 - 1.0) / (2.0 * kPi);
  return {mean, variance};
}

double bellman_error(const ValueParams& theta, const PolicyParams& phi, double lambda,
                     double w, double horizon, double t_i, double x_i, double t_next,
                     double x_next, double dt) {
  return vdot(theta, w, horizon, t_i, x_i, t_next, x_next, dt) -
         lambda * (phi.phi1 + phi.phi2 * (horizon - t_i));
}

double loss(const ValueParams& theta, const PolicyParams& phi, double lambda, double w,
            double horizon, const EpisodeSamples& samples) {
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.transitions(); ++i) {
    const double delta = bellman_error(theta, phi, lambda, w, horizon, samples.t[i],
                                       samples.x[i], samples.t[i + 1], samples.x[i + 1],
                                       samples.dt);
    sum += delta * delta;
  }
  return 0.5 * sum * samples.dt;
}

Gradients gradients(const ValueParams& theta, const PolicyParams& phi, double lambda,
                    double w, double horizon, const EpisodeSamples& samples) {
  Gradients g;
  const std::size_t n = samples.transitions();
  if (n == 0) return g;
  const double dt = samples.dt;

  // Per-point pieces, evaluated once and shared by the two transitions
  // touching each point.
  auto point = [&](std::size_t j, double& value, double& curvature_slope) {
    const double t = samples.t[j];
    const double d = samples.x[j] - w;
    const double tau = horizon - t;
    value = d * d * std::exp(-theta.theta3 * tau) + theta.theta2 * t * t + theta.theta1 * t +
            theta.theta0;
    // d/dphi2 of (x - w)^2 e^{-2 phi2 tau}
    curvature_slope = -2.0 * d * d * std::exp(-2.0 * phi.phi2 * tau) * tau;
  };

  double v_prev = 0.0;
  double s_prev = 0.0;
  point(0, v_prev, s_prev);
  for (std::size_t i = 0; i < n; ++i) {
    double v_next = 0.0;
    double s_next = 0.0;
    point(i + 1, v_next, s_next);
    const double t_i = samples.t[i];
    const double t_next = samples.t[i + 1];
    const double tau_i = horizon - t_i;
    const double delta = (v_next - v_prev) / dt - lambda * (phi.phi1 + phi.phi2 * tau_i);

    g.theta1 += delta * dt;
    g.theta2 += delta * (t_next * t_next - t_i * t_i);
    g.phi2 += delta * dt * ((s_next - s_prev) / dt - lambda * tau_i);

    v_prev = v_next;
    s_prev = s_next;
  }
  g.phi1 = -lambda * g.theta1;
  return g;
}

double terminal_theta0(const ValueParams& theta, double w, double z, double horizon) {
  const double gap = w - z;
  return -theta.theta2 * horizon * horizon - theta.theta1 * horizon - gap * gap;
}

std::pair<ValueParams, PolicyParams> apply_updates(const ValueParams& theta,
                                                   const PolicyParams& phi,
                                                   const Gradients& grads, double eta_theta,
                                                   double eta_phi, double w, double z,
                                                   double horizon) {
  ValueParams next_theta = theta;
  PolicyParams next_phi = phi;
  next_theta.theta1 -= eta_theta * grads.theta1;
  next_theta.theta2 -= eta_theta * grads.theta2;
  next_phi.phi1 -= eta_phi * grads.phi1;
  next_phi.phi2 = std::max(phi.phi2 - eta_phi * grads.phi2, kMinPhi2);
  next_theta.theta3 = 2.0 * next_phi.phi2;
  next_theta.theta0 = terminal_theta0(next_theta, w, z, horizon);
  return {next_theta, next_phi};
}

double update_w(double w, std::span<const double> terminal_wealths, double alpha, double z) {
  if (terminal_wealths.empty()) throw std::invalid_argument("update_w: empty window");
  double sum = 0.0;
  for (double x : terminal_wealths) sum += x;
  const double mean = sum / static_cast<double>(terminal_wealths.size());
  return w - alpha * (mean - z);
}

double lambda_schedule(std::size_t k, std::size_t episodes, double lambda0) {
  if (k > episodes) throw std::invalid_argument("lambda_schedule: k > M");
  if (episodes == 0) return 0.0;
  const double m = static_cast<double>(episodes);
  const double ratio = 200.0 * (static_cast<double>(k) - m) / m;
  return -lambda0 * std::expm1(ratio);
}

LearnerState initial_state(const LearnerConfig& config) {
  LearnerState s;
  s.phi.phi1 = 0.5 * std::log(kPi * std::numbers::e * config.lambda0);
  s.phi.phi2 = 0.5;
  s.phi.sign_hint = config.sign == SignMode::Negative ? -1 : +1;
  s.theta.theta3 = 2.0 * s.phi.phi2;
  s.w = config.z;
  s.theta.theta0 = terminal_theta0(s.theta, s.w, config.z, config.horizon);
  return s;
}

std::vector<double> TrainHistory::terminal_wealths() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.terminal_wealth);
  return out;
}

std::vector<stats::CurvePoint> TrainHistory::buckets(std::size_t bucket) const {
  const std::vector<double> wealth = terminal_wealths();
  return stats::learning_curve(wealth, bucket);
}

TrainHistory train(const LearnerConfig& config, sim::Market& market, std::uint64_t seed) {
  config.validate();
  const sim::TimeGrid grid = config.grid();
  const double T = config.horizon;

  TrainHistory history;
  history.episodes.reserve(config.episodes);
  LearnerState state = initial_state(config);

  std::vector<double> window;
  window.reserve(config.avg_window);
  double sign_evidence = 0.0;

  for (std::size_t k = 0; k < config.episodes; ++k) {
    // Episodes are indexed 0..M-1, so lambda_k stays positive while sampling.
    const double lambda =
        config.anneal ? lambda_schedule(k, config.episodes, config.lambda0) : config.lambda0;
    const LearnerState start = state;

    auto sampler = [&](const sim::StepContext& ctx, Rng& rng) {
      const auto action = policy_from_phi(ctx.t, ctx.x, start.phi, lambda, start.w, T);
      return action.mean + std::sqrt(action.variance) * rng.normal();
    };

    bool diverged = false;
    auto observer = [&](const sim::WealthPath& path) {
      if (diverged) return;
      const EpisodeSamples samples{path.t, path.x, grid.dt()};
      const Gradients g = gradients(state.theta, state.phi, lambda, state.w, T, samples);
      auto [theta, phi] = apply_updates(state.theta, state.phi, g, config.eta_theta,
                                        config.eta_phi, state.w, config.z, T);
      if (!finite_state(theta, phi)) {
        diverged = true;
        return;
      }
      state.theta = theta;
      state.phi = phi;
    };

    sim::WealthPath path =
        sim::run_episode(grid, market, sampler, config.x0,
                         substream_seed(seed, streams::kEpisode, k), observer);

    EpisodeRecord record;
    record.lambda = lambda;
    record.failed = path.failed || diverged;
    if (record.failed) {
      state = start;
      record.terminal_wealth = std::numeric_limits<double>::quiet_NaN();
      ++history.failures;
    } else {
      record.terminal_wealth = path.x.back();
      if (config.sign == SignMode::Auto && k < config.sign_warmup) {
        for (std::size_t i = 0; i < path.u.size(); ++i) {
          sign_evidence += path.u[i] * (path.x[i + 1] - path.x[i]);
        }
      }
      window.push_back(record.terminal_wealth);
      if (window.size() == config.avg_window) {
        state.w = update_w(state.w, window, config.alpha, config.z);
        state.theta.theta0 = terminal_theta0(state.theta, state.w, config.z, T);
        window.clear();
      }
    }
    if (config.sign == SignMode::Auto && k + 1 == config.sign_warmup) {
      state.phi.sign_hint = sign_evidence >= 0.0 ? +1 : -1;
    }

    record.theta = state.theta;
    record.phi = state.phi;
    record.w = state.w;
    history.episodes.push_back(record);
  }
  history.final_state = state;
  return history;
}

}  // namespace emv::learn
