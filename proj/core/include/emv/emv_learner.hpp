#pragma once

/**
 * @file emv_learner.hpp
 * @brief Exploratory mean-variance (EMV) reinforcement learner.
 *
 * Three procedures run together:
 *
 *  - policy evaluation: the value is parametrized as
 *        V(t, x) = (x - w)^2 e^{-theta3 (T - t)} + theta2 t^2 + theta1 t + theta0
 *    and fitted by stochastic gradient descent on the discretized squared
 *    continuous-time Bellman error
 *        C = 1/2 sum_i (Vdot_i - lambda (phi1 + phi2 (T - t_i)))^2 dt;
 *  - policy improvement: the Gaussian policy whose entropy is
 *    phi1 + phi2 (T - t), with theta3 tied to 2 phi2;
 *  - a stochastic-approximation update of the Lagrange multiplier w from the
 *    average of the last N terminal wealths.
 *
 * No model coefficient (mu, sigma) is used by the learner.
 */

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "emv/market_sim.hpp"
#include "emv/mv_analytic.hpp"
#include "emv/stats.hpp"

namespace emv::learn {

struct ValueParams {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;  ///< curvature decay rate, kept equal to 2 phi2
};

struct PolicyParams {
  double phi1 = 0.0;
  double phi2 = 0.5;    ///< > 0
  int sign_hint = +1;   ///< multiplies the policy mean; -1 for markets with rho < 0
};

/// How the sign of the policy mean is chosen.
enum class SignMode {
  Positive,  ///< as derived for rho > 0
  Negative,
  Auto,      ///< decided after a warm-up from the sign of cov(u_i, x_{i+1} - x_i)
};

struct LearnerConfig {
  std::size_t episodes = 2000;  ///< M
  std::size_t avg_window = 10;  ///< N
  double alpha = 0.05;
  double eta_theta = 0.0005;
  double eta_phi = 0.0005;
  double lambda0 = 2.0;
  bool anneal = false;
  double horizon = 1.0;
  double dt = 1.0 / 252.0;
  double z = 1.4;
  double x0 = 1.0;
  SignMode sign = SignMode::Positive;
  std::size_t sign_warmup = 50;

  void validate() const;
  sim::TimeGrid grid() const { return {horizon, dt}; }
};

/// Lower bound kept on phi2 after every gradient step.
inline constexpr double kMinPhi2 = 1e-8;

/// Observed trajectory D = {(t_i, x_i)}; consecutive entries form the
/// transitions the loss is summed over.
struct EpisodeSamples {
  std::span<const double> t;
  std::span<const double> x;
  double dt = 0.0;

  std::size_t transitions() const noexcept { return x.empty() ? 0 : x.size() - 1; }
};

struct Gradients {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

double v_theta(double t, double x, const ValueParams& theta, double w, double horizon);

/// Difference quotient of v_theta along one observed transition.
double vdot(const ValueParams& theta, double w, double horizon, double t_i, double x_i,
            double t_next, double x_next, double dt);

/// Gaussian with entropy phi1 + phi2 (T - t):
/// mean  -sign * sqrt(2 phi2 / (lambda pi)) e^{(2 phi1 - 1) / 2} (x - w),
/// var   e^{2 phi2 (T - t) + 2 phi1 - 1} / (2 pi).
analytic::GaussianAction policy_from_phi(double t, double x, const PolicyParams& phi,
                                         double lambda, double w, double horizon);

double bellman_error(const ValueParams& theta, const PolicyParams& phi, double lambda,
                     double w, double horizon, double t_i, double x_i, double t_next,
                     double x_next, double dt);

double loss(const ValueParams& theta, const PolicyParams& phi, double lambda, double w,
            double horizon, const EpisodeSamples& samples);

/// Analytic gradients of `loss` in theta1, theta2, phi1, phi2. The phi2
/// component differentiates through the e^{-2 phi2 (T - t)} curvature.
Gradients gradients(const ValueParams& theta, const PolicyParams& phi, double lambda,
                    double w, double horizon, const EpisodeSamples& samples);

/// One descent step on (theta1, theta2, phi1, phi2), then phi2 := max(phi2, 1e-8),
/// theta3 := 2 phi2 and theta0 := -theta2 T^2 - theta1 T - (w - z)^2.
std::pair<ValueParams, PolicyParams> apply_updates(const ValueParams& theta,
                                                   const PolicyParams& phi,
                                                   const Gradients& grads, double eta_theta,
                                                   double eta_phi, double w, double z,
                                                   double horizon);

/// Terminal condition theta0 for the given (theta1, theta2, w).
double terminal_theta0(const ValueParams& theta, double w, double z, double horizon);

/// w - alpha * (mean(terminal_wealths) - z).
double update_w(double w, std::span<const double> terminal_wealths, double alpha, double z);

/// lambda0 (1 - exp(200 (k - M) / M)); nonincreasing with lambda_M = 0.
double lambda_schedule(std::size_t k, std::size_t episodes, double lambda0);

/// Starting point: theta = 0 except theta3 = 2 phi2, phi1 = 0.5 ln(pi e lambda0),
/// phi2 = 0.5, w = z.
struct LearnerState {
  ValueParams theta;
  PolicyParams phi;
  double w = 0.0;
};
LearnerState initial_state(const LearnerConfig& config);

struct EpisodeRecord {
  double terminal_wealth = 0.0;  ///< NaN for failed episodes
  bool failed = false;
  ValueParams theta;             ///< after the episode
  PolicyParams phi;
  double w = 0.0;
  double lambda = 0.0;           ///< exploration weight used in the episode
};

inline constexpr std::size_t kCurveBucket = 50;

struct TrainHistory {
  std::vector<EpisodeRecord> episodes;
  LearnerState final_state;
  std::size_t failures = 0;

  std::vector<double> terminal_wealths() const;
  /// Non-overlapping buckets of `bucket` episodes (failed ones skipped).
  std::vector<stats::CurvePoint> buckets(std::size_t bucket = kCurveBucket) const;
};

/**
 * Runs the EMV algorithm for config.episodes episodes.
 *
 * Within an episode the sampling policy is frozen at its episode-start
 * parameters; after every transition the value and policy parameters take
 * one gradient step on the loss of the samples collected so far in the
 * episode. Every N successful episodes w moves toward the target. Episodes
 * whose wealth overflows are recorded as failures; their parameter updates
 * are rolled back and they do not enter the w window.
 *
 * The market is advanced in place, so a stochastic-factor market keeps
 * evolving across episodes.
 */
TrainHistory train(const LearnerConfig& config, sim::Market& market, std::uint64_t seed);

}  // namespace emv::learn
