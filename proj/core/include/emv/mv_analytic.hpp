#pragma once

/**
 * @file mv_analytic.hpp
 * @brief Closed-form solution of the classical and the entropy-regularized
 *        (exploratory) continuous-time mean-variance problem.
 *
 * For a fixed Lagrange multiplier w the exploratory problem minimizes
 *
 *     E[(X_T - w)^2 + lambda * int_0^T int pi_t(u) ln pi_t(u) du dt] - (w - z)^2
 *
 * over distributional controls. Its value function is quadratic in x,
 *
 *     V(t, x) = (x - w)^2 e^{-rho^2 (T - t)} + F(t),
 *
 * and the optimal feedback policy is Gaussian with mean -(rho / sigma)(x - w)
 * and variance lambda / (2 sigma^2) e^{rho^2 (T - t)}. Everything here is
 * exact and serves as the reference for the learning code.
 *
 * Sharpe ratios may be negative; no formula takes absolute values.
 */

#include <utility>

#include "emv/market_sim.hpp"

namespace emv::analytic {

struct ProblemSpec {
  sim::MarketParams market{};
  double horizon = 1.0;  ///< T
  double x0 = 1.0;
  double z = 1.4;        ///< target mean terminal wealth
  double lambda = 2.0;   ///< exploration weight, >= 0

  double rho() const { return sim::sharpe_ratio(market); }
  void validate() const;
};

/// Mean and variance of a Gaussian action distribution at one state.
struct GaussianAction {
  double mean = 0.0;
  double variance = 0.0;
};

/**
 * Feedback policy N(mean_coeff * (x - w), var_scale * e^{var_rate * (T - t)}).
 * Both the optimal policy and the policy-iteration family live here.
 */
struct GaussianPolicy {
  double mean_coeff = 0.0;
  double w = 0.0;
  double var_scale = 1.0;  ///< c1 > 0
  double var_rate = 0.0;   ///< c2
  double horizon = 1.0;

  double mean(double x) const noexcept { return mean_coeff * (x - w); }
  double variance(double t) const noexcept;
  GaussianAction at(double t, double x) const noexcept { return {mean(x), variance(t)}; }
};

/**
 * Time-only remainder in the variable tau = T - t:
 *
 *     F(tau) = c0 + c1 tau + c2 tau^2 + c_exp * (e^{kappa tau} - 1) / kappa,
 *
 * with the last term replaced by its limit c_exp * tau when |kappa| < 1e-12.
 */
struct TimeRemainder {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c_exp = 0.0;
  double kappa = 0.0;

  double operator()(double tau) const noexcept;
  /// dF/dtau.
  double derivative(double tau) const noexcept;
};

/**
 * Value function quadratic in wealth:
 *
 *     v(t, x) = (x - w)^2 e^{-q (T - t)} + F(T - t).
 *
 * All derivatives are analytic.
 */
class QuadraticValue {
 public:
  QuadraticValue(double curvature_rate, double w, double horizon, TimeRemainder remainder);

  double operator()(double t, double x) const noexcept;
  double dt(double t, double x) const noexcept;
  double dx(double t, double x) const noexcept;
  double dxx(double t) const noexcept;

  double curvature_rate() const noexcept { return q_; }
  double w() const noexcept { return w_; }
  double horizon() const noexcept { return horizon_; }
  const TimeRemainder& remainder() const noexcept { return remainder_; }

 private:
  double q_;
  double w_;
  double horizon_;
  TimeRemainder remainder_;
};

/// w such that the optimal mean terminal wealth equals z. Throws when rho == 0.
double lagrange_w(const ProblemSpec& spec);

double classical_control(double t, double x, double w, double rho, double sigma);

double classical_value(double t, double x, const ProblemSpec& spec, double w);
QuadraticValue classical_value_function(const ProblemSpec& spec, double w);

/// Optimal value of the exploratory problem. Requires lambda > 0.
double exploratory_value(double t, double x, const ProblemSpec& spec, double w);
QuadraticValue exploratory_value_function(const ProblemSpec& spec, double w);

GaussianAction optimal_policy(double t, double x, const ProblemSpec& spec, double w);
GaussianPolicy optimal_gaussian_policy(const ProblemSpec& spec, double w);

/// Differential entropy of N(., variance): 0.5 ln(2 pi e variance).
double gaussian_entropy(double variance);

/// lambda * T / 2.
double exploration_cost(double lambda, double horizon);

/// Entropy of the optimal policy integrated over [0, T].
double integrated_optimal_entropy(const ProblemSpec& spec);

/**
 * Exploration cost from its definition: the optimal exploratory value at
 * (0, x0) with the accumulated entropy bonus removed, minus the classical
 * optimal value at (0, x0).
 */
double exploration_cost_from_values(const ProblemSpec& spec, double w);

/// Gaussian that minimizes the entropy-regularized Hamiltonian at a state
/// where the current value has derivatives (vx, vxx). Requires vxx > 0.
GaussianAction policy_improvement(double vx, double vxx, double rho, double sigma,
                                  double lambda);

/// Policy improvement applied to a whole quadratic value function.
GaussianPolicy improve(const QuadraticValue& value, const ProblemSpec& spec);

/// Value of the feedback policy N(a (x - w), c1 e^{c2 (T - t)}).
double value_of_initial_gaussian(double t, double x, double a, double c1, double c2,
                                 const ProblemSpec& spec, double w);
QuadraticValue value_of_gaussian(const GaussianPolicy& policy, const ProblemSpec& spec);

/// Two rounds of policy iteration from N(a (x - w), c1 e^{c2 (T - t)}).
std::pair<GaussianPolicy, GaussianPolicy> improve_twice(double a, double c1, double c2,
                                                        const ProblemSpec& spec, double w);
std::pair<GaussianPolicy, GaussianPolicy> improve_twice(double a, double c1, double c2,
                                                        const ProblemSpec& spec);

/// Left-hand side of the HJB equation after the inner minimization:
/// v_t - (rho^2 / 2) v_x^2 / v_xx + (lambda / 2)(1 - ln(2 pi e lambda / (sigma^2 v_xx))).
/// With lambda == 0 the entropy term is dropped (classical HJB).
double hjb_residual(const QuadraticValue& value, double t, double x,
                    const ProblemSpec& spec);

/// E[X*_t] under the optimal policy: (x0 - w) e^{-rho^2 t} + w.
double mean_wealth(double t, const ProblemSpec& spec, double w);

}  // namespace emv::analytic
