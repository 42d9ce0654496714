#include "emv/mv_analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace emv::analytic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;
constexpr double kRemovableSingularity = 1e-12;

void require_time(double t, double horizon, const char* where) {
  if (!(t >= 0.0 && t <= horizon)) {
    throw std::invalid_argument(std::string(where) + ": t outside [0, T]");
  }
}

void require_lambda(double lambda, const char* where) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument(std::string(where) + ": lambda must be > 0");
  }
}

}  // namespace

void ProblemSpec::validate() const {
  market.validate();
  if (!(horizon > 0.0)) throw std::invalid_argument("ProblemSpec: T must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("ProblemSpec: lambda must be >= 0");
}

double GaussianPolicy::variance(double t) const noexcept {
  return var_scale * std::exp(var_rate * (horizon - t));
}

double TimeRemainder::operator()(double tau) const noexcept {
  const double integral = std::abs(kappa) < kRemovableSingularity
                              ? tau
                              : std::expm1(kappa * tau) / kappa;
  return c0 + c1 * tau + c2 * tau * tau + c_exp * integral;
}

double TimeRemainder::derivative(double tau) const noexcept {
  return c1 + 2.0 * c2 * tau + c_exp * std::exp(kappa * tau);
}

QuadraticValue::QuadraticValue(double curvature_rate, double w, double horizon,
                               TimeRemainder remainder)
    : q_(curvature_rate), w_(w), horizon_(horizon), remainder_(remainder) {}

double QuadraticValue::operator()(double t, double x) const noexcept {
  const double tau = horizon_ - t;
  const double d = x - w_;
  return d * d * std::exp(-q_ * tau) + remainder_(tau);
}

double QuadraticValue::dt(double t, double x) const noexcept {
  const double tau = horizon_ - t;
  const double d = x - w_;
  return q_ * d * d * std::exp(-q_ * tau) - remainder_.derivative(tau);
}

double QuadraticValue::dx(double t, double x) const noexcept {
  return 2.0 * (x - w_) * std::exp(-q_ * (horizon_ - t));
}

double QuadraticValue::dxx(double t) const noexcept {
  return 2.0 * std::exp(-q_ * (horizon_ - t));
}

double lagrange_w(const ProblemSpec& spec) {
  const double rho = spec.rho();
  if (rho == 0.0) {
    throw std::domain_error("lagrange_w: zero Sharpe ratio, the mean target is unattainable");
  }
  // (z e^{rho^2 T} - x0) / (e^{rho^2 T} - 1), written to survive overflow.
  const double growth = std::expm1(rho * rho * spec.horizon);
  return spec.z + (spec.z - spec.x0) / growth;
}

double classical_control(double /*t*/, double x, double w, double rho, double sigma) {
  return -(rho / sigma) * (x - w);
}

QuadraticValue classical_value_function(const ProblemSpec& spec, double w) {
  const double rho = spec.rho();
  const double gap = w - spec.z;
  return QuadraticValue(rho * rho, w, spec.horizon, TimeRemainder{-gap * gap});
}

double classical_value(double t, double x, const ProblemSpec& spec, double w) {
  require_time(t, spec.horizon, "classical_value");
  return classical_value_function(spec, w)(t, x);
}

QuadraticValue exploratory_value_function(const ProblemSpec& spec, double w) {
  require_lambda(spec.lambda, "exploratory_value");
  const double rho = spec.rho();
  const double sigma = spec.market.sigma;
  const double lambda = spec.lambda;
  const double gap = w - spec.z;
  // lambda rho^2 (T^2 - t^2) / 4 - (lambda / 2)(rho^2 T - ln(sigma^2 / (pi lambda)))(T - t)
  // collapses, in tau = T - t, to the two terms below.
  TimeRemainder remainder;
  remainder.c0 = -gap * gap;
  remainder.c1 = 0.5 * lambda * std::log(sigma * sigma / (kPi * lambda));
  remainder.c2 = -0.25 * lambda * rho * rho;
  return QuadraticValue(rho * rho, w, spec.horizon, remainder);
}

double exploratory_value(double t, double x, const ProblemSpec& spec, double w) {
  require_time(t, spec.horizon, "exploratory_value");
  return exploratory_value_function(spec, w)(t, x);
}

GaussianPolicy optimal_gaussian_policy(const ProblemSpec& spec, double w) {
  require_lambda(spec.lambda, "optimal_policy");
  const double rho = spec.rho();
  const double sigma = spec.market.sigma;
  return {-rho / sigma, w, spec.lambda / (2.0 * sigma * sigma), rho * rho, spec.horizon};
}

GaussianAction optimal_policy(double t, double x, const ProblemSpec& spec, double w) {
  require_time(t, spec.horizon, "optimal_policy");
  return optimal_gaussian_policy(spec, w).at(t, x);
}

double gaussian_entropy(double variance) {
  if (!(variance > 0.0)) {
    throw std::invalid_argument("gaussian_entropy: variance must be > 0");
  }
  return 0.5 * std::log(2.0 * kPi * kE * variance);
}

double exploration_cost(double lambda, double horizon) { return 0.5 * lambda * horizon; }

double integrated_optimal_entropy(const ProblemSpec& spec) {
  // The entropy is affine in t, so Simpson's rule is exact.
  const GaussianPolicy policy = optimal_gaussian_policy(spec, 0.0);
  const double T = spec.horizon;
  const double h0 = gaussian_entropy(policy.variance(0.0));
  const double hm = gaussian_entropy(policy.variance(0.5 * T));
  const double h1 = gaussian_entropy(policy.variance(T));
  return T / 6.0 * (h0 + 4.0 * hm + h1);
}

double exploration_cost_from_values(const ProblemSpec& spec, double w) {
  // E int int pi ln pi = -(integrated entropy); the entropy does not depend on
  // the wealth path, so the expectation is deterministic.
  const double entropy_bonus = -spec.lambda * integrated_optimal_entropy(spec);
  return exploratory_value(0.0, spec.x0, spec, w) - entropy_bonus -
         classical_value(0.0, spec.x0, spec, w);
}

GaussianAction policy_improvement(double vx, double vxx, double rho, double sigma,
                                  double lambda) {
  if (!(vxx > 0.0)) {
    throw std::domain_error("policy_improvement: value function is not strictly convex");
  }
  require_lambda(lambda, "policy_improvement");
  return {-(rho / sigma) * vx / vxx, lambda / (sigma * sigma * vxx)};
}

GaussianPolicy improve(const QuadraticValue& value, const ProblemSpec& spec) {
  require_lambda(spec.lambda, "improve");
  // v_x / v_xx = x - w and v_xx = 2 e^{-q (T - t)}.
  const double sigma = spec.market.sigma;
  return {-spec.rho() / sigma, value.w(), spec.lambda / (2.0 * sigma * sigma),
          value.curvature_rate(), value.horizon()};
}

QuadraticValue value_of_gaussian(const GaussianPolicy& policy, const ProblemSpec& spec) {
  if (!(policy.var_scale > 0.0)) {
    throw std::invalid_argument("value_of_gaussian: c1 must be > 0");
  }
  const double rho = spec.rho();
  const double sigma = spec.market.sigma;
  const double a = policy.mean_coeff;
  const double c1 = policy.var_scale;
  const double c2 = policy.var_rate;
  const double growth = 2.0 * rho * sigma * a + sigma * sigma * a * a;
  const double gap = policy.w - spec.z;

  TimeRemainder remainder;
  remainder.c0 = -gap * gap;
  remainder.c1 = -0.5 * spec.lambda * std::log(2.0 * kPi * kE * c1);
  remainder.c2 = -0.25 * spec.lambda * c2;
  remainder.c_exp = c1 * sigma * sigma;
  remainder.kappa = growth + c2;
  return QuadraticValue(-growth, policy.w, spec.horizon, remainder);
}

double value_of_initial_gaussian(double t, double x, double a, double c1, double c2,
                                 const ProblemSpec& spec, double w) {
  require_time(t, spec.horizon, "value_of_initial_gaussian");
  return value_of_gaussian({a, w, c1, c2, spec.horizon}, spec)(t, x);
}

std::pair<GaussianPolicy, GaussianPolicy> improve_twice(double a, double c1, double c2,
                                                        const ProblemSpec& spec, double w) {
  const GaussianPolicy start{a, w, c1, c2, spec.horizon};
  const GaussianPolicy first = improve(value_of_gaussian(start, spec), spec);
  const GaussianPolicy second = improve(value_of_gaussian(first, spec), spec);
  return {first, second};
}

std::pair<GaussianPolicy, GaussianPolicy> improve_twice(double a, double c1, double c2,
                                                        const ProblemSpec& spec) {
  return improve_twice(a, c1, c2, spec, lagrange_w(spec));
}

double hjb_residual(const QuadraticValue& value, double t, double x,
                    const ProblemSpec& spec) {
  const double vxx = value.dxx(t);
  if (!(vxx > 0.0)) {
    throw std::domain_error("hjb_residual: v_xx must be > 0");
  }
  const double rho = spec.rho();
  const double sigma = spec.market.sigma;
  const double vx = value.dx(t, x);
  double residual = value.dt(t, x) - 0.5 * rho * rho * vx * vx / vxx;
  if (spec.lambda > 0.0) {
    const double lambda = spec.lambda;
    residual += 0.5 * lambda * (1.0 - std::log(2.0 * kPi * kE * lambda / (sigma * sigma * vxx)));
  }
  return residual;
}

double mean_wealth(double t, const ProblemSpec& spec, double w) {
  const double rho = spec.rho();
  return (spec.x0 - w) * std::exp(-rho * rho * t) + w;
}

}  // namespace emv::analytic
