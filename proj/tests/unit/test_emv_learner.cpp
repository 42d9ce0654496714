#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "emv/emv_learner.hpp"
#include "emv/mv_analytic.hpp"
#include "oracles.hpp"

using namespace emv;
using namespace emv::learn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

struct Sample {
  std::vector<double> t;
  std::vector<double> x;
  double dt;
  EpisodeSamples view() const { return {t, x, dt}; }
};

Sample random_sample(oracle::Draws& d, std::size_t points, double horizon, double w) {
  Sample s{{}, {}, horizon / 252.0};
  double x = w + d.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < points; ++i) {
    s.t.push_back(static_cast<double>(i) * s.dt);
    s.x.push_back(x);
    x += 0.2 * d.normal() * std::sqrt(s.dt);
  }
  return s;
}

// Loss as a function of the four free parameters with theta3 tied to 2 phi2.
double coupled_loss(double th1, double th2, double ph1, double ph2, const ValueParams& base,
                    const PolicyParams& phi, double lambda, double w, double T,
                    const EpisodeSamples& s) {
  ValueParams th = base;
  th.theta1 = th1;
  th.theta2 = th2;
  th.theta3 = 2.0 * ph2;
  PolicyParams p = phi;
  p.phi1 = ph1;
  p.phi2 = ph2;
  return loss(th, p, lambda, w, T, s);
}

LearnerConfig small_config(std::size_t episodes) {
  LearnerConfig c;
  c.episodes = episodes;
  c.sign = SignMode::Negative;
  return c;
}

}  // namespace

TEST(VTheta, Examples) {
  const ValueParams zero{};
  EXPECT_EQ(v_theta(0.4, 2.5, zero, 1.5, 1.0), 1.0);

  ValueParams th{0.0, 0.3, -0.2, 0.9};
  const double w = 1.6, z = 1.4, T = 1.0;
  th.theta0 = terminal_theta0(th, w, z, T);
  for (double x : {-1.0, 0.7, 2.2}) {
    EXPECT_NEAR(v_theta(T, x, th, w, T), (x - w) * (x - w) - (w - z) * (w - z), 1e-14);
  }
}

TEST(VTheta, CoefficientMatchWithExploratoryValue) {
  analytic::ProblemSpec spec;
  spec.market = {0.07, 0.1, 0.02};
  const double w = analytic::lagrange_w(spec);
  const double rho2 = 0.25, lambda = 2.0, T = 1.0, sigma = 0.1;
  const double c1 = 0.5 * lambda * std::log(sigma * sigma / (kPi * lambda));
  const double c2 = -0.25 * lambda * rho2;
  ValueParams th;
  th.theta3 = rho2;
  th.theta2 = c2;
  th.theta1 = -c1 - 2.0 * c2 * T;
  th.theta0 = terminal_theta0(th, w, spec.z, T);
  oracle::Draws d(3);
  for (int i = 0; i < 20; ++i) {
    const double t = d.uniform(0, 1), x = d.uniform(-1, 4);
    EXPECT_NEAR(v_theta(t, x, th, w, T), analytic::exploratory_value(t, x, spec, w), 1e-12);
  }
}

TEST(Vdot, Examples) {
  const ValueParams th{0.1, 0.7, -0.4, 1.3};
  const double dt = 0.01;
  EXPECT_NEAR(vdot(th, 1.2, 1.0, 0.3, 1.2, 0.31, 1.2, dt),
              (-0.4 * (0.31 * 0.31 - 0.09) + 0.7 * dt) / dt, 1e-10);
  const ValueParams zero{};
  EXPECT_NEAR(vdot(zero, 1.0, 1.0, 0.0, 1.5, dt, 0.8, dt),
              ((0.8 - 1.0) * (0.8 - 1.0) - 0.25) / dt, 1e-12);
  // theta = (0, 1, 0, 0), w = 0, pair (0.5, 1) -> (0.51, 1.1): (0.21 + 0.01) / 0.01 = 22.
  EXPECT_NEAR(vdot({0.0, 1.0, 0.0, 0.0}, 0.0, 1.0, 0.5, 1.0, 0.51, 1.1, 0.01), 22.0, 1e-10);
}

TEST(PolicyFromPhi, Examples) {
  const PolicyParams phi{0.4, 0.7, +1};
  EXPECT_EQ(policy_from_phi(0.2, 1.3, phi, 2.0, 1.3, 1.0).mean, 0.0);
  EXPECT_THROW(policy_from_phi(0.2, 1.0, {0.4, 0.0, 1}, 2.0, 1.3, 1.0), std::invalid_argument);
  EXPECT_THROW(policy_from_phi(0.2, 1.0, phi, 0.0, 1.3, 1.0), std::invalid_argument);
  const auto neg = policy_from_phi(0.2, 1.0, {0.4, 0.7, -1}, 2.0, 1.3, 1.0);
  EXPECT_EQ(neg.mean, -policy_from_phi(0.2, 1.0, phi, 2.0, 1.3, 1.0).mean);
}

TEST(PolicyFromPhi, RecoversOptimalPolicyAtOptimalPhi) {
  // phi1 = ln(pi e lambda / sigma^2) / 2, phi2 = rho^2 / 2 give the optimal
  // Gaussian for rho > 0.
  analytic::ProblemSpec spec;
  spec.market = {0.07, 0.1, 0.02};
  const double w = analytic::lagrange_w(spec);
  const PolicyParams phi{0.5 * std::log(kPi * kE * 2.0 / 0.01), 0.125, +1};
  for (double t : {0.0, 0.5, 1.0}) {
    const auto got = policy_from_phi(t, 0.9, phi, 2.0, w, 1.0);
    const auto want = analytic::optimal_policy(t, 0.9, spec, w);
    EXPECT_NEAR(got.mean, want.mean, 1e-12 * std::abs(want.mean));
    EXPECT_NEAR(got.variance, want.variance, 1e-12 * want.variance);
  }
}

TEST(PolicyFromPhi, EntropyConsistency) {
  oracle::Draws d(4);
  for (int i = 0; i < 500; ++i) {
    const PolicyParams phi{d.uniform(-3, 3), d.uniform(1e-3, 4), d.sign()};
    const double T = d.uniform(0.5, 2), t = d.uniform(0, T), lambda = d.uniform(0.01, 5);
    const auto a = policy_from_phi(t, d.uniform(-2, 2), phi, lambda, 1.0, T);
    EXPECT_NEAR(0.5 * std::log(2 * kPi * kE * a.variance), phi.phi1 + phi.phi2 * (T - t), 1e-12);
  }
}

TEST(BellmanError, ZeroLambdaConstantWealthAtW) {
  const ValueParams th{0.3, 0.8, -1.1, 0.7};
  const double dt = 0.02, t = 0.4;
  const double expected = (-1.1 * ((t + dt) * (t + dt) - t * t) + 0.8 * dt) / dt;
  EXPECT_NEAR(bellman_error(th, {5.0, 3.0, 1}, 0.0, 1.2, 1.0, t, 1.2, t + dt, 1.2, dt), expected,
              1e-10);
}

TEST(BellmanError, ZeroMeanUnderOptimalPolicyAtOptimum) {
  // At the analytic optimum the Bellman error is a martingale increment up to
  // O(dt); its sample mean over simulated transitions sits near zero.
  analytic::ProblemSpec spec;
  spec.market = {0.07, 0.1, 0.02};
  const double w = analytic::lagrange_w(spec);
  const double rho = 0.5, sigma = 0.1, lambda = 2.0, T = 1.0;
  const double c1 = 0.5 * lambda * std::log(sigma * sigma / (kPi * lambda));
  const double c2 = -0.25 * lambda * rho * rho;
  ValueParams th{0.0, -c1 - 2 * c2 * T, c2, rho * rho};
  th.theta0 = terminal_theta0(th, w, spec.z, T);
  const PolicyParams phi{0.5 * std::log(kPi * kE * lambda / (sigma * sigma)), 0.5 * rho * rho, 1};

  sim::Market market = sim::Market::stationary(spec.market);
  const sim::TimeGrid grid(T, 1.0 / 252);
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (int k = 0; k < 400; ++k) {
    auto sampler = [&](const sim::StepContext& c, Rng& rng) {
      const auto a = analytic::optimal_policy(c.t, c.x, spec, w);
      return a.mean + std::sqrt(a.variance) * rng.normal();
    };
    const auto path = sim::run_episode(grid, market, sampler, 1.0, 1000 + k);
    for (std::size_t i = 0; i + 1 < path.x.size(); ++i) {
      const double delta = bellman_error(th, phi, lambda, w, T, path.t[i], path.x[i],
                                         path.t[i + 1], path.x[i + 1], grid.dt());
      sum += delta;
      sum2 += delta * delta;
      ++n;
    }
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  EXPECT_LT(std::abs(mean), 4.0 * se + 0.05);
}

TEST(Loss, Examples) {
  const double dt = 1.0 / 252;
  const std::vector<double> t{0.0, dt};
  const std::vector<double> x{0.0, std::sqrt(2.0 * dt)};
  EXPECT_NEAR(loss({}, {0.0, 1.0, 1}, 0.0, 0.0, 1.0, {t, x, dt}), 0.5 * 4.0 / 252, 1e-15);
  EXPECT_NEAR(0.5 * 4.0 / 252, 0.0079365, 1e-7);

  const std::vector<double> flat{1.0, 1.0};
  EXPECT_EQ(loss({}, {0.0, 1.0, 1}, 0.0, 1.0, 1.0, {t, flat, dt}), 0.0);
}

TEST(Gradients, ZeroWhenBellmanErrorsVanish) {
  const double dt = 0.01;
  const std::vector<double> t{0.0, dt, 2 * dt, 3 * dt};
  const std::vector<double> x(4, 1.4);
  const Gradients g = gradients({}, {0.0, 0.5, 1}, 0.0, 1.4, 1.0, {t, x, dt});
  EXPECT_EQ(g.theta1, 0.0);
  EXPECT_EQ(g.theta2, 0.0);
  EXPECT_EQ(g.phi1, 0.0);
  EXPECT_EQ(g.phi2, 0.0);
}

TEST(Gradients, StructuralIdentityPhi1) {
  oracle::Draws d(7);
  for (int i = 0; i < 50; ++i) {
    const Sample s = random_sample(d, 2 + static_cast<std::size_t>(d.uniform(0, 250)), 1.0, 1.4);
    const double lambda = d.uniform(0.1, 3);
    const PolicyParams phi{d.uniform(-1, 2), d.uniform(0.01, 2), 1};
    const ValueParams th{d.normal(), d.normal(), d.normal(), 2 * phi.phi2};
    const Gradients g = gradients(th, phi, lambda, 1.4, 1.0, s.view());
    EXPECT_DOUBLE_EQ(g.phi1, -lambda * g.theta1);
  }
}

TEST(Gradients, MatchCentralFiniteDifferences) {
  oracle::Draws d(8);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double w = d.uniform(1.0, 3.0);
    const Sample s = random_sample(d, 2 + static_cast<std::size_t>(d.uniform(0, 250)), 1.0, w);
    const double lambda = d.uniform(0.1, 3);
    const PolicyParams phi{d.uniform(-1, 2), d.uniform(0.05, 2), 1};
    ValueParams th{0.0, d.uniform(-2, 2), d.uniform(-2, 2), 2 * phi.phi2};
    th.theta0 = terminal_theta0(th, w, 1.4, 1.0);
    const EpisodeSamples view = s.view();
    const Gradients g = gradients(th, phi, lambda, w, 1.0, view);
    auto L = [&](double a, double b, double c, double e) {
      return coupled_loss(a, b, c, e, th, phi, lambda, w, 1.0, view);
    };
    const double fd[4] = {
        (L(th.theta1 + h, th.theta2, phi.phi1, phi.phi2) -
         L(th.theta1 - h, th.theta2, phi.phi1, phi.phi2)) / (2 * h),
        (L(th.theta1, th.theta2 + h, phi.phi1, phi.phi2) -
         L(th.theta1, th.theta2 - h, phi.phi1, phi.phi2)) / (2 * h),
        (L(th.theta1, th.theta2, phi.phi1 + h, phi.phi2) -
         L(th.theta1, th.theta2, phi.phi1 - h, phi.phi2)) / (2 * h),
        (L(th.theta1, th.theta2, phi.phi1, phi.phi2 + h) -
         L(th.theta1, th.theta2, phi.phi1, phi.phi2 - h)) / (2 * h),
    };
    const double an[4] = {g.theta1, g.theta2, g.phi1, g.phi2};
    for (int c = 0; c < 4; ++c) {
      const double scale = std::max({std::abs(an[c]), std::abs(fd[c]), 1e-3});
      EXPECT_LT(std::abs(an[c] - fd[c]) / scale, 1e-5) << "case " << i << " component " << c;
    }
  }
}

TEST(ApplyUpdates, ZeroGradients) {
  const ValueParams th{9.0, 0.3, -0.2, 4.0};
  const PolicyParams phi{0.6, 0.8, -1};
  const auto [nt, np] = apply_updates(th, phi, {}, 0.1, 0.1, 1.7, 1.4, 1.0);
  EXPECT_EQ(nt.theta1, th.theta1);
  EXPECT_EQ(nt.theta2, th.theta2);
  EXPECT_EQ(np.phi1, phi.phi1);
  EXPECT_EQ(np.phi2, phi.phi2);
  EXPECT_EQ(np.sign_hint, -1);
  EXPECT_EQ(nt.theta3, 1.6);
  EXPECT_EQ(nt.theta0, terminal_theta0(nt, 1.7, 1.4, 1.0));
}

TEST(ApplyUpdates, PreservesTerminalConditionAndCoupling) {
  oracle::Draws d(9);
  for (int i = 0; i < 100; ++i) {
    const double w = d.uniform(0.5, 3), z = 1.4;
    const ValueParams th{d.normal(), d.normal(), d.normal(), d.uniform(0, 2)};
    const PolicyParams phi{d.normal(), d.uniform(0.01, 2), 1};
    const Gradients g{d.normal(), d.normal(), d.normal(), 100 * d.normal()};
    const auto [nt, np] = apply_updates(th, phi, g, 0.01, 0.01, w, z, 1.0);
    EXPECT_GT(np.phi2, 0.0);
    EXPECT_EQ(nt.theta3, 2 * np.phi2);
    const double x = d.uniform(-2, 4);
    EXPECT_NEAR(v_theta(1.0, x, nt, w, 1.0), (x - w) * (x - w) - (w - z) * (w - z), 1e-12);
  }
}

TEST(ApplyUpdates, ClampsPhi2) {
  const auto [nt, np] = apply_updates({}, {0.0, 0.1, 1}, {0, 0, 0, 1e6}, 0.1, 0.1, 1.0, 1.0, 1.0);
  EXPECT_EQ(np.phi2, kMinPhi2);
  EXPECT_EQ(nt.theta3, 2 * kMinPhi2);
}

TEST(ApplyUpdates, SmallStepDecreasesLoss) {
  oracle::Draws d(10);
  for (int i = 0; i < 10; ++i) {
    const double w = 1.4;
    const Sample s = random_sample(d, 100, 1.0, w);
    const double lambda = 2.0;
    PolicyParams phi{d.uniform(-1, 2), d.uniform(0.1, 1), 1};
    ValueParams th{0.0, d.uniform(-2, 2), d.uniform(-2, 2), 2 * phi.phi2};
    th.theta0 = terminal_theta0(th, w, 1.4, 1.0);
    const double before = loss(th, phi, lambda, w, 1.0, s.view());
    const Gradients g = gradients(th, phi, lambda, w, 1.0, s.view());
    const auto [nt, np] = apply_updates(th, phi, g, 1e-4, 1e-4, w, 1.4, 1.0);
    EXPECT_LT(loss(nt, np, lambda, w, 1.0, s.view()), before);
  }
}

TEST(UpdateW, Examples) {
  const std::vector<double> at_target(10, 1.4);
  EXPECT_EQ(update_w(2.3, at_target, 0.05, 1.4), 2.3);
  const std::vector<double> above{1.5};
  EXPECT_NEAR(update_w(1.4, above, 0.05, 1.4), 1.395, 1e-15);
  EXPECT_THROW(update_w(1.4, {}, 0.05, 1.4), std::invalid_argument);
}

TEST(UpdateW, FixedPointOverManyWindows) {
  double w = 1.9;
  const std::vector<double> window{1.3, 1.5, 1.4};
  for (int i = 0; i < 100; ++i) w = update_w(w, window, 0.05, 1.4);
  EXPECT_NEAR(w, 1.9, 1e-12);
}

TEST(LambdaSchedule, Examples) {
  EXPECT_EQ(lambda_schedule(20000, 20000, 2.0), 0.0);
  EXPECT_NEAR(lambda_schedule(0, 20000, 2.0), 2.0, 1e-15);
  EXPECT_NEAR(lambda_schedule(10000, 20000, 2.0), 2.0, 1e-15);
  EXPECT_THROW(lambda_schedule(11, 10, 2.0), std::invalid_argument);
}

TEST(LambdaSchedule, Nonincreasing) {
  for (std::size_t m : {10u, 2000u, 20000u}) {
    double prev = INFINITY;
    for (std::size_t k = 0; k <= m; ++k) {
      const double l = lambda_schedule(k, m, 2.0);
      ASSERT_LE(l, prev);
      ASSERT_GE(l, 0.0);
      prev = l;
    }
    EXPECT_EQ(prev, 0.0);
  }
}

TEST(InitialState, Definition) {
  LearnerConfig c;
  c.lambda0 = 2.0;
  const LearnerState s = initial_state(c);
  EXPECT_NEAR(s.phi.phi1, 0.5 * std::log(kPi * kE * 2.0), 1e-15);
  EXPECT_EQ(s.phi.phi2, 0.5);
  EXPECT_EQ(s.theta.theta3, 1.0);
  EXPECT_EQ(s.theta.theta1, 0.0);
  EXPECT_EQ(s.theta.theta2, 0.0);
  EXPECT_EQ(s.w, c.z);
  EXPECT_EQ(s.phi.sign_hint, 1);
}

TEST(LearnerConfig, Validation) {
  LearnerConfig c;
  c.avg_window = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = LearnerConfig{};
  c.episodes = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = LearnerConfig{};
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = LearnerConfig{};
  c.dt = 0.3;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Train, ZeroEpisodes) {
  sim::Market m = sim::Market::stationary({-0.3, 0.1, 0.02});
  LearnerConfig c = small_config(0);
  const TrainHistory h = train(c, m, 1);
  EXPECT_TRUE(h.episodes.empty());
  EXPECT_EQ(h.final_state.w, c.z);
  EXPECT_EQ(h.final_state.phi.phi2, 0.5);
}

TEST(Train, Reproducible) {
  LearnerConfig c = small_config(60);
  sim::Market a = sim::Market::stationary({-0.3, 0.1, 0.02});
  sim::Market b = sim::Market::stationary({-0.3, 0.1, 0.02});
  const TrainHistory ha = train(c, a, 17);
  const TrainHistory hb = train(c, b, 17);
  ASSERT_EQ(ha.episodes.size(), 60u);
  for (std::size_t k = 0; k < 60; ++k) {
    EXPECT_EQ(ha.episodes[k].terminal_wealth, hb.episodes[k].terminal_wealth);
    EXPECT_EQ(ha.episodes[k].phi.phi2, hb.episodes[k].phi.phi2);
    EXPECT_EQ(ha.episodes[k].w, hb.episodes[k].w);
  }
  sim::Market c2 = sim::Market::stationary({-0.3, 0.1, 0.02});
  EXPECT_NE(train(c, c2, 18).episodes.back().terminal_wealth, ha.episodes.back().terminal_wealth);
}

TEST(Train, InvariantsHoldAfterEveryEpisode) {
  LearnerConfig c = small_config(100);
  sim::Market m = sim::Market::stationary({-0.3, 0.1, 0.02});
  const TrainHistory h = train(c, m, 3);
  for (const auto& e : h.episodes) {
    EXPECT_EQ(e.theta.theta3, 2 * e.phi.phi2);
    EXPECT_GT(e.phi.phi2, 0.0);
    EXPECT_NEAR(v_theta(1.0, 0.8, e.theta, e.w, 1.0),
                (0.8 - e.w) * (0.8 - e.w) - (e.w - c.z) * (e.w - c.z), 1e-9);
    EXPECT_EQ(e.lambda, c.lambda0);
  }
}

TEST(Train, WMovesOnlyAtWindowBoundaries) {
  LearnerConfig c = small_config(40);
  sim::Market m = sim::Market::stationary({-0.3, 0.1, 0.02});
  const TrainHistory h = train(c, m, 5);
  ASSERT_EQ(h.failures, 0u);
  double w = c.z;
  for (std::size_t k = 0; k < h.episodes.size(); ++k) {
    if ((k + 1) % c.avg_window != 0) {
      EXPECT_EQ(h.episodes[k].w, w);
    } else {
      std::vector<double> window;
      for (std::size_t j = k + 1 - c.avg_window; j <= k; ++j) {
        window.push_back(h.episodes[j].terminal_wealth);
      }
      w = update_w(w, window, c.alpha, c.z);
      EXPECT_DOUBLE_EQ(h.episodes[k].w, w);
    }
  }
}

TEST(Train, AnnealingUsesSchedule) {
  LearnerConfig c = small_config(30);
  c.anneal = true;
  sim::Market m = sim::Market::stationary({-0.3, 0.1, 0.02});
  const TrainHistory h = train(c, m, 2);
  for (std::size_t k = 0; k < h.episodes.size(); ++k) {
    EXPECT_EQ(h.episodes[k].lambda, lambda_schedule(k, 30, c.lambda0));
    EXPECT_GT(h.episodes[k].lambda, 0.0);
  }
}

TEST(Train, AutoSignFollowsSharpeSign) {
  for (double mu : {-0.3, 0.3}) {
    LearnerConfig c = small_config(60);
    c.sign = SignMode::Auto;
    sim::Market m = sim::Market::stationary({mu, 0.1, 0.02});
    const TrainHistory h = train(c, m, 11);
    EXPECT_EQ(h.final_state.phi.sign_hint, mu < 0 ? -1 : 1) << "mu " << mu;
    EXPECT_EQ(h.episodes[c.sign_warmup - 2].phi.sign_hint, 1);
  }
}

TEST(Train, BucketsUseFiftyEpisodes) {
  LearnerConfig c = small_config(120);
  sim::Market m = sim::Market::stationary({-0.3, 0.1, 0.02});
  const TrainHistory h = train(c, m, 1);
  const auto b = h.buckets();
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].episode_start, 50u);
}
