#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "emv/emv_learner.hpp"
#include "emv/market_sim.hpp"
#include "emv/mle_baseline.hpp"
#include "emv/mv_analytic.hpp"
#include "emv/rng.hpp"

using namespace emv;

static void BM_WealthStep(benchmark::State& state) {
  Rng rng(1);
  double x = 1.0;
  for (auto _ : state) {
    x = sim::wealth_step(x, 2.0 * (1.4 - x), 0.5, 0.1, 1.0 / 252, rng.normal());
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_WealthStep);

static void BM_RunEpisode(benchmark::State& state) {
  const sim::TimeGrid grid(1.0, 1.0 / 252);
  sim::Market market = sim::Market::stationary({-0.3, 0.1, 0.02});
  auto sampler = [](const sim::StepContext& c, Rng& rng) {
    return 32.0 * (c.x - 1.4) + rng.normal();
  };
  std::uint64_t k = 0;
  for (auto _ : state) {
    auto path = sim::run_episode(grid, market, sampler, 1.0, k++);
    benchmark::DoNotOptimize(path.x.back());
  }
}
BENCHMARK(BM_RunEpisode);

static void BM_Gradients(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> t(n), x(n);
  Rng rng(2);
  double xi = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i) / 252.0;
    x[i] = xi;
    xi += 0.01 * rng.normal();
  }
  const learn::EpisodeSamples samples{t, x, 1.0 / 252};
  const learn::ValueParams theta{0.0, 0.1, -0.2, 1.0};
  const learn::PolicyParams phi{1.2, 0.5, -1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(learn::gradients(theta, phi, 2.0, 1.4, 1.0, samples));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Gradients)->Arg(32)->Arg(253);

static void BM_TrainEpisodes(benchmark::State& state) {
  learn::LearnerConfig config;
  config.episodes = static_cast<std::size_t>(state.range(0));
  config.sign = learn::SignMode::Negative;
  for (auto _ : state) {
    sim::Market market = sim::Market::stationary({-0.3, 0.1, 0.02});
    auto history = learn::train(config, market, 7);
    benchmark::DoNotOptimize(history.final_state.w);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpisodes)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_MleEstimate(benchmark::State& state) {
  std::vector<double> prices{1.0};
  Rng rng(3);
  for (int i = 0; i < 99; ++i) {
    prices.push_back(sim::price_step(prices.back(), 0.1, 0.2, 1.0 / 252, rng.normal()));
  }
  for (auto _ : state) benchmark::DoNotOptimize(mle::mle_estimate(prices, 1.0 / 252));
}
BENCHMARK(BM_MleEstimate);

static void BM_ImproveTwice(benchmark::State& state) {
  analytic::ProblemSpec spec;
  spec.market = {-0.3, 0.1, 0.02};
  for (auto _ : state) benchmark::DoNotOptimize(analytic::improve_twice(0.3, 1.0, 0.2, spec));
}
BENCHMARK(BM_ImproveTwice);

// benchmark_main from the system package is built with a different LTO
// version, so the entry point lives here.
int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
