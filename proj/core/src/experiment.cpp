#include "emv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "emv/emv_learner.hpp"
#include "emv/mle_baseline.hpp"
#include "emv/mv_analytic.hpp"

namespace emv::experiment {

namespace fs = std::filesystem;

void fill_statistics(csv::ResultRow& row, std::span<const double> terminal_wealths,
                     std::size_t window) {
  const std::vector<double> tail = stats::last_finite(terminal_wealths, window);
  const stats::TrailingStats s = stats::trailing_stats(tail);
  row.mean = s.mean;
  row.variance = s.variance;
  row.sharpe = s.sharpe;
}

std::optional<double> analytic_w(const config::Scenario& scenario) {
  if (scenario.factor_delta) return std::nullopt;
  analytic::ProblemSpec spec;
  spec.market = {scenario.mu, scenario.sigma, scenario.r};
  spec.horizon = scenario.horizon;
  spec.x0 = scenario.x0;
  spec.z = scenario.z;
  spec.lambda = scenario.lambda0;
  if (spec.rho() == 0.0) return std::nullopt;
  return analytic::lagrange_w(spec);
}

RunResult run_scenario(const config::Scenario& scenario, config::Method method) {
  RunResult result;
  csv::ResultRow& row = result.row;
  row.scenario_id = scenario.id;
  row.method = config::to_string(method);
  row.mu = scenario.mu;
  row.sigma = scenario.sigma;
  row.r = scenario.r;
  row.lambda = scenario.lambda0;
  row.episodes = scenario.episodes;
  row.seed = scenario.seed;
  try {
    scenario.validate();
    row.w_analytic = analytic_w(scenario);
    sim::Market market = scenario.make_market();
    if (method == config::Method::Emv) {
      const learn::TrainHistory history =
          learn::train(scenario.learner_config(), market, scenario.seed);
      result.terminal_wealths = history.terminal_wealths();
      row.failures = history.failures;
      const learn::LearnerState& s = history.final_state;
      row.w_learned = s.w;
      row.phi1 = s.phi.phi1;
      row.phi2 = s.phi.phi2;
      row.theta0 = s.theta.theta0;
      row.theta1 = s.theta.theta1;
      row.theta2 = s.theta.theta2;
      row.theta3 = s.theta.theta3;
    } else {
      const mle::MleRun run = mle::run_mle_experiment(market, scenario.grid(), scenario.episodes,
                                                      scenario.z, scenario.x0, scenario.seed);
      result.terminal_wealths = run.terminal_wealths();
      row.failures = run.failures;
    }
    fill_statistics(row, result.terminal_wealths, scenario.effective_stats_window());
  } catch (const std::exception& e) {
    result.error = e.what();
    row.mean.reset();
    row.variance.reset();
    row.sharpe.reset();
    if (result.terminal_wealths.empty()) row.failures = scenario.episodes;
  }
  return result;
}

std::vector<config::Scenario> table1_grid(const config::Scenario& base) {
  static constexpr int kMu[] = {-50, -30, -10, 0, 10, 30, 50};
  static constexpr int kSigma[] = {10, 20, 30, 40};
  std::vector<config::Scenario> out;
  std::uint64_t index = 0;
  for (int mu : kMu) {
    for (int sigma : kSigma) {
      config::Scenario s = base;
      s.mu = mu / 100.0;
      s.sigma = sigma / 100.0;
      s.seed = base.seed + index++;
      s.id = "mu" + std::to_string(mu) + "_sigma" + std::to_string(sigma);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string run_name(const std::string& scenario_id, config::Method method) {
  std::string name = scenario_id + "_" + config::to_string(method);
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ' ') c = '-';
  }
  return name;
}

std::vector<RunResult> run_all(std::span<const config::Scenario> scenarios,
                               std::span<const config::Method> methods, std::size_t threads) {
  struct Task {
    const config::Scenario* scenario;
    config::Method method;
  };
  std::vector<Task> tasks;
  for (const auto& s : scenarios) {
    for (config::Method m : methods) tasks.push_back({&s, m});
  }
  std::vector<RunResult> results(tasks.size());

  std::size_t workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(tasks.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      results[i] = run_scenario(*tasks[i].scenario, tasks[i].method);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::stable_sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    if (a.row.scenario_id != b.row.scenario_id) return a.row.scenario_id < b.row.scenario_id;
    return a.row.method < b.row.method;
  });
  return results;
}

int run_grid(std::span<const config::Scenario> scenarios, const config::RunOptions& options,
             std::ostream& log) {
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (!ids.insert(s.id).second) {
      log << "error: duplicate scenario id '" << s.id << "'\n";
      return 2;
    }
  }

  const fs::path out(options.out);
  std::error_code ec;
  fs::create_directories(out / "curves", ec);
  if (!ec) fs::create_directories(out / "episodes", ec);
  if (ec) {
    log << "error: cannot create output directory '" << out.string() << "': " << ec.message()
        << '\n';
    return 2;
  }
  std::ofstream results_file(out / "results.csv");
  if (!results_file) {
    log << "error: cannot write '" << (out / "results.csv").string() << "'\n";
    return 2;
  }

  const std::vector<RunResult> results = run_all(scenarios, options.methods, options.threads);

  std::vector<csv::ResultRow> rows;
  rows.reserve(results.size());
  int status = 0;
  for (const auto& r : results) {
    rows.push_back(r.row);
    if (r.error) {
      log << "error: " << r.row.scenario_id << " " << r.row.method << ": " << *r.error << '\n';
      status = 1;
    }
    const config::Method method = config::parse_method(r.row.method);
    const std::string name = run_name(r.row.scenario_id, method) + ".csv";
    std::ofstream episodes(out / "episodes" / name);
    std::ofstream curve(out / "curves" / name);
    if (!episodes || !curve) {
      log << "error: cannot write run files for '" << name << "'\n";
      return 2;
    }
    csv::write_episodes(episodes, r.terminal_wealths);
    csv::write_curve(curve, stats::learning_curve(r.terminal_wealths, options.bucket));
  }
  csv::write_results(results_file, rows);
  results_file.flush();
  if (!results_file) {
    log << "error: failed while writing results.csv\n";
    return 2;
  }
  return status;
}

}  // namespace emv::experiment
