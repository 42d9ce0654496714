#pragma once

/**
 * @file config.hpp
 * @brief Scenario description shared by the CLI, the grid runner and tests.
 *
 * Configuration files are flat `key = value` lines; `#` starts a comment.
 * Keys mirror the CLI flags without the leading dashes.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emv/emv_learner.hpp"
#include "emv/market_sim.hpp"
#include "emv/stats.hpp"

namespace emv::config {

enum class Method { Emv, Mle };

std::string to_string(Method method);
Method parse_method(const std::string& text);
learn::SignMode parse_sign(const std::string& text);
std::string to_string(learn::SignMode mode);

struct Scenario {
  std::string id = "scenario";
  double mu = -0.3;
  double sigma = 0.1;
  double r = 0.02;
  double horizon = 1.0;
  double dt = 1.0 / 252.0;
  double z = 1.4;
  double x0 = 1.0;
  double lambda0 = 2.0;
  bool anneal = false;
  std::size_t episodes = 2000;
  std::size_t avg_window = 10;
  double alpha = 0.05;
  double eta_theta = 0.0005;
  double eta_phi = 0.0005;
  std::uint64_t seed = 0;
  /// Set to switch on the stochastic-factor market started from
  /// rho0 = (mu - r) / sigma and sigma0 = sigma.
  std::optional<double> factor_delta;
  double factor_gamma = 0.0;
  learn::SignMode sign = learn::SignMode::Auto;
  /// Trailing-statistics window; 0 means min(2000, M / 2).
  std::size_t stats_window = 0;

  void validate() const;
  learn::LearnerConfig learner_config() const;
  sim::Market make_market() const;
  sim::TimeGrid grid() const { return {horizon, dt}; }
  std::size_t effective_stats_window() const;
};

/// Grid-level options that are not part of a scenario.
struct RunOptions {
  std::vector<Method> methods{Method::Emv, Method::Mle};
  std::string out = "results";
  std::size_t threads = 0;  ///< 0: hardware concurrency
  std::size_t bucket = learn::kCurveBucket;
};

/// Assigns one key. Returns false for an unknown key; throws
/// std::invalid_argument for a malformed value.
bool apply_setting(Scenario& scenario, RunOptions& options, const std::string& key,
                   const std::string& value);

struct Setting {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
/// Throws std::invalid_argument naming the line on syntax errors.
std::vector<Setting> parse_settings(std::istream& in);
std::vector<Setting> read_settings_file(const std::string& path);

/// Applies every setting, rejecting unknown keys with the line number.
void apply_settings(Scenario& scenario, RunOptions& options,
                    const std::vector<Setting>& settings);

}  // namespace emv::config
