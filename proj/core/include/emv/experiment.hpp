#pragma once

/**
 * @file experiment.hpp
 * @brief Runs scenarios with EMV or the MLE baseline and writes result files.
 */

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emv/config.hpp"
#include "emv/csv.hpp"

namespace emv::experiment {

struct RunResult {
  csv::ResultRow row;
  std::vector<double> terminal_wealths;  ///< NaN for failed episodes
  std::optional<std::string> error;      ///< set when the run threw
};

/// Runs one (scenario, method) pair. Exceptions from the run are caught and
/// reported through `error`, with the statistics columns left empty and
/// every episode counted as failed.
RunResult run_scenario(const config::Scenario& scenario, config::Method method);

/// Fills the statistics columns from a terminal-wealth log.
void fill_statistics(csv::ResultRow& row, std::span<const double> terminal_wealths,
                     std::size_t window);

/// Lagrange multiplier of the stationary market; empty for a zero Sharpe
/// ratio or a stochastic-factor scenario.
std::optional<double> analytic_w(const config::Scenario& scenario);

/// The 7 x 4 grid mu in {-50, -30, -10, 0, 10, 30, 50}%, sigma in
/// {10, 20, 30, 40}%. Other fields come from `base`; scenario i gets seed
/// base.seed + i and an id such as "mu-30_sigma10".
std::vector<config::Scenario> table1_grid(const config::Scenario& base);

/// "<id>_<method>" used for the per-run file names.
std::string run_name(const std::string& scenario_id, config::Method method);

/**
 * Runs every (scenario, method) pair on `options.threads` workers and writes
 *   <out>/results.csv, <out>/curves/<run>.csv, <out>/episodes/<run>.csv.
 * Rows are sorted by (scenario id, method). Returns 0 on success, 1 when some
 * run failed (still recorded in its row) and 2 when the output cannot be
 * written or the scenario list is invalid.
 */
int run_grid(std::span<const config::Scenario> scenarios, const config::RunOptions& options,
             std::ostream& log);

/// Same as run_grid but returns the rows instead of writing them.
std::vector<RunResult> run_all(std::span<const config::Scenario> scenarios,
                               std::span<const config::Method> methods, std::size_t threads);

}  // namespace emv::experiment
