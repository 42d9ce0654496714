#pragma once

/**
 * @file csv.hpp
 * @brief Result, learning-curve and episode-log CSV files.
 *
 * Doubles are written with 17 significant digits so files re-parse to the
 * same bits. Absent values are empty fields.
 */

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emv/stats.hpp"

namespace emv::csv {

inline constexpr const char* kResultsHeader =
    "scenario_id,method,mu,sigma,r,lambda,episodes,seed,mean,variance,sharpe,w_learned,"
    "w_analytic,phi1,phi2,theta0,theta1,theta2,theta3,failures";
inline constexpr const char* kCurveHeader = "bucket,episode_start,mean,variance";
inline constexpr const char* kEpisodeHeader = "episode,terminal_wealth,failed";

struct ResultRow {
  std::string scenario_id;
  std::string method;
  double mu = 0.0;
  double sigma = 0.0;
  double r = 0.0;
  double lambda = 0.0;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> sharpe;
  std::optional<double> w_learned;
  std::optional<double> w_analytic;
  std::optional<double> phi1;
  std::optional<double> phi2;
  std::optional<double> theta0;
  std::optional<double> theta1;
  std::optional<double> theta2;
  std::optional<double> theta3;
  std::size_t failures = 0;

  bool operator==(const ResultRow&) const = default;
};

std::string format_double(double value);
std::string format_row(const ResultRow& row);
ResultRow parse_row(const std::string& line);

void write_results(std::ostream& out, std::span<const ResultRow> rows);
/// Throws std::runtime_error on a wrong header or a malformed row.
std::vector<ResultRow> read_results(std::istream& in);

void write_curve(std::ostream& out, std::span<const stats::CurvePoint> curve);
std::vector<stats::CurvePoint> read_curve(std::istream& in);

/// One line per episode; failed episodes carry an empty wealth field.
void write_episodes(std::ostream& out, std::span<const double> terminal_wealths);
/// Returns terminal wealths with NaN for failed episodes.
std::vector<double> read_episodes(std::istream& in);

/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_record(const std::string& line);

}  // namespace emv::csv
