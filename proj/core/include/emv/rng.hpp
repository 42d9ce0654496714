#pragma once

#include <cstdint>
#include <random>

namespace emv {

/// SplitMix64 finalizer. Used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t v) noexcept;

/// Seed of substream `index` in family `stream` of an experiment seeded with
/// `seed`. Episodes draw from their own substream so a run can be replayed
/// episode by episode, in any order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream,
                             std::uint64_t index) noexcept;

/// Named substream families.
namespace streams {
inline constexpr std::uint64_t kEpisode = 1;
inline constexpr std::uint64_t kWarmup = 2;
inline constexpr std::uint64_t kScenario = 3;
}  // namespace streams

/**
 * Pseudo-random source for every simulation in the library.
 *
 * Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
 * produces uniforms from the top 53 bits and normals with the Marsaglia polar
 * method. std::normal_distribution is deliberately not used because its
 * algorithm differs between standard libraries.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;

  /// Standard normal draw.
  double normal() noexcept;

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace emv
