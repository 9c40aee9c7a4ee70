#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace epsim {

using Rng = std::mt19937_64;

/// 64-bit master seed plus a 32-bit stream index. Every random quantity in
/// the library is generated from an engine built out of one SeedSpec, so a
/// realization can be regenerated bit-exactly from the pair.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint32_t stream = 0;

  /// Seed of an independent sub-stream, keyed by `tag`.
  [[nodiscard]] SeedSpec child(std::uint32_t tag) const;

  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Tags used to split one replication's seed into disjoint sub-streams.
namespace phase {
inline constexpr std::uint32_t kSample = 1;
inline constexpr std::uint32_t kRademacher = 2;
inline constexpr std::uint32_t kGaussian = 3;
inline constexpr std::uint32_t kExtension = 4;
inline constexpr std::uint32_t kBatchSource = 5;
inline constexpr std::uint32_t kBatchTarget = 6;
inline constexpr std::uint32_t kQuantile = 7;
inline constexpr std::uint32_t kBlock = 8;
inline constexpr std::uint32_t kFill = 9;
inline constexpr std::uint32_t kMeasure = 10;
}  // namespace phase

std::uint64_t splitmix64(std::uint64_t x);

/// Stable seed for replication `rep` of an experiment: a hash of
/// (master, rep, phase tag), independent of scheduling.
SeedSpec replication_seed(std::uint64_t master, std::uint64_t rep, std::uint32_t tag);

Rng make_rng(const SeedSpec& seed);

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

/// Fills `out` with i.i.d. N(0,1) draws from one distribution object.
inline void fill_normal(Rng& rng, std::span<double> out) {
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& v : out) v = dist(rng);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline int rademacher(Rng& rng) { return (rng() >> 63) != 0U ? 1 : -1; }

}  // namespace epsim
