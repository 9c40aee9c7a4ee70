#include "epsim/rng.hpp"

namespace epsim {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SeedSpec SeedSpec::child(std::uint32_t tag) const {
  const std::uint64_t mixed = splitmix64(master ^ splitmix64(0xA5A5A5A5ULL + stream));
  return SeedSpec{mixed, tag};
}

std::string SeedSpec::to_string() const {
  return std::to_string(master) + ":" + std::to_string(stream);
}

SeedSpec replication_seed(std::uint64_t master, std::uint64_t rep, std::uint32_t tag) {
  const std::uint64_t h = splitmix64(splitmix64(master) ^ splitmix64(rep * 0x632BE59BD9B4E019ULL + 1));
  return SeedSpec{h, tag};
}

Rng make_rng(const SeedSpec& seed) {
  // Single-word seeding: a seed_seq fill costs more than most replications.
  return Rng(splitmix64(seed.master ^ splitmix64(0x5851F42D4C957F2DULL + seed.stream)));
}

}  // namespace epsim
