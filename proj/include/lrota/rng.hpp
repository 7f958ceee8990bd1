#pragma once

#include <array>
#include <cstdint>

// Deterministic randomness. All stochastic code in the library draws from
// Rng (xoshiro256** seeded through splitmix64) so that a given seed produces
// the same stream on every platform. Independent substreams for
// (experiment, repeat, mode) triples are derived with derive_seed, never by
// sharing or advancing a common generator.

namespace lrota {

// Stateless mixer used for seeding and stream derivation.
std::uint64_t splitmix64(std::uint64_t& state);

// Hash a seed with a tag into a new, statistically independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 significant bits.
  double next_double();

  // Standard normal via the Marsaglia polar method (second value cached).
  double next_gaussian();

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Generator for an independent substream identified by tag.
  [[nodiscard]] Rng child(std::uint64_t tag) const;

 private:
  std::array<std::uint64_t, 4> s_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace lrota
