#pragma once

#include <cstdint>
#include <random>

namespace racelab {

// Deterministic random stream. std::mt19937_64 has a fixed algorithm, but the
// standard distributions do not, so all conversions to doubles are done here
// explicitly. Every result is a pure function of the seed.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], both inclusive.
  int uniform_int(int lo, int hi);

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev);

  // Derive an independent stream from this generator's seed and a stream tag.
  // Splitting depends only on (seed, stream), not on how many values have
  // been drawn, so subsystem streams stay stable.
  Rng split(uint64_t stream) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 finalizer, used for seed derivation.
uint64_t mix_seed(uint64_t x);

}  // namespace racelab
