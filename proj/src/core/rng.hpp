#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace skipsim {

// xoshiro256** generator seeded through a splitmix64 expansion.
// Hand-rolled so that every stream is bit-reproducible regardless of
// standard-library implementation details.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double next_double();

  // Uniform in [0, bound); bound must be nonzero. Rejection sampling, unbiased.
  uint64_t next_below(uint64_t bound);

  // Geometric on {1, 2, ...} with the given mean (mean >= 1).
  uint32_t next_geometric(double mean);

 private:
  std::array<uint64_t, 4> s_;
};

// Independent, reproducible stream for a (master seed, topology index, label)
// triple. Streams with different labels or indices never overlap.
Rng derive_stream(uint64_t master_seed, uint32_t topology_index, std::string_view label);

// Discrete Zipf sampler over {lo..hi} with weight v^-exponent for value v.
class ZipfSampler {
 public:
  ZipfSampler(uint32_t lo, uint32_t hi, double exponent);

  uint32_t sample(Rng& rng) const;

  // Exact distribution mean; used as a statistical reference.
  double mean() const;

 private:
  uint32_t lo_;
  std::vector<double> cdf_;  // cumulative, normalized to end at 1.0
  double mean_;
};

}  // namespace skipsim
