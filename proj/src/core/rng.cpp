#include "core/rng.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/hash.hpp"

namespace skipsim {

namespace {

uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& w : s_) w = splitmix64(sm);
  // xoshiro must not start from the all-zero state.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::next_below(uint64_t bound) {
  if (bound == 0) throw StructuralError("next_below: bound must be nonzero");
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

uint32_t Rng::next_geometric(double mean) {
  if (mean < 1.0) throw StructuralError("next_geometric: mean must be >= 1");
  if (mean == 1.0) return 1;
  const double p = 1.0 / mean;
  const double u = next_double();  // in [0, 1)
  // Inverse CDF of the geometric distribution on {1, 2, ...}.
  const double x = std::floor(std::log1p(-u) / std::log1p(-p)) + 1.0;
  if (x < 1.0) return 1;
  if (x > 4294967295.0) return 4294967295u;
  return static_cast<uint32_t>(x);
}

Rng derive_stream(uint64_t master_seed, uint32_t topology_index, std::string_view label) {
  uint64_t key = mix64(master_seed);
  key = mix64(key ^ (0x9e3779b97f4a7c15ull * (static_cast<uint64_t>(topology_index) + 1)));
  key ^= fnv1a64(label);
  return Rng(key);
}

ZipfSampler::ZipfSampler(uint32_t lo, uint32_t hi, double exponent) : lo_(lo) {
  if (lo == 0 || hi < lo) throw StructuralError("ZipfSampler: bad support range");
  const size_t n = hi - lo + 1;
  cdf_.resize(n);
  double total = 0.0;
  double weighted = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(lo + i);
    const double w = std::pow(v, -exponent);
    total += w;
    weighted += v * w;
    cdf_[i] = total;
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
  mean_ = weighted / total;
}

uint32_t ZipfSampler::sample(Rng& rng) const {
  const double u = rng.next_double();
  size_t left = 0;
  size_t right = cdf_.size() - 1;
  while (left < right) {
    const size_t middle = left + (right - left) / 2;
    if (cdf_[middle] <= u) {
      left = middle + 1;
    } else {
      right = middle;
    }
  }
  return lo_ + static_cast<uint32_t>(left);
}

double ZipfSampler::mean() const { return mean_; }

}  // namespace skipsim
