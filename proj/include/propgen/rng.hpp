#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "propgen/errors.hpp"

namespace propgen {

// FNV-1a 64-bit. Used for substream derivation and for config/input hashing,
// so hashes are identical across platforms and runs.
inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace detail {
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Deterministic, platform-independent generator (splitmix64 steps). No
// std::random distributions anywhere: bounded ints, uniforms and normals are
// generated explicitly so streams are bit-stable across standard libraries.
//
// Substreams are derived by hashing salts into the current state. Derive all
// substreams from a base generator before drawing from it; that keeps streams
// independent of evaluation order.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return detail::splitmix64(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased uniform in [0, n); rejection sampling.
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw ConfigError("next_below: n must be positive");
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Standard normal via Box-Muller. Both uniforms are always consumed and the
  // spare is discarded, so the draw count per call is fixed.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  Rng substream(uint64_t salt) const {
    uint64_t s = salt;
    const uint64_t mixed = detail::splitmix64(s);
    uint64_t base = state_ ^ mixed;
    return Rng(detail::splitmix64(base));
  }

  Rng substream(std::string_view name) const { return substream(fnv1a64(name)); }

 private:
  uint64_t state_;
};

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices drawn uniformly from [0, n), returned ascending so a
// subsample keeps the original relative order of the survivors.
std::vector<size_t> sample_indices(size_t n, size_t k, Rng& rng);

}  // namespace propgen
