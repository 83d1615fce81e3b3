#include "propgen/rng.hpp"

#include <algorithm>
#include <numeric>

namespace propgen {

std::vector<size_t> sample_indices(size_t n, size_t k, Rng& rng) {
  if (k > n) throw ConfigError("sample_indices: k exceeds n");
  std::vector<size_t> pool(n);
  std::iota(pool.begin(), pool.end(), size_t{0});
  // Partial Fisher-Yates: after i steps the first i slots hold the sample.
  for (size_t i = 0; i < k; ++i) {
    const size_t j = i + static_cast<size_t>(rng.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace propgen
