#include "propgen/clustering.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

#include "propgen/errors.hpp"

namespace propgen {

ClusterResult average_linkage_cluster(const std::vector<double>& dissimilarity, int n,
                                      int num_clusters) {
  if (n <= 0) throw ConfigError("clustering: no elements");
  if (dissimilarity.size() != static_cast<size_t>(n) * static_cast<size_t>(n))
    throw ConfigError("clustering: matrix size does not match element count");
  if (num_clusters < 1 || num_clusters > n)
    throw ConfigError("clustering: cluster count outside [1, n]");

  // Active clusters keyed by their smallest member. dist holds the current
  // average-linkage distances between active representatives.
  std::vector<bool> active(n, true);
  std::vector<int> size(n, 1);
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) members[i] = {i};
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dist[i][j] = dissimilarity[static_cast<size_t>(i) * n + j];

  int remaining = n;
  while (remaining > num_clusters) {
    int best_i = -1, best_j = -1;
    double best_d = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double d = dist[i][j];
        // Ties prefer the smallest (i, j): iteration order handles it.
        if (best_i < 0 || d < best_d) {
          best_i = i;
          best_j = j;
          best_d = d;
        }
      }
    }
    // Lance-Williams update for average linkage, merged into best_i.
    for (int w = 0; w < n; ++w) {
      if (!active[w] || w == best_i || w == best_j) continue;
      const double d = (size[best_i] * dist[best_i][w] + size[best_j] * dist[best_j][w]) /
                       static_cast<double>(size[best_i] + size[best_j]);
      dist[best_i][w] = dist[w][best_i] = d;
    }
    size[best_i] += size[best_j];
    members[best_i].insert(members[best_i].end(), members[best_j].begin(), members[best_j].end());
    active[best_j] = false;
    --remaining;
  }

  ClusterResult result;
  result.num_clusters = num_clusters;
  result.assignment.assign(n, -1);
  int label = 0;
  for (int i = 0; i < n; ++i) {  // representatives ascend, so labels follow smallest member
    if (!active[i]) continue;
    for (int m : members[i]) result.assignment[m] = label;
    ++label;
  }
  return result;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ConfigError("adjusted_rand_index: size mismatch");
  const size_t n = a.size();
  if (n == 0) throw ConfigError("adjusted_rand_index: empty labelings");

  std::map<std::pair<int, int>, int64_t> joint;
  std::map<int, int64_t> count_a, count_b;
  for (size_t i = 0; i < n; ++i) {
    ++joint[{a[i], b[i]}];
    ++count_a[a[i]];
    ++count_b[b[i]];
  }
  auto choose2 = [](int64_t m) { return m * (m - 1) / 2; };

  double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, c] : joint) sum_joint += static_cast<double>(choose2(c));
  for (const auto& [key, c] : count_a) sum_a += static_cast<double>(choose2(c));
  for (const auto& [key, c] : count_b) sum_b += static_cast<double>(choose2(c));
  const double total = static_cast<double>(choose2(static_cast<int64_t>(n)));

  const double expected = sum_a * sum_b / total;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (sum_joint - expected) / (maximum - expected);
}

}  // namespace propgen
