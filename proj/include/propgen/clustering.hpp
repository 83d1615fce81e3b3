#pragma once

#include <vector>

namespace propgen {

// Average-linkage agglomerative clustering over a dense dissimilarity matrix
// (row-major, size n*n), cut when `num_clusters` remain. Merge choice is the
// pair with minimal linkage distance; ties prefer the pair with the smallest
// representative indices, where a cluster's representative is its smallest
// member. Naive O(n^3), fully deterministic.
//
// assignment[i] is the cluster of element i; clusters are numbered 0..P-1 in
// order of their smallest member.
struct ClusterResult {
  std::vector<int> assignment;
  int num_clusters = 0;
};

ClusterResult average_linkage_cluster(const std::vector<double>& dissimilarity, int n,
                                      int num_clusters);

// Adjusted Rand index between two labelings of the same elements; 1 for
// identical partitions, ~0 for independent ones.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace propgen
