#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "propgen/similarity.hpp"
#include "propgen/tree.hpp"

namespace propgen {

using FrequencyMap = std::map<std::string, int64_t>;

// Outcome of prototypical class selection. `classes` is the chosen subset,
// sorted; clustering methods also record the partition (clusters ordered by
// their smallest member, members sorted).
struct ProtoSelection {
  std::string method;
  int p = 0;
  std::optional<uint64_t> seed;
  std::vector<std::string> classes;
  std::vector<std::vector<std::string>> clusters;
};

// Average-linkage clustering of 1 - S cut at P clusters; each cluster is
// represented by its most frequent member (name order breaks ties). Classes
// whose similarity row has no defined entry raise ValidationError.
ProtoSelection oracle_visual_clustering(const SimilarityMatrix& sim, const FrequencyMap& freqs,
                                        int p);

// Frequency-guided clustering constrained by the hierarchy. Every cluster is
// anchored at a tree node (initially its leaf). Two clusters may merge iff
// their anchors are equal, siblings, or in a direct parent-child relation;
// the merged anchor is the LCA. Repeatedly merge the mergeable pair with the
// smallest combined frequency (ties by name); when nothing is mergeable,
// promote every anchor one level and retry. Cut at P clusters; representatives
// are the most frequent members.
ProtoSelection semantic_frequency_clustering(const SemanticTree& tree, const FrequencyMap& freqs,
                                             int p);

// Top-P classes by frequency, name order on ties.
ProtoSelection most_frequent_subset(const FrequencyMap& freqs, int p);

// Uniform P-subset, deterministic per seed. P = N returns every class no
// matter the seed.
ProtoSelection random_subset(const std::vector<std::string>& classes, int p, uint64_t seed);

std::string selection_to_json(const ProtoSelection& sel);
ProtoSelection selection_from_json(const std::string& text);
void save_selection(const ProtoSelection& sel, const std::string& path);
ProtoSelection load_selection(const std::string& path);

}  // namespace propgen
