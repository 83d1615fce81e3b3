#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/tree.hpp"

namespace propgen {

struct DatasetSplit {
  std::vector<std::string> source_classes;  // sorted
  std::vector<std::string> target_classes;  // sorted
  std::vector<int64_t> source_images;       // ascending
  std::vector<int64_t> target_images;       // ascending
  uint64_t seed = 0;
};

// Partition leaf classes into source = leaves minus target. Target images are
// the images holding at least one target-class box; every one of them is
// excluded from the source image set, so no source image carries a target
// box. Deterministic; the seed is carried for provenance.
DatasetSplit build_source_target_split(const Dataset& data, const SemanticTree& tree,
                                       const std::vector<std::string>& target_classes,
                                       uint64_t seed);

// Uniform choice of `count` target leaves, deterministic per seed.
std::vector<std::string> sample_target_classes(const SemanticTree& tree, int count,
                                               uint64_t seed);

struct LeafFilterResult {
  Dataset dataset;
  std::vector<int64_t> dropped_images;  // ascending
};

// Drop every image that carries an annotation mapping to a non-leaf tree node
// (the whole image goes, not just the box). The alternative, reassigning such
// boxes to a leaf, would invent labels; dropping keeps the data honest.
LeafFilterResult drop_non_leaf_annotated_images(const Dataset& data, const SemanticTree& tree);

std::string split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const std::string& text);
void save_split(const DatasetSplit& split, const std::string& path);
DatasetSplit load_split(const std::string& path);

}  // namespace propgen
