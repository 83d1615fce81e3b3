#include "propgen/split.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

using Json = nlohmann::json;

DatasetSplit build_source_target_split(const Dataset& data, const SemanticTree& tree,
                                       const std::vector<std::string>& target_classes,
                                       uint64_t seed) {
  if (target_classes.empty()) throw ConfigError("split: target class list is empty");

  const std::vector<std::string> leaves = tree.leaf_names();
  const std::set<std::string> leaf_set(leaves.begin(), leaves.end());
  std::set<std::string> target_set;
  for (const std::string& name : target_classes) {
    if (!leaf_set.count(name))
      throw ValidationError("split: target class '" + name + "' is not a leaf of the hierarchy");
    target_set.insert(name);
  }
  if (target_set.size() == leaf_set.size())
    throw ConfigError("split: every leaf is a target, source side would be empty");

  DatasetSplit split;
  split.seed = seed;
  split.target_classes.assign(target_set.begin(), target_set.end());
  for (const std::string& name : leaves)
    if (!target_set.count(name)) split.source_classes.push_back(name);

  std::set<int64_t> target_images;
  for (const Annotation& a : data.annotations())
    if (target_set.count(data.classes()[a.class_idx].name)) target_images.insert(a.image_id);

  for (const ImageRecord& im : data.images()) {
    if (target_images.count(im.id))
      split.target_images.push_back(im.id);
    else
      split.source_images.push_back(im.id);
  }
  return split;
}

std::vector<std::string> sample_target_classes(const SemanticTree& tree, int count,
                                               uint64_t seed) {
  const std::vector<std::string> leaves = tree.leaf_names();
  if (count <= 0 || count >= static_cast<int>(leaves.size()))
    throw ConfigError("sample_target_classes: count must be in [1, leaves)");
  Rng rng(seed);
  Rng stream = rng.substream("target-classes");
  const auto picks = sample_indices(leaves.size(), static_cast<size_t>(count), stream);
  std::vector<std::string> out;
  for (size_t idx : picks) out.push_back(leaves[idx]);
  return out;  // ascending index order == sorted names
}

LeafFilterResult drop_non_leaf_annotated_images(const Dataset& data, const SemanticTree& tree) {
  std::set<int64_t> dropped;
  for (const Annotation& a : data.annotations()) {
    const std::string& name = data.classes()[a.class_idx].name;
    const int node = tree.node_index(name);
    if (node < 0 || !tree.nodes()[node].is_leaf()) dropped.insert(a.image_id);
  }
  std::vector<int64_t> keep;
  for (const ImageRecord& im : data.images())
    if (!dropped.count(im.id)) keep.push_back(im.id);
  LeafFilterResult result{subset_by_images(data, keep),
                          std::vector<int64_t>(dropped.begin(), dropped.end())};
  return result;
}

std::string split_to_json(const DatasetSplit& split) {
  Json j;
  j["source_classes"] = split.source_classes;
  j["target_classes"] = split.target_classes;
  j["source_images"] = split.source_images;
  j["target_images"] = split.target_images;
  j["provenance"] = Json{{"seed", split.seed}};
  return j.dump(2) + "\n";
}

DatasetSplit split_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  DatasetSplit split;
  try {
    split.source_classes = j.at("source_classes").get<std::vector<std::string>>();
    split.target_classes = j.at("target_classes").get<std::vector<std::string>>();
    split.source_images = j.at("source_images").get<std::vector<int64_t>>();
    split.target_images = j.at("target_images").get<std::vector<int64_t>>();
    split.seed = j.at("provenance").at("seed").get<uint64_t>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
  return split;
}

void save_split(const DatasetSplit& split, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write split file: " + path);
  out << split_to_json(split);
}

DatasetSplit load_split(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open split file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return split_from_json(buf.str());
}

}  // namespace propgen
