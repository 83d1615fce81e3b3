#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"

namespace propgen {

struct TreeNode {
  int64_t id = 0;
  std::string name;
  int64_t parent_id = -1;  // -1: no parent (root candidate)
  int parent = -1;         // index into nodes(); -1 for root or unresolved
  int level = -1;          // depth from root; -1 when unreachable (cycle, orphan)
  int64_t frequency = 0;   // per-node example count; only leaves should carry one
  std::vector<int> children;

  bool is_leaf() const { return children.empty(); }
};

// Class hierarchy with levels derived as depth from the root (L0). Structural
// defects (cycles, duplicate ids, missing parents, multiple roots) do not stop
// construction; they are reported by validate_tree so broken files can be
// inspected. Operations that need a sound tree throw ValidationError when it
// is not one.
class SemanticTree {
 public:
  struct NodeSpec {
    int64_t id = 0;
    std::string name;
    int64_t parent_id = -1;
  };

  SemanticTree() = default;
  static SemanticTree from_nodes(const std::vector<NodeSpec>& specs);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int node_index(const std::string& name) const;  // -1 when absent
  int index_by_id(int64_t id) const;              // -1 when absent
  int root() const { return root_; }              // -1 when zero or several roots
  int max_level() const;

  std::vector<int> leaf_indices() const;          // sorted by name
  std::vector<std::string> leaf_names() const;    // sorted

  // Ancestor of `node` at `level`; the node itself when it already sits at or
  // above that level. Requires a resolved level for the node.
  int ancestor_at_level(int node, int level) const;
  int lca(int a, int b) const;

  void set_frequency(int node, int64_t count) { nodes_.at(node).frequency = count; }
  void clear_frequencies();

  const std::vector<std::string>& construction_issues() const { return issues_; }
  bool sound() const;  // no construction issues, single root, all levels resolved

 private:
  std::vector<TreeNode> nodes_;
  std::map<std::string, int> by_name_;
  std::map<int64_t, int> by_id_;
  std::vector<std::string> issues_;
  int root_ = -1;
};

struct TreeValidation {
  std::vector<std::string> violations;
  bool pass() const { return violations.empty(); }
};

// Structural audit: missing/multiple roots, cycles, duplicate ids (a node
// listed with two parents shows up as a duplicate id), unknown parents, level
// gaps, internal nodes carrying annotation counts, negative counts.
// Violations are data, not exceptions.
TreeValidation validate_tree(const SemanticTree& tree);

// Hierarchy JSON: list of {"id", "name", "parent"} with parent null for the
// root. Levels are derived, never stored.
SemanticTree hierarchy_from_json(const std::string& text);
SemanticTree load_hierarchy(const std::string& path);
std::string hierarchy_to_json(const SemanticTree& tree);
void save_hierarchy(const SemanticTree& tree, const std::string& path);

struct RelabelResult {
  Dataset dataset;       // classes replaced by the in-use ancestor classes
  int class_count = 0;   // distinct ancestor classes in use at the level
};

// Replace every annotation's class with its ancestor at `level` (the class
// itself when its node sits at or above the level). Box count is preserved.
RelabelResult relabel_to_level(const Dataset& data, const SemanticTree& tree, int level);

// Leaf-name keyed counts over the whole leaf set (absent classes count 0).
// Annotations whose class is not a leaf of the tree raise ValidationError.
std::map<std::string, int64_t> class_frequencies(const Dataset& data, const SemanticTree& tree);

// Copy leaf counts into the tree's frequency slots (non-leaves reset to 0).
void apply_frequencies(SemanticTree& tree, const std::map<std::string, int64_t>& freqs);

}  // namespace propgen
