#include "propgen/tree.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "propgen/errors.hpp"

namespace propgen {

using Json = nlohmann::json;

SemanticTree SemanticTree::from_nodes(const std::vector<NodeSpec>& specs) {
  SemanticTree tree;
  for (const NodeSpec& spec : specs) {
    if (tree.by_id_.count(spec.id)) {
      // A node listed twice, possibly with two different parents.
      tree.issues_.push_back("duplicate node id " + std::to_string(spec.id) + " ('" +
                             tree.nodes_[tree.by_id_[spec.id]].name + "' and '" + spec.name + "')");
      continue;
    }
    TreeNode node;
    node.id = spec.id;
    node.name = spec.name;
    node.parent_id = spec.parent_id;
    const int idx = static_cast<int>(tree.nodes_.size());
    tree.by_id_[spec.id] = idx;
    if (!tree.by_name_.emplace(spec.name, idx).second)
      tree.issues_.push_back("duplicate node name '" + spec.name + "'");
    tree.nodes_.push_back(std::move(node));
  }

  std::vector<int> roots;
  for (size_t i = 0; i < tree.nodes_.size(); ++i) {
    TreeNode& node = tree.nodes_[i];
    if (node.parent_id < 0) {
      roots.push_back(static_cast<int>(i));
      continue;
    }
    auto it = tree.by_id_.find(node.parent_id);
    if (it == tree.by_id_.end()) {
      tree.issues_.push_back("node '" + node.name + "' has unknown parent id " +
                             std::to_string(node.parent_id));
    } else if (it->second == static_cast<int>(i)) {
      tree.issues_.push_back("node '" + node.name + "' is its own parent");
    } else {
      node.parent = it->second;
      tree.nodes_[it->second].children.push_back(static_cast<int>(i));
    }
  }
  if (roots.size() == 1) tree.root_ = roots[0];

  // Levels by breadth-first walk from every root candidate; nodes inside
  // cycles stay at level -1 and are reported by validate_tree.
  std::deque<int> queue;
  for (int r : roots) {
    tree.nodes_[r].level = 0;
    queue.push_back(r);
  }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : tree.nodes_[u].children) {
      if (tree.nodes_[v].level >= 0) continue;
      tree.nodes_[v].level = tree.nodes_[u].level + 1;
      queue.push_back(v);
    }
  }
  return tree;
}

int SemanticTree::node_index(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

int SemanticTree::index_by_id(int64_t id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? -1 : it->second;
}

int SemanticTree::max_level() const {
  int level = 0;
  for (const TreeNode& node : nodes_) level = std::max(level, node.level);
  return level;
}

std::vector<int> SemanticTree::leaf_indices() const {
  std::vector<int> leaves;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) leaves.push_back(static_cast<int>(i));
  std::sort(leaves.begin(), leaves.end(),
            [this](int a, int b) { return nodes_[a].name < nodes_[b].name; });
  return leaves;
}

std::vector<std::string> SemanticTree::leaf_names() const {
  std::vector<std::string> names;
  for (int idx : leaf_indices()) names.push_back(nodes_[idx].name);
  return names;
}

int SemanticTree::ancestor_at_level(int node, int level) const {
  const TreeNode& n = nodes_.at(node);
  if (n.level < 0) throw ValidationError("node '" + n.name + "' has no resolved level");
  if (level < 0) throw ConfigError("ancestor_at_level: negative level");
  int cur = node;
  while (nodes_[cur].level > level) cur = nodes_[cur].parent;
  return cur;  // the node itself when it sits at or above the level
}

int SemanticTree::lca(int a, int b) const {
  if (nodes_.at(a).level < 0 || nodes_.at(b).level < 0)
    throw ValidationError("lca over nodes without resolved levels");
  while (a != b) {
    if (nodes_[a].level > nodes_[b].level)
      a = nodes_[a].parent;
    else if (nodes_[b].level > nodes_[a].level)
      b = nodes_[b].parent;
    else {
      a = nodes_[a].parent;
      b = nodes_[b].parent;
    }
    if (a < 0 || b < 0) throw ValidationError("lca walked past a root");
  }
  return a;
}

void SemanticTree::clear_frequencies() {
  for (TreeNode& node : nodes_) node.frequency = 0;
}

bool SemanticTree::sound() const {
  if (!issues_.empty() || root_ < 0) return false;
  for (const TreeNode& node : nodes_)
    if (node.level < 0) return false;
  return true;
}

TreeValidation validate_tree(const SemanticTree& tree) {
  TreeValidation report;
  report.violations = tree.construction_issues();

  int roots = 0;
  for (const TreeNode& node : tree.nodes())
    if (node.parent_id < 0) ++roots;
  if (roots == 0 && !tree.nodes().empty()) report.violations.push_back("no root node");
  if (roots > 1) report.violations.push_back("multiple roots (" + std::to_string(roots) + ")");

  for (const TreeNode& node : tree.nodes()) {
    if (node.level < 0 && node.parent >= 0)
      report.violations.push_back("cycle involving node '" + node.name + "'");
    if (node.parent >= 0 && node.level >= 0) {
      const TreeNode& parent = tree.nodes()[node.parent];
      if (parent.level >= 0 && node.level != parent.level + 1)
        report.violations.push_back("level gap at node '" + node.name + "'");
    }
    if (node.frequency < 0)
      report.violations.push_back("negative frequency on node '" + node.name + "'");
    if (!node.is_leaf() && node.frequency > 0)
      report.violations.push_back("internal node '" + node.name + "' carries " +
                                  std::to_string(node.frequency) + " annotations");
  }
  return report;
}

SemanticTree hierarchy_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("hierarchy file must be a list of nodes");

  std::vector<SemanticTree::NodeSpec> specs;
  for (const Json& nj : j) {
    SemanticTree::NodeSpec spec;
    if (!nj.contains("id") || !nj["id"].is_number())
      throw ParseError("hierarchy node without numeric id");
    spec.id = nj["id"].get<int64_t>();
    if (!nj.contains("name") || !nj["name"].is_string())
      throw ParseError("hierarchy node " + std::to_string(spec.id) + " without name");
    spec.name = nj["name"].get<std::string>();
    if (nj.contains("parent") && !nj["parent"].is_null())
      spec.parent_id = nj["parent"].get<int64_t>();
    specs.push_back(std::move(spec));
  }
  return SemanticTree::from_nodes(specs);
}

SemanticTree load_hierarchy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open hierarchy file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return hierarchy_from_json(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string hierarchy_to_json(const SemanticTree& tree) {
  std::vector<const TreeNode*> ordered;
  for (const TreeNode& node : tree.nodes()) ordered.push_back(&node);
  std::sort(ordered.begin(), ordered.end(),
            [](const TreeNode* a, const TreeNode* b) { return a->id < b->id; });
  Json j = Json::array();
  for (const TreeNode* node : ordered) {
    Json nj{{"id", node->id}, {"name", node->name}};
    if (node->parent_id < 0)
      nj["parent"] = nullptr;
    else
      nj["parent"] = node->parent_id;
    j.push_back(std::move(nj));
  }
  return j.dump(2) + "\n";
}

void save_hierarchy(const SemanticTree& tree, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write hierarchy file: " + path);
  out << hierarchy_to_json(tree);
}

RelabelResult relabel_to_level(const Dataset& data, const SemanticTree& tree, int level) {
  if (level < 0 || level > tree.max_level())
    throw ValidationError("relabel level " + std::to_string(level) + " outside [0, " +
                          std::to_string(tree.max_level()) + "]");

  // Map every dataset class to its ancestor node once.
  std::vector<int> ancestor_of_class(data.classes().size(), -1);
  for (size_t c = 0; c < data.classes().size(); ++c) {
    const std::string& name = data.classes()[c].name;
    const int node = tree.node_index(name);
    if (node < 0) throw ValidationError("dataset class '" + name + "' is not in the hierarchy");
    ancestor_of_class[c] = tree.ancestor_at_level(node, level);
  }

  // New class table: ancestors actually in use, keyed by node id for the
  // category ids so files stay stable across runs.
  std::set<int> used;
  for (const Annotation& a : data.annotations()) used.insert(ancestor_of_class[a.class_idx]);
  std::vector<ClassInfo> new_classes;
  for (int node : used)
    new_classes.push_back(ClassInfo{tree.nodes()[node].id, tree.nodes()[node].name});
  std::sort(new_classes.begin(), new_classes.end(),
            [](const ClassInfo& a, const ClassInfo& b) { return a.name < b.name; });
  std::map<int64_t, int> new_index_by_node_id;
  for (size_t i = 0; i < new_classes.size(); ++i)
    new_index_by_node_id[new_classes[i].coco_id] = static_cast<int>(i);

  std::vector<Annotation> new_anns = data.annotations();
  for (Annotation& a : new_anns) {
    const int node = ancestor_of_class[a.class_idx];
    a.class_idx = new_index_by_node_id.at(tree.nodes()[node].id);
  }

  RelabelResult result{Dataset(data.images(), std::move(new_classes), std::move(new_anns)),
                       static_cast<int>(used.size())};
  return result;
}

std::map<std::string, int64_t> class_frequencies(const Dataset& data, const SemanticTree& tree) {
  std::map<std::string, int64_t> freqs;
  for (const std::string& name : tree.leaf_names()) freqs[name] = 0;
  for (const Annotation& a : data.annotations()) {
    const std::string& name = data.classes()[a.class_idx].name;
    const int node = tree.node_index(name);
    if (node < 0)
      throw ValidationError("annotation class '" + name + "' is not in the hierarchy");
    if (!tree.nodes()[node].is_leaf())
      throw ValidationError("annotation class '" + name + "' is not a leaf");
    ++freqs[name];
  }
  return freqs;
}

void apply_frequencies(SemanticTree& tree, const std::map<std::string, int64_t>& freqs) {
  tree.clear_frequencies();
  for (const auto& [name, count] : freqs) {
    const int node = tree.node_index(name);
    if (node < 0) throw ValidationError("frequency for unknown class '" + name + "'");
    tree.set_frequency(node, count);
  }
}

}  // namespace propgen
