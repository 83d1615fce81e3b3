#include "propgen/selection.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "propgen/clustering.hpp"
#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

using Json = nlohmann::json;

namespace {

int64_t freq_of(const FrequencyMap& freqs, const std::string& name) {
  auto it = freqs.find(name);
  return it == freqs.end() ? 0 : it->second;
}

void check_p(int p, size_t n, const char* method) {
  if (p < 1 || p > static_cast<int>(n))
    throw ConfigError(std::string(method) + ": P = " + std::to_string(p) +
                      " outside [1, " + std::to_string(n) + "]");
}

// Most frequent member, name order breaking ties. Members must be sorted.
std::string representative(const std::vector<std::string>& members, const FrequencyMap& freqs) {
  std::string best = members.front();
  int64_t best_freq = freq_of(freqs, best);
  for (const std::string& name : members) {
    const int64_t f = freq_of(freqs, name);
    if (f > best_freq) {
      best = name;
      best_freq = f;
    }
  }
  return best;
}

void finish_clustered_selection(ProtoSelection& sel,
                                std::vector<std::vector<std::string>> clusters,
                                const FrequencyMap& freqs) {
  for (auto& cluster : clusters) std::sort(cluster.begin(), cluster.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  for (const auto& cluster : clusters) sel.classes.push_back(representative(cluster, freqs));
  std::sort(sel.classes.begin(), sel.classes.end());
  sel.clusters = std::move(clusters);
}

}  // namespace

ProtoSelection oracle_visual_clustering(const SimilarityMatrix& sim, const FrequencyMap& freqs,
                                        int p) {
  const size_t n = sim.size();
  check_p(p, n, "oracle_visual_clustering");

  std::vector<std::string> undefined_rows;
  for (size_t i = 0; i < n; ++i) {
    bool any = false;
    for (size_t j = 0; j < n; ++j)
      if (j != i && sim.defined_at(i, j)) any = true;
    if (!any && n > 1) undefined_rows.push_back(sim.classes[i]);
  }
  if (!undefined_rows.empty()) {
    std::ostringstream msg;
    msg << "similarity rows with no defined entries:";
    for (const std::string& name : undefined_rows) msg << " " << name;
    throw ValidationError(msg.str());
  }

  std::vector<double> dissim(n * n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) dissim[i * n + j] = 1.0 - sim.at(i, j);

  const ClusterResult clusters = average_linkage_cluster(dissim, static_cast<int>(n), p);

  ProtoSelection sel;
  sel.method = "oracle-visual";
  sel.p = p;
  std::vector<std::vector<std::string>> groups(p);
  for (size_t i = 0; i < n; ++i) groups[clusters.assignment[i]].push_back(sim.classes[i]);
  finish_clustered_selection(sel, std::move(groups), freqs);
  return sel;
}

namespace {

struct SemanticCluster {
  std::vector<int> members;  // leaf indices in the tree
  int anchor = -1;           // tree node index
  int64_t freq = 0;
  std::string key;           // smallest member name
};

}  // namespace

ProtoSelection semantic_frequency_clustering(const SemanticTree& tree, const FrequencyMap& freqs,
                                             int p) {
  if (!tree.sound()) throw ValidationError("semantic clustering needs a sound hierarchy");
  const std::vector<int> leaves = tree.leaf_indices();
  check_p(p, leaves.size(), "semantic_frequency_clustering");

  std::vector<SemanticCluster> clusters;
  for (int leaf : leaves) {
    SemanticCluster c;
    c.members = {leaf};
    c.anchor = leaf;
    c.freq = freq_of(freqs, tree.nodes()[leaf].name);
    c.key = tree.nodes()[leaf].name;
    clusters.push_back(std::move(c));
  }

  auto parent_of = [&](int node) { return tree.nodes()[node].parent; };
  auto mergeable = [&](const SemanticCluster& a, const SemanticCluster& b) {
    if (a.anchor == b.anchor) return true;
    const int pa = parent_of(a.anchor), pb = parent_of(b.anchor);
    if (pa >= 0 && pa == pb) return true;        // sibling anchors
    return a.anchor == pb || b.anchor == pa;     // direct parent-child anchors
  };

  while (static_cast<int>(clusters.size()) > p) {
    int best_a = -1, best_b = -1;
    for (size_t i = 0; i < clusters.size(); ++i) {
      for (size_t j = i + 1; j < clusters.size(); ++j) {
        if (!mergeable(clusters[i], clusters[j])) continue;
        // Order the pair by key so tie-breaks are stable.
        size_t u = i, v = j;
        if (clusters[v].key < clusters[u].key) std::swap(u, v);
        if (best_a < 0) {
          best_a = static_cast<int>(u);
          best_b = static_cast<int>(v);
          continue;
        }
        const int64_t cand = clusters[u].freq + clusters[v].freq;
        const int64_t best = clusters[best_a].freq + clusters[best_b].freq;
        if (cand < best ||
            (cand == best && std::pair(clusters[u].key, clusters[v].key) <
                                 std::pair(clusters[best_a].key, clusters[best_b].key))) {
          best_a = static_cast<int>(u);
          best_b = static_cast<int>(v);
        }
      }
    }
    if (best_a < 0) {
      // Nothing mergeable at the current anchor depth: lift every anchor one
      // level. All anchors eventually reach the root, where everything merges.
      for (SemanticCluster& c : clusters)
        if (parent_of(c.anchor) >= 0) c.anchor = parent_of(c.anchor);
      continue;
    }
    SemanticCluster& a = clusters[best_a];
    SemanticCluster& b = clusters[best_b];
    a.anchor = tree.lca(a.anchor, b.anchor);
    a.freq += b.freq;
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    a.key = std::min(a.key, b.key);
    clusters.erase(clusters.begin() + best_b);
  }

  ProtoSelection sel;
  sel.method = "semantic-frequency";
  sel.p = p;
  std::vector<std::vector<std::string>> groups;
  for (const SemanticCluster& c : clusters) {
    std::vector<std::string> names;
    for (int leaf : c.members) names.push_back(tree.nodes()[leaf].name);
    groups.push_back(std::move(names));
  }
  finish_clustered_selection(sel, std::move(groups), freqs);
  return sel;
}

ProtoSelection most_frequent_subset(const FrequencyMap& freqs, int p) {
  check_p(p, freqs.size(), "most_frequent_subset");
  std::vector<std::pair<std::string, int64_t>> ranked(freqs.begin(), freqs.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  ProtoSelection sel;
  sel.method = "most-frequent";
  sel.p = p;
  for (int i = 0; i < p; ++i) sel.classes.push_back(ranked[i].first);
  std::sort(sel.classes.begin(), sel.classes.end());
  return sel;
}

ProtoSelection random_subset(const std::vector<std::string>& classes, int p, uint64_t seed) {
  check_p(p, classes.size(), "random_subset");
  std::vector<std::string> sorted = classes;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  check_p(p, sorted.size(), "random_subset");

  Rng stream = Rng(seed).substream("random-subset");
  const auto picks = sample_indices(sorted.size(), static_cast<size_t>(p), stream);

  ProtoSelection sel;
  sel.method = "random";
  sel.p = p;
  sel.seed = seed;
  for (size_t idx : picks) sel.classes.push_back(sorted[idx]);
  return sel;  // ascending indices over sorted names: already sorted
}

std::string selection_to_json(const ProtoSelection& sel) {
  Json j;
  j["method"] = sel.method;
  j["p"] = sel.p;
  if (sel.seed.has_value()) j["seed"] = *sel.seed;
  j["classes"] = sel.classes;
  if (!sel.clusters.empty()) j["clusters"] = sel.clusters;
  return j.dump(2) + "\n";
}

ProtoSelection selection_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  ProtoSelection sel;
  try {
    sel.method = j.at("method").get<std::string>();
    sel.p = j.at("p").get<int>();
    if (j.contains("seed")) sel.seed = j["seed"].get<uint64_t>();
    sel.classes = j.at("classes").get<std::vector<std::string>>();
    if (j.contains("clusters"))
      sel.clusters = j["clusters"].get<std::vector<std::vector<std::string>>>();
  } catch (const Json::exception& e) {
    throw ParseError(std::string("selection file: ") + e.what());
  }
  return sel;
}

void save_selection(const ProtoSelection& sel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write selection file: " + path);
  out << selection_to_json(sel);
}

ProtoSelection load_selection(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open selection file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return selection_from_json(buf.str());
}

}  // namespace propgen
