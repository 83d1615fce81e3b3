#include "propgen/similarity.hpp"

#include <algorithm>
#include <sstream>

#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

int SimilarityMatrix::class_index(const std::string& name) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), name);
  if (it == classes.end() || *it != name) return -1;
  return static_cast<int>(it - classes.begin());
}

namespace {

// Ratio contribution: zero when the numerator is undefined or the denominator
// is undefined or non-positive.
double safe_ratio(const std::optional<double>& num, const std::optional<double>& den) {
  if (!num.has_value() || !den.has_value() || *den <= 0.0) return 0.0;
  return *num / *den;
}

std::string hash_ap_table(const ApTable& table) {
  std::ostringstream blob;
  for (const std::string& c : table.classes) blob << c << '\n';
  blob.precision(17);
  for (const auto& v : table.values) {
    if (v.has_value())
      blob << *v << ';';
    else
      blob << "undef;";
  }
  std::ostringstream hex;
  hex << std::hex << fnv1a64(blob.str());
  return hex.str();
}

}  // namespace

SimilarityMatrix similarity_matrix(const ApTable& table) {
  const size_t n = table.size();
  if (n < 2) throw ValidationError("similarity needs at least two classes");

  SimilarityMatrix sim;
  sim.classes = table.classes;
  sim.values.assign(n * n, 0.0);
  sim.raw.assign(n * n, 0.0);
  sim.input_defined.assign(n * n, 0);
  sim.ap_table_hash = hash_ap_table(table);

  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      double raw;
      bool defined;
      if (i == j) {
        const auto d = table.at(i, i);
        raw = (d.has_value() && *d > 0.0) ? 1.0 : 0.0;
        defined = d.has_value();
      } else {
        raw = std::max(safe_ratio(table.at(i, j), table.at(j, j)),
                       safe_ratio(table.at(j, i), table.at(i, i)));
        defined = table.at(i, j).has_value() && table.at(j, j).has_value() &&
                  table.at(j, i).has_value() && table.at(i, i).has_value();
      }
      const double clamped = std::min(raw, 1.0);
      sim.raw[i * n + j] = sim.raw[j * n + i] = raw;
      sim.values[i * n + j] = sim.values[j * n + i] = clamped;
      sim.input_defined[i * n + j] = sim.input_defined[j * n + i] = defined ? 1 : 0;
    }
  }
  return sim;
}

std::string most_similar_class(const SimilarityMatrix& sim, const std::string& query,
                               const std::vector<std::string>& pool) {
  const int q = sim.class_index(query);
  if (q < 0) throw ValidationError("query class '" + query + "' is not in the matrix");
  if (pool.empty()) throw ValidationError("most_similar_class: empty pool");

  std::vector<std::string> sorted_pool = pool;
  std::sort(sorted_pool.begin(), sorted_pool.end());

  std::string best;
  double best_value = -1.0;
  bool any_defined = false;
  for (const std::string& name : sorted_pool) {
    const int c = sim.class_index(name);
    if (c < 0) throw ValidationError("pool class '" + name + "' is not in the matrix");
    if (!sim.defined_at(q, c)) continue;
    any_defined = true;
    const double v = sim.at(q, c);
    if (v > best_value) {  // name order already breaks ties
      best_value = v;
      best = name;
    }
  }
  if (!any_defined)
    throw ValidationError("every similarity between '" + query + "' and the pool is undefined");
  return best;
}

}  // namespace propgen
