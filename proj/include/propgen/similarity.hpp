#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "propgen/metrics.hpp"

namespace propgen {

// Class replaceability built from cross-class AP ratios:
//   S[i][j] = max(AP^i(j) / AP^j(j), AP^j(i) / AP^i(i))
// A ratio with an undefined or zero denominator, or an undefined numerator,
// contributes 0. Values are clamped to [0, 1]; the raw ratio survives in a
// side channel. Symmetric by construction.
struct SimilarityMatrix {
  std::vector<std::string> classes;       // sorted by name
  std::vector<double> values;             // clamped, row-major
  std::vector<double> raw;                // before clamping
  std::vector<uint8_t> input_defined;     // 1 iff all four AP inputs defined
  std::string ap_table_hash;              // provenance

  size_t size() const { return classes.size(); }
  double at(size_t i, size_t j) const { return values[i * classes.size() + j]; }
  double raw_at(size_t i, size_t j) const { return raw[i * classes.size() + j]; }
  bool defined_at(size_t i, size_t j) const { return input_defined[i * classes.size() + j] != 0; }
  int class_index(const std::string& name) const;  // -1 when absent
};

SimilarityMatrix similarity_matrix(const ApTable& table);

// Highest-similarity member of `pool` for `query`, restricted to entries with
// defined inputs; name order breaks value ties. Pool members must exist in
// the matrix; all-undefined pools raise ValidationError.
std::string most_similar_class(const SimilarityMatrix& sim, const std::string& query,
                               const std::vector<std::string>& pool);

}  // namespace propgen
