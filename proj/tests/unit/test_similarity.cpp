#include "doctest.h"

#include "fixtures.hpp"
#include "propgen/errors.hpp"
#include "propgen/similarity.hpp"

using propgen::ApTable;
using propgen::SimilarityMatrix;
using propgen::similarity_matrix;

TEST_CASE("similarity hand case") {
  ApTable table;
  table.classes = {"a", "b"};
  table.values = {0.8, 0.2,   // AP^a(a), AP^a(b)
                  0.1, 0.5};  // AP^b(a), AP^b(b)
  const SimilarityMatrix sim = similarity_matrix(table);
  // max(0.2/0.5, 0.1/0.8) = max(0.4, 0.125) = 0.4.
  CHECK(sim.at(0, 1) == doctest::Approx(0.4));
  CHECK(sim.at(1, 0) == doctest::Approx(0.4));
  CHECK(sim.at(0, 0) == doctest::Approx(1.0));
  CHECK(sim.at(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("similarity is symmetric on random tables") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const ApTable table = fixtures::random_ap_table(seed, 8);
    const SimilarityMatrix sim = similarity_matrix(table);
    for (size_t i = 0; i < sim.size(); ++i)
      for (size_t j = 0; j < sim.size(); ++j) {
        CHECK(sim.at(i, j) == sim.at(j, i));
        CHECK(sim.at(i, j) >= 0.0);
        CHECK(sim.at(i, j) <= 1.0);
      }
  }
}

TEST_CASE("diagonal is one whenever the class finds itself at all") {
  for (uint64_t seed = 30; seed <= 40; ++seed) {
    const ApTable table = fixtures::random_ap_table(seed, 6);
    const SimilarityMatrix sim = similarity_matrix(table);
    for (size_t i = 0; i < sim.size(); ++i) CHECK(sim.at(i, i) == doctest::Approx(1.0));
  }
}

TEST_CASE("global positive scaling of ap leaves similarity unchanged") {
  const ApTable table = fixtures::random_ap_table(7, 10);
  const SimilarityMatrix base = similarity_matrix(table);
  for (double scale : {0.25, 0.5, 2.0}) {
    ApTable scaled = table;
    for (auto& v : scaled.values)
      if (v) v = *v * scale;
    const SimilarityMatrix s = similarity_matrix(scaled);
    for (size_t i = 0; i < base.size(); ++i)
      for (size_t j = 0; j < base.size(); ++j)
        CHECK(std::abs(s.at(i, j) - base.at(i, j)) <= 1e-12);
  }
}

TEST_CASE("undefined and zero denominators contribute zero and are flagged") {
  ApTable table;
  table.classes = {"a", "b", "c"};
  table.values.assign(9, std::nullopt);
  table.values[0] = 0.5;                  // AP^a(a)
  table.values[4] = 0.0;                  // AP^b(b) = 0: zero denominator
  table.values[1] = 0.3;                  // AP^a(b)
  table.values[3] = 0.2;                  // AP^b(a)
  // c row/col fully undefined.
  const SimilarityMatrix sim = similarity_matrix(table);
  // a-b: AP^a(b)/AP^b(b) undefined (zero denom) -> 0; AP^b(a)/AP^a(a) = 0.4.
  CHECK(sim.at(0, 1) == doctest::Approx(0.4));
  CHECK(sim.at(0, 2) == doctest::Approx(0.0));
  CHECK_FALSE(sim.defined_at(0, 2));
  // b-b diagonal: AP = 0 -> not "defined and positive", similarity 0.
  CHECK(sim.at(1, 1) == doctest::Approx(0.0));
}

TEST_CASE("raw values survive clamping") {
  ApTable table;
  table.classes = {"a", "b"};
  table.values = {0.1, 0.9,
                  0.9, 0.1};
  const SimilarityMatrix sim = similarity_matrix(table);
  CHECK(sim.at(0, 1) == doctest::Approx(1.0));       // clamped
  CHECK(sim.raw_at(0, 1) == doctest::Approx(9.0));   // 0.9 / 0.1
}

TEST_CASE("most similar class picks the best defined pool member") {
  ApTable table;
  table.classes = {"a", "b", "c", "d"};
  table.values.assign(16, 0.0);
  auto set = [&](int i, int j, double v) { table.values[i * 4 + j] = v; };
  set(0, 0, 0.5);
  set(1, 1, 0.5);
  set(2, 2, 0.5);
  set(3, 3, 0.5);
  set(0, 1, 0.4);  // s(a,b) = 0.8
  set(0, 2, 0.2);  // s(a,c) = 0.4
  const propgen::SimilarityMatrix sim = similarity_matrix(table);
  CHECK(propgen::most_similar_class(sim, "a", {"b", "c"}) == "b");
  CHECK(propgen::most_similar_class(sim, "a", {"c"}) == "c");
  // Ties fall to name order: d ties with c at 0.
  CHECK(propgen::most_similar_class(sim, "a", {"d", "c"}) == "c");
  CHECK_THROWS_AS(propgen::most_similar_class(sim, "a", {"zebra"}), propgen::ValidationError);
}

TEST_CASE("similarity matrix carries the ap table hash") {
  const ApTable table = fixtures::random_ap_table(9, 4);
  const SimilarityMatrix sim = similarity_matrix(table);
  CHECK_FALSE(sim.ap_table_hash.empty());
}
