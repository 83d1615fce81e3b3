#include "doctest.h"

#include <set>
#include <tuple>

#include "propgen/errors.hpp"
#include "propgen/fusion.hpp"
#include "propgen/study.hpp"

using propgen::Annotation;
using propgen::BudgetConfig;
using propgen::BudgetedDataset;
using propgen::ClassInfo;
using propgen::Dataset;
using propgen::ImageRecord;
using propgen::MetricConfig;
using propgen::Proposal;
using propgen::ProposalRole;
using propgen::ProposalSet;
using propgen::WeakLabelConfig;
using propgen::box_from_xywh;
using propgen::build_budgeted_dataset;

namespace {

// 6 images; ant boxes everywhere, bee boxes on even images, cat on image 6.
Dataset budget_data() {
  std::vector<ImageRecord> images;
  std::vector<Annotation> anns;
  int64_t next_ann = 1;
  for (int64_t id = 1; id <= 6; ++id) {
    images.push_back({id, 100, 100});
    anns.push_back({next_ann++, id, 0, box_from_xywh(0, 0, 10, 10)});
    anns.push_back({next_ann++, id, 0, box_from_xywh(20, 0, 10, 10)});
    if (id % 2 == 0) anns.push_back({next_ann++, id, 1, box_from_xywh(40, 0, 10, 10)});
    if (id == 6) anns.push_back({next_ann++, id, 2, box_from_xywh(60, 0, 10, 10)});
  }
  std::vector<ClassInfo> classes = {{1, "ant"}, {2, "bee"}, {3, "cat"}};
  return Dataset(images, classes, anns);
}

ProposalSet make_set(const std::vector<std::tuple<int64_t, propgen::Box, double, std::string>>& rows) {
  ProposalSet set;
  for (const auto& [image, box, score, source] : rows) {
    Proposal p;
    p.box = box;
    p.score = score;
    p.source = source.empty() ? -1 : set.intern_source(source);
    set.images()[image].push_back(p);
  }
  set.normalize(0);
  return set;
}

}  // namespace

TEST_CASE("budget config validation") {
  BudgetConfig cfg;
  CHECK_THROWS_AS(cfg.validate(), propgen::ConfigError);
  cfg.image_budget = 2;
  cfg.box_budget = 4;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("budgeted dataset hits exact budgets") {
  const Dataset data = budget_data();
  BudgetConfig cfg;
  cfg.image_budget = 3;
  cfg.box_budget = 4;
  cfg.seed = 11;
  const BudgetedDataset out = build_budgeted_dataset(data, {"ant", "bee"}, cfg);
  CHECK(out.eligible_images == 6);
  CHECK(out.dataset.images().size() == 3);
  CHECK(out.dataset.annotations().size() == 4);
  CHECK_FALSE(out.under_budget_images);
  CHECK_FALSE(out.under_budget_boxes);
  // No out-of-selection boxes survive.
  for (const Annotation& a : out.dataset.annotations()) {
    const std::string& name = out.dataset.class_name(a.class_idx);
    CHECK((name == "ant" || name == "bee"));
  }
  // Every kept box sits in a kept image (constructor enforces it, but the
  // budget path is the one under test).
  std::set<int64_t> kept;
  for (const ImageRecord& im : out.dataset.images()) kept.insert(im.id);
  for (const Annotation& a : out.dataset.annotations()) CHECK(kept.count(a.image_id) == 1);
}

TEST_CASE("budgeted dataset is deterministic per seed") {
  const Dataset data = budget_data();
  BudgetConfig cfg;
  cfg.image_budget = 4;
  cfg.box_budget = 5;
  cfg.seed = 3;
  const BudgetedDataset a = build_budgeted_dataset(data, {"ant"}, cfg);
  const BudgetedDataset b = build_budgeted_dataset(data, {"ant"}, cfg);
  CHECK(propgen::dataset_to_json(a.dataset) == propgen::dataset_to_json(b.dataset));
  cfg.seed = 4;
  const BudgetedDataset c = build_budgeted_dataset(data, {"ant"}, cfg);
  // 6 choose 4 leaves room; these seeds pick different images.
  CHECK(propgen::dataset_to_json(a.dataset) != propgen::dataset_to_json(c.dataset));
}

TEST_CASE("scarce data flags under budget instead of failing") {
  const Dataset data = budget_data();
  BudgetConfig cfg;
  cfg.image_budget = 2;
  cfg.box_budget = 100;
  cfg.seed = 1;
  const BudgetedDataset out = build_budgeted_dataset(data, {"cat"}, cfg);
  CHECK(out.eligible_images == 1);  // only image 6 has a cat
  CHECK(out.under_budget_images);
  CHECK(out.under_budget_boxes);
  CHECK(out.dataset.annotations().size() == 1);
}

TEST_CASE("unknown selection class is rejected") {
  BudgetConfig cfg;
  cfg.image_budget = 1;
  cfg.box_budget = 1;
  CHECK_THROWS_AS(build_budgeted_dataset(budget_data(), {"walrus"}, cfg),
                  propgen::ValidationError);
}

TEST_CASE("sufficiency rows carry ar and drop against the baseline") {
  std::vector<ImageRecord> images = {{1, 100, 100}};
  std::vector<ClassInfo> classes = {{1, "x"}};
  std::vector<Annotation> anns = {{1, 1, 0, box_from_xywh(0, 0, 10, 10)},
                                  {2, 1, 0, box_from_xywh(30, 30, 10, 10)}};
  const Dataset target(images, classes, anns);

  const ProposalSet full = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, "a"},
      {1, box_from_xywh(30, 30, 10, 10), 0.8, "a"},
  });
  const ProposalSet half = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, "a"},
  });

  MetricConfig cfg;
  cfg.ar_k_values = {10};
  std::vector<propgen::SufficiencyCondition> conds = {{"random", 1, &half},
                                                      {"oracle-visual", 2, &full}};
  const propgen::SufficiencyCurve curve = propgen::sufficiency_eval(conds, target, cfg, &full);
  REQUIRE(curve.has_baseline);
  CHECK(curve.baseline_ar[0] == doctest::Approx(1.0));
  REQUIRE(curve.rows.size() == 2);
  CHECK(curve.rows[0].ar[0] == doctest::Approx(0.5));
  CHECK(curve.rows[0].drop[0] == doctest::Approx(0.5));
  CHECK(curve.rows[1].ar[0] == doctest::Approx(1.0));
  CHECK(curve.rows[1].drop[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(propgen::sufficiency_eval({}, target, cfg, nullptr), propgen::ConfigError);
}

TEST_CASE("necessity removes the most similar source inside the pool") {
  std::vector<ImageRecord> images = {{1, 100, 100}};
  std::vector<ClassInfo> classes = {{1, "x"}};
  std::vector<Annotation> anns = {{1, 1, 0, box_from_xywh(0, 0, 10, 10)},
                                  {2, 1, 0, box_from_xywh(30, 30, 10, 10)}};
  const Dataset target(images, classes, anns);

  const ProposalSet props = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, "a"},
      {1, box_from_xywh(30, 30, 10, 10), 0.8, "a"},
      {1, box_from_xywh(60, 60, 10, 10), 0.7, "a"},
      {1, box_from_xywh(0, 0, 10, 10), 0.6, "b"},
  });

  // s(x, a) = 0.9, s(x, b) = 0.1.
  propgen::ApTable table;
  table.classes = {"a", "b", "x"};
  table.values.assign(9, 0.0);
  auto set_v = [&](int i, int j, double v) { table.values[i * 3 + j] = v; };
  set_v(0, 0, 0.5);
  set_v(1, 1, 0.5);
  set_v(2, 2, 0.5);
  set_v(0, 2, 0.45);  // a finds x well
  set_v(1, 2, 0.05);
  const propgen::SimilarityMatrix sim = propgen::similarity_matrix(table);

  propgen::ProtoSelection selection;
  selection.method = "manual";
  selection.p = 2;
  selection.classes = {"a", "b"};

  MetricConfig cfg;
  cfg.ar_k_values = {10};
  const propgen::NecessityResult result =
      propgen::necessity_eval(props, target, sim, selection, cfg);
  REQUIRE(result.per_class.size() == 1);
  const propgen::NecessityClassRow& row = result.per_class[0];
  CHECK(row.target_class == "x");
  CHECK(row.removed_class == "a");
  CHECK(row.ar_before[0] == doctest::Approx(1.0));
  CHECK(row.ar_after[0] == doctest::Approx(0.5));  // only the b proposal is left
  CHECK(row.rel_change[0] == doctest::Approx(0.5));
  CHECK_FALSE(row.excluded);
  CHECK(result.mean_rel_change[0] == doctest::Approx(0.5));
}

TEST_CASE("necessity change stays in the unit interval without refill") {
  // The pool cut happens before removal: a covering proposal below the cut
  // must not slide in after the removal, or the change could go negative.
  std::vector<ImageRecord> images = {{1, 100, 100}};
  std::vector<ClassInfo> classes = {{1, "x"}};
  std::vector<Annotation> anns = {{1, 1, 0, box_from_xywh(0, 0, 10, 10)}};
  const Dataset target(images, classes, anns);

  const ProposalSet props = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, "a"},   // covering, removed
      {1, box_from_xywh(50, 50, 10, 10), 0.8, "b"}, // in pool, useless
      {1, box_from_xywh(0, 0, 10, 10), 0.7, "b"},   // covering, below the k=2 cut
  });

  propgen::ApTable table;
  table.classes = {"a", "b", "x"};
  table.values.assign(9, 0.0);
  auto set_v = [&](int i, int j, double v) { table.values[i * 3 + j] = v; };
  set_v(0, 0, 0.5);
  set_v(1, 1, 0.5);
  set_v(2, 2, 0.5);
  set_v(0, 2, 0.45);
  const propgen::SimilarityMatrix sim = propgen::similarity_matrix(table);
  propgen::ProtoSelection selection;
  selection.classes = {"a", "b"};

  MetricConfig cfg;
  cfg.ar_k_values = {2};
  const propgen::NecessityResult result =
      propgen::necessity_eval(props, target, sim, selection, cfg);
  REQUIRE(result.per_class.size() == 1);
  // After removal the pool holds only the useless b proposal: AR falls to 0,
  // the covering b proposal below the cut never refills.
  CHECK(result.per_class[0].ar_before[0] == doctest::Approx(1.0));
  CHECK(result.per_class[0].ar_after[0] == doctest::Approx(0.0));
  CHECK(result.per_class[0].rel_change[0] == doctest::Approx(1.0));
}

TEST_CASE("necessity excludes classes invisible before removal") {
  std::vector<ImageRecord> images = {{1, 100, 100}};
  std::vector<ClassInfo> classes = {{1, "x"}, {2, "y"}};
  std::vector<Annotation> anns = {{1, 1, 0, box_from_xywh(0, 0, 10, 10)},
                                  {2, 1, 1, box_from_xywh(80, 80, 10, 10)}};
  const Dataset target(images, classes, anns);
  const ProposalSet props = make_set({{1, box_from_xywh(0, 0, 10, 10), 0.9, "a"}});

  propgen::ApTable table;
  table.classes = {"a", "x", "y"};
  table.values.assign(9, 0.0);
  auto set_v = [&](int i, int j, double v) { table.values[i * 3 + j] = v; };
  set_v(0, 0, 0.5);
  set_v(1, 1, 0.5);
  set_v(2, 2, 0.5);
  set_v(0, 1, 0.4);
  set_v(0, 2, 0.4);
  const propgen::SimilarityMatrix sim = propgen::similarity_matrix(table);
  propgen::ProtoSelection selection;
  selection.classes = {"a"};

  MetricConfig cfg;
  cfg.ar_k_values = {5};
  const propgen::NecessityResult result =
      propgen::necessity_eval(props, target, sim, selection, cfg);
  REQUIRE(result.per_class.size() == 2);
  CHECK(result.excluded_classes == std::vector<std::string>{"y"});
  CHECK(result.per_class[1].excluded);
  // The mean skips the excluded class instead of averaging in a zero.
  CHECK(result.mean_rel_change[0] == doctest::Approx(1.0));
}

TEST_CASE("pseudo ground truth role bands") {
  WeakLabelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  WeakLabelConfig bad;
  bad.ignore_iou_low = 0.8;
  CHECK_THROWS_AS(bad.validate(), propgen::ConfigError);

  // Anchor 20x20 at origin; overlaps engineered per band.
  const propgen::Box anchor = box_from_xywh(0, 0, 20, 20);
  const propgen::Box positive = box_from_xywh(1, 0, 20, 20);   // IoU ~0.905
  const propgen::Box ignored = box_from_xywh(0, 6, 20, 20);    // IoU ~0.538
  const propgen::Box negative = box_from_xywh(12, 12, 20, 20); // IoU ~0.087
  const ProposalSet props = make_set({
      {1, anchor, 0.9, "a"},
      {1, positive, 0.8, "a"},
      {1, ignored, 0.7, "a"},
      {1, negative, 0.6, "a"},
  });
  const propgen::PseudoGtResult result =
      propgen::pseudo_ground_truth(props, {{1, {"cat"}}}, WeakLabelConfig{});
  REQUIRE(result.entries.size() == 1);
  const propgen::PseudoGtEntry& e = result.entries[0];
  CHECK(e.anchor_index == 0);
  REQUIRE(e.roles.size() == 4);
  CHECK(e.roles[0] == ProposalRole::kAnchor);
  CHECK(e.roles[1] == ProposalRole::kPositive);
  CHECK(e.roles[2] == ProposalRole::kIgnored);
  CHECK(e.roles[3] == ProposalRole::kNegative);
}

TEST_CASE("pseudo ground truth anchors inside the candidate pool only") {
  // Pool of 2: the best-scoring proposal outside the pool cannot anchor.
  const ProposalSet props = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, "a"},
      {1, box_from_xywh(30, 30, 10, 10), 0.8, "a"},
      {1, box_from_xywh(60, 60, 10, 10), 0.7, "a"},
  });
  WeakLabelConfig cfg;
  cfg.candidate_pool = 2;
  const propgen::PseudoGtResult result =
      propgen::pseudo_ground_truth(props, {{1, {"cat"}}}, cfg);
  REQUIRE(result.entries.size() == 1);
  CHECK(result.entries[0].anchor_index == 0);
  // Proposals beyond the pool still get graded against the anchor.
  CHECK(result.entries[0].roles.size() == 3);
  CHECK(result.entries[0].roles[2] == ProposalRole::kNegative);
}

TEST_CASE("pseudo ground truth emits one entry per image-level class") {
  const ProposalSet props = make_set({{1, box_from_xywh(0, 0, 10, 10), 0.9, "a"}});
  const propgen::PseudoGtResult result =
      propgen::pseudo_ground_truth(props, {{1, {"dog", "cat", "cat"}}}, WeakLabelConfig{});
  REQUIRE(result.entries.size() == 2);  // duplicates collapse
  CHECK(result.entries[0].class_name == "cat");
  CHECK(result.entries[1].class_name == "dog");
}

TEST_CASE("pseudo ground truth warns on weakly labeled images without proposals") {
  const ProposalSet props = make_set({{1, box_from_xywh(0, 0, 10, 10), 0.9, "a"}});
  const propgen::PseudoGtResult result =
      propgen::pseudo_ground_truth(props, {{1, {"cat"}}, {9, {"dog"}}}, WeakLabelConfig{});
  CHECK(result.entries.size() == 1);
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("image 9") != std::string::npos);
}

TEST_CASE("granularity rows count classes and mark absent proposals") {
  const propgen::SemanticTree tree = propgen::SemanticTree::from_nodes({
      {0, "root", -1},
      {1, "animal", 0},
      {2, "cat", 1},
      {3, "dog", 1},
  });
  std::vector<ImageRecord> images = {{1, 100, 100}};
  std::vector<ClassInfo> classes = {{2, "cat"}, {3, "dog"}};
  std::vector<Annotation> anns = {{1, 1, 0, box_from_xywh(0, 0, 10, 10)},
                                  {2, 1, 1, box_from_xywh(30, 30, 10, 10)}};
  const Dataset data(images, classes, anns);

  const ProposalSet props = make_set({
      {1, box_from_xywh(0, 0, 10, 10), 0.9, ""},
      {1, box_from_xywh(30, 30, 10, 10), 0.8, ""},
  });
  std::map<int, const ProposalSet*> by_level = {{2, &props}};
  MetricConfig cfg;
  cfg.ar_k_values = {10};
  const propgen::GranularityReport report =
      propgen::granularity_study(data, tree, {0, 1, 2}, by_level, data, cfg);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].class_count == 1);
  CHECK(report.rows[1].class_count == 1);  // both leaves collapse to "animal"
  CHECK(report.rows[2].class_count == 2);
  CHECK_FALSE(report.rows[0].has_proposals);
  CHECK(report.rows[2].has_proposals);
  CHECK(report.rows[2].ar[0] == doctest::Approx(1.0));
}
