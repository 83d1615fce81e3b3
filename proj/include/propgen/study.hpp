#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/fusion.hpp"
#include "propgen/metrics.hpp"
#include "propgen/selection.hpp"
#include "propgen/similarity.hpp"
#include "propgen/tree.hpp"

namespace propgen {

struct BudgetConfig {
  int64_t image_budget = 0;
  int64_t box_budget = 0;
  uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct BudgetedDataset {
  Dataset dataset;
  int64_t eligible_images = 0;  // images with >= 1 selected-class box
  int64_t eligible_boxes = 0;   // selected-class boxes inside kept images
  bool under_budget_images = false;
  bool under_budget_boxes = false;
};

// Comparable training sets under a fixed labeling budget: keep images holding
// at least one selected-class box, subsample them to image_budget, drop boxes
// outside the selection, subsample the rest to box_budget. Uniform seeded
// subsampling; hitting the budget exactly whenever the data suffices,
// otherwise flagged, never rejected.
BudgetedDataset build_budgeted_dataset(const Dataset& data,
                                       const std::vector<std::string>& selection,
                                       const BudgetConfig& config);

struct SufficiencyCondition {
  std::string method;
  int p = 0;
  const ProposalSet* proposals = nullptr;
};

struct SufficiencyRow {
  std::string method;
  int p = 0;
  std::vector<double> ar;    // per k
  std::vector<double> drop;  // baseline minus ar, per k; empty without baseline
};

struct SufficiencyCurve {
  std::vector<int> ks;
  std::vector<SufficiencyRow> rows;
  bool has_baseline = false;
  std::vector<double> baseline_ar;  // per k
};

// AR of each condition's proposals on the target ground truth, plus the drop
// against an all-classes baseline when one is supplied.
SufficiencyCurve sufficiency_eval(const std::vector<SufficiencyCondition>& conditions,
                                  const Dataset& target, const MetricConfig& config,
                                  const ProposalSet* baseline);

struct NecessityClassRow {
  std::string target_class;
  std::string removed_class;
  std::vector<double> ar_before;   // per k
  std::vector<double> ar_after;    // per k
  std::vector<double> rel_change;  // per k; 0 slot when excluded at that k
  bool excluded = false;           // AR_before = 0 at some reported k
};

struct NecessityResult {
  std::vector<int> ks;
  std::vector<NecessityClassRow> per_class;
  std::vector<double> mean_rel_change;       // per k, over classes with AR_before > 0
  std::vector<std::string> excluded_classes;
};

// For every target class: delete, inside the already-chosen top-k pool, the
// proposals sourced from its most similar selected class, and report the
// relative per-class AR change. Removal never refills from below the cut, so
// the change is guaranteed to sit in [0, 1].
NecessityResult necessity_eval(const ProposalSet& proposals, const Dataset& target,
                               const SimilarityMatrix& sim, const ProtoSelection& selection,
                               const MetricConfig& config);

struct GranularityRow {
  int level = 0;
  int class_count = 0;       // distinct classes in use after relabeling
  bool has_proposals = false;
  std::vector<double> ar;    // per k; empty when absent
};

struct GranularityReport {
  std::vector<int> ks;
  std::vector<GranularityRow> rows;
};

// Label-granularity sweep: per level, the relabeled class count on the source
// data and, when a proposal file exists for that level, AR on the target
// ground truth. Missing levels are marked absent, not errors.
GranularityReport granularity_study(const Dataset& source, const SemanticTree& tree,
                                    const std::vector<int>& levels,
                                    const std::map<int, const ProposalSet*>& proposals_by_level,
                                    const Dataset& target, const MetricConfig& config);

struct WeakLabelConfig {
  int candidate_pool = 100;
  double positive_iou = 0.7;
  double ignore_iou_low = 0.5;

  void validate() const;  // throws ConfigError
};

enum class ProposalRole : uint8_t { kNegative = 0, kIgnored = 1, kPositive = 2, kAnchor = 3 };

struct PseudoGtEntry {
  int64_t image_id = 0;
  std::string class_name;
  int anchor_index = -1;                 // into the image's proposal list
  std::vector<ProposalRole> roles;       // aligned with the image's proposals
};

struct PseudoGtResult {
  std::vector<PseudoGtEntry> entries;
  std::vector<std::string> warnings;  // weakly labeled images with no proposals
};

// Weakly supervised pseudo ground truth: per image and per image-level class,
// anchor on the highest-scoring proposal of the candidate pool, then grade
// every proposal of the image against the anchor: IoU above positive_iou is a
// positive, in (ignore_iou_low, positive_iou] ignored, the rest negatives.
PseudoGtResult pseudo_ground_truth(const ProposalSet& proposals,
                                   const std::map<int64_t, std::vector<std::string>>& weak_labels,
                                   const WeakLabelConfig& config);

}  // namespace propgen
