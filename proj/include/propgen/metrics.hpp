#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/geometry.hpp"

namespace propgen {

// Shared evaluation knobs. The threshold grid defaults to 0.50:0.05:0.95.
// max_detections_per_image caps detections per image AND class before AP
// matching; ar_k_values are the proposal budgets AR is reported at.
struct MetricConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  int max_detections_per_image = 100;
  std::vector<int> ar_k_values = {10, 20, 50, 100, 1000};

  static std::vector<double> default_iou_thresholds();
  void validate() const;  // throws ConfigError
};

struct Detection {
  int64_t image_id = 0;
  int class_idx = -1;  // index into the owning dataset's class table; -1 = none
  Box box;
  double score = 0.0;
};

struct ScoredBox {
  Box box;
  double score = 0.0;
};

// One class's ground truth instance.
struct GtInstance {
  int64_t image_id = 0;
  Box box;
};

// Greedy one-to-one matching at a single IoU threshold: walk detections in
// descending score order (stable in input order on ties); each detection takes
// the unmatched GT with the highest IoU that clears the threshold, lower GT
// index winning IoU ties.
struct MatchResult {
  double threshold = 0.0;
  std::vector<int> det_to_gt;     // per input detection: matched GT index or -1
  std::vector<bool> gt_covered;   // per GT: matched by some detection
};
MatchResult greedy_match(std::span<const Box> gts, std::span<const ScoredBox> dets,
                         double threshold);

// Detection AP for one class over an image set: per-image/per-class cap, pooled
// ranking by score, greedy matching per threshold, 101-point interpolated
// precision/recall integration, mean over the threshold grid. No ground truth
// anywhere: nullopt (undefined, distinct from 0).
std::optional<double> average_precision(const std::vector<GtInstance>& gts,
                                        const std::vector<Detection>& dets,
                                        const MetricConfig& config);

// Square table of AP^i(j): detections of class i scored against ground truth
// of class j, detection labels ignored. The diagonal is ordinary per-class AP.
struct ApTable {
  std::vector<std::string> classes;               // sorted by name
  std::vector<std::optional<double>> values;      // row-major, [i * n + j]
  MetricConfig config;

  std::optional<double> at(size_t i, size_t j) const { return values[i * classes.size() + j]; }
  size_t size() const { return classes.size(); }
};

ApTable compute_ap_table(const Dataset& gt, const std::vector<Detection>& dets,
                         const MetricConfig& config);
std::optional<double> cross_class_ap(const Dataset& gt, const std::vector<Detection>& dets,
                                     const std::string& det_class,
                                     const std::string& gt_class,
                                     const MetricConfig& config);

// Proposals for AR evaluation: per-image scored boxes, any order.
using ProposalsByImage = std::map<int64_t, std::vector<ScoredBox>>;

// Recall of the top-k proposals per image. A GT instance counts as covered at
// threshold t iff its best IoU over those top-k is >= t (best-overlap
// coverage, not one-to-one matching: duplicated proposals change nothing).
// Recall pools instances over the dataset; AR@k averages recall over the
// threshold grid. The pooled number is the headline; a per-class breakdown
// and the class-mean AR are carried alongside.
struct ArTable {
  std::vector<int> ks;
  std::vector<double> thresholds;
  std::vector<std::vector<double>> recall;   // [k][threshold], pooled
  std::vector<double> ar;                    // [k]
  int64_t total_gt = 0;

  std::vector<std::string> class_names;      // classes with >= 1 GT, sorted
  std::vector<int64_t> class_gt_counts;
  std::vector<std::vector<double>> class_ar; // [class][k]
  std::vector<double> class_mean_ar;         // [k], mean over class_names

  double ar_at(int k) const;                 // throws ConfigError if k absent
};

ArTable average_recall(const Dataset& gt, const ProposalsByImage& proposals,
                       const MetricConfig& config);

// Detection results JSON: list of {image_id, category_id, bbox, score}.
// category_id is mapped through the dataset's class table.
std::vector<Detection> detections_from_json(const std::string& text, const Dataset& data);
std::vector<Detection> load_detections(const std::string& path, const Dataset& data);
std::string detections_to_json(const std::vector<Detection>& dets, const Dataset& data);
void save_detections(const std::vector<Detection>& dets, const Dataset& data,
                     const std::string& path);

}  // namespace propgen
