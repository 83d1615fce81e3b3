#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/metrics.hpp"

namespace propgen {

enum class NmsMode { kPerClass, kCrossClass };

struct FusionConfig {
  double nms_threshold = 0.5;
  double score_threshold = 0.0;
  int per_image_cap = 1000;
  NmsMode mode = NmsMode::kPerClass;

  void validate() const;  // throws ConfigError
};

// Greedy non-maximum suppression over one image's scored boxes: walk in
// descending score order (input index breaks ties), keep a box iff its IoU
// with every kept box is <= threshold (suppression is strictly greater).
// Returns kept original indices in that processing order, so the result is
// score-ordered. Kept boxes are pairwise non-overlapping beyond the
// threshold, which makes a second pass at the same threshold a no-op.
std::vector<int> nms(const std::vector<ScoredBox>& boxes, double threshold);

struct Proposal {
  Box box;
  double score = 0.0;
  int32_t source = -1;  // index into ProposalSet::source_classes; -1 = none
};

// Class-agnostic proposals, grouped per image, each image's list sorted by
// descending score and truncated to the configured cap. The class a proposal
// was fused from survives as provenance for the necessity study.
class ProposalSet {
 public:
  std::map<int64_t, std::vector<Proposal>>& images() { return images_; }
  const std::map<int64_t, std::vector<Proposal>>& images() const { return images_; }

  const std::vector<std::string>& source_classes() const { return source_classes_; }
  int32_t intern_source(const std::string& name);
  const std::string& source_name(int32_t idx) const;  // "" for -1

  int64_t total_count() const;
  ProposalsByImage for_evaluation() const;

  // Keep per-image invariants after direct edits: sort by (score desc, stable)
  // and truncate to cap (no cap when <= 0).
  void normalize(int per_image_cap);

 private:
  std::vector<std::string> source_classes_;
  std::map<std::string, int32_t> source_index_;
  std::map<int64_t, std::vector<Proposal>> images_;
};

// Score filter, NMS (per source class or over the pooled set), pool, sort by
// descending score, cap per image. Detections must carry class indices valid
// for `classes_from`; an empty detection list gives an empty set.
ProposalSet fuse_detections_to_proposals(const Dataset& classes_from,
                                         const std::vector<Detection>& dets,
                                         const FusionConfig& config);

// One fusion per threshold, all other knobs shared.
std::vector<std::pair<double, ProposalSet>> nms_sweep(const Dataset& classes_from,
                                                      const std::vector<Detection>& dets,
                                                      const std::vector<double>& thresholds,
                                                      const FusionConfig& base);

// New set without proposals whose provenance matches `source_class`.
ProposalSet remove_by_source(const ProposalSet& set, const std::string& source_class);

// Proposal JSON: list of {image_id, bbox, score, source_class}.
std::string proposals_to_json(const ProposalSet& set);
ProposalSet proposals_from_json(const std::string& text);
void save_proposals(const ProposalSet& set, const std::string& path);
ProposalSet load_proposals(const std::string& path);

}  // namespace propgen
