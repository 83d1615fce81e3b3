#include "propgen/study.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

void BudgetConfig::validate() const {
  if (image_budget <= 0) throw ConfigError("budget config: image_budget must be positive");
  if (box_budget <= 0) throw ConfigError("budget config: box_budget must be positive");
}

BudgetedDataset build_budgeted_dataset(const Dataset& data,
                                       const std::vector<std::string>& selection,
                                       const BudgetConfig& config) {
  config.validate();
  if (selection.empty()) throw ConfigError("budgeted dataset: empty class selection");

  std::set<int> selected;
  for (const std::string& name : selection) {
    const int idx = data.class_index(name);
    if (idx < 0)
      throw ValidationError("budgeted dataset: selection class '" + name +
                            "' is not in the dataset");
    selected.insert(idx);
  }

  const Rng base(config.seed);

  std::vector<int64_t> eligible;
  for (const ImageRecord& im : data.images()) {
    for (int a : data.annotations_of(im.id)) {
      if (selected.count(data.annotations()[a].class_idx)) {
        eligible.push_back(im.id);
        break;
      }
    }
  }

  BudgetedDataset result;
  result.eligible_images = static_cast<int64_t>(eligible.size());

  std::vector<int64_t> kept_images;
  if (static_cast<int64_t>(eligible.size()) > config.image_budget) {
    Rng stream = base.substream("images");
    for (size_t idx :
         sample_indices(eligible.size(), static_cast<size_t>(config.image_budget), stream))
      kept_images.push_back(eligible[idx]);
  } else {
    kept_images = eligible;
    result.under_budget_images = static_cast<int64_t>(eligible.size()) < config.image_budget;
  }
  const std::set<int64_t> kept_set(kept_images.begin(), kept_images.end());

  // Selected-class boxes inside surviving images, in annotation order.
  std::vector<int> candidate_anns;
  for (size_t i = 0; i < data.annotations().size(); ++i) {
    const Annotation& a = data.annotations()[i];
    if (kept_set.count(a.image_id) && selected.count(a.class_idx))
      candidate_anns.push_back(static_cast<int>(i));
  }
  result.eligible_boxes = static_cast<int64_t>(candidate_anns.size());

  std::vector<int> kept_anns;
  if (static_cast<int64_t>(candidate_anns.size()) > config.box_budget) {
    Rng stream = base.substream("boxes");
    for (size_t idx :
         sample_indices(candidate_anns.size(), static_cast<size_t>(config.box_budget), stream))
      kept_anns.push_back(candidate_anns[idx]);
  } else {
    kept_anns = candidate_anns;
    result.under_budget_boxes = static_cast<int64_t>(candidate_anns.size()) < config.box_budget;
  }

  std::vector<ImageRecord> images;
  for (const ImageRecord& im : data.images())
    if (kept_set.count(im.id)) images.push_back(im);
  std::vector<Annotation> anns;
  anns.reserve(kept_anns.size());
  for (int i : kept_anns) anns.push_back(data.annotations()[i]);
  result.dataset = Dataset(std::move(images), data.classes(), std::move(anns));
  return result;
}

SufficiencyCurve sufficiency_eval(const std::vector<SufficiencyCondition>& conditions,
                                  const Dataset& target, const MetricConfig& config,
                                  const ProposalSet* baseline) {
  config.validate();
  if (conditions.empty()) throw ConfigError("sufficiency: no conditions");

  SufficiencyCurve curve;
  if (baseline != nullptr) {
    const ArTable table = average_recall(target, baseline->for_evaluation(), config);
    curve.ks = table.ks;
    curve.baseline_ar = table.ar;
    curve.has_baseline = true;
  }
  for (const SufficiencyCondition& cond : conditions) {
    if (cond.proposals == nullptr)
      throw ConfigError("sufficiency: condition '" + cond.method + "' without proposals");
    const ArTable table = average_recall(target, cond.proposals->for_evaluation(), config);
    if (curve.ks.empty()) curve.ks = table.ks;
    SufficiencyRow row;
    row.method = cond.method;
    row.p = cond.p;
    row.ar = table.ar;
    if (curve.has_baseline) {
      for (size_t i = 0; i < table.ar.size(); ++i)
        row.drop.push_back(curve.baseline_ar[i] - table.ar[i]);
    }
    curve.rows.push_back(std::move(row));
  }
  return curve;
}

namespace {

// Per-class AR over the reported ks, with proposals of one provenance class
// removed inside each top-k pool (no refill from below the cut). An empty
// `removed` evaluates the untouched pool.
std::vector<double> class_ar_with_removal(const ProposalSet& proposals, const Dataset& target,
                                          int class_idx, const std::string& removed,
                                          const std::vector<int>& ks,
                                          const std::vector<double>& thresholds) {
  std::map<int64_t, std::vector<const Annotation*>> gt_by_image;
  int64_t total_gt = 0;
  for (const Annotation& a : target.annotations()) {
    if (a.class_idx != class_idx) continue;
    gt_by_image[a.image_id].push_back(&a);
    ++total_gt;
  }
  std::vector<double> ar(ks.size(), 0.0);
  if (total_gt == 0) return ar;

  std::vector<std::vector<double>> best(ks.size());  // [ki][gt slot]
  for (auto& row : best) row.reserve(total_gt);

  for (const auto& [image_id, gts] : gt_by_image) {
    std::vector<double> running(gts.size(), 0.0);
    auto it = proposals.images().find(image_id);
    size_t rank = 0;
    for (size_t ki = 0; ki < ks.size(); ++ki) {
      if (it != proposals.images().end()) {
        const auto& list = it->second;  // sorted by descending score
        const size_t cut = std::min(list.size(), static_cast<size_t>(ks[ki]));
        for (; rank < cut; ++rank) {
          const Proposal& p = list[rank];
          if (!removed.empty() && proposals.source_name(p.source) == removed) continue;
          for (size_t g = 0; g < gts.size(); ++g) {
            const double v = iou(p.box, gts[g]->box);
            if (v > running[g]) running[g] = v;
          }
        }
      }
      for (double v : running) best[ki].push_back(v);
    }
  }

  for (size_t ki = 0; ki < ks.size(); ++ki) {
    double sum = 0.0;
    for (double t : thresholds) {
      int64_t covered = 0;
      for (double v : best[ki])
        if (v >= t) ++covered;
      sum += static_cast<double>(covered) / static_cast<double>(total_gt);
    }
    ar[ki] = sum / static_cast<double>(thresholds.size());
  }
  return ar;
}

}  // namespace

NecessityResult necessity_eval(const ProposalSet& proposals, const Dataset& target,
                               const SimilarityMatrix& sim, const ProtoSelection& selection,
                               const MetricConfig& config) {
  config.validate();
  if (selection.classes.empty()) throw ConfigError("necessity: empty selection");

  NecessityResult result;
  result.ks = config.ar_k_values;
  std::sort(result.ks.begin(), result.ks.end());
  result.ks.erase(std::unique(result.ks.begin(), result.ks.end()), result.ks.end());

  std::vector<double> sums(result.ks.size(), 0.0);
  std::vector<int64_t> counts(result.ks.size(), 0);

  for (size_t c = 0; c < target.classes().size(); ++c) {
    bool has_gt = false;
    for (const Annotation& a : target.annotations())
      if (a.class_idx == static_cast<int>(c)) {
        has_gt = true;
        break;
      }
    if (!has_gt) continue;

    NecessityClassRow row;
    row.target_class = target.classes()[c].name;
    row.removed_class = most_similar_class(sim, row.target_class, selection.classes);
    row.ar_before = class_ar_with_removal(proposals, target, static_cast<int>(c), "", result.ks,
                                          config.iou_thresholds);
    row.ar_after = class_ar_with_removal(proposals, target, static_cast<int>(c),
                                         row.removed_class, result.ks, config.iou_thresholds);
    row.rel_change.assign(result.ks.size(), 0.0);
    for (size_t ki = 0; ki < result.ks.size(); ++ki) {
      if (row.ar_before[ki] > 0.0) {
        row.rel_change[ki] = (row.ar_before[ki] - row.ar_after[ki]) / row.ar_before[ki];
        sums[ki] += row.rel_change[ki];
        ++counts[ki];
      } else {
        row.excluded = true;
      }
    }
    if (row.excluded) result.excluded_classes.push_back(row.target_class);
    result.per_class.push_back(std::move(row));
  }

  result.mean_rel_change.assign(result.ks.size(), 0.0);
  for (size_t ki = 0; ki < result.ks.size(); ++ki)
    if (counts[ki] > 0) result.mean_rel_change[ki] = sums[ki] / static_cast<double>(counts[ki]);
  return result;
}

GranularityReport granularity_study(const Dataset& source, const SemanticTree& tree,
                                    const std::vector<int>& levels,
                                    const std::map<int, const ProposalSet*>& proposals_by_level,
                                    const Dataset& target, const MetricConfig& config) {
  config.validate();
  if (levels.empty()) throw ConfigError("granularity: no levels");

  GranularityReport report;
  report.ks = config.ar_k_values;
  std::sort(report.ks.begin(), report.ks.end());
  report.ks.erase(std::unique(report.ks.begin(), report.ks.end()), report.ks.end());

  for (int level : levels) {
    GranularityRow row;
    row.level = level;
    row.class_count = relabel_to_level(source, tree, level).class_count;
    auto it = proposals_by_level.find(level);
    if (it != proposals_by_level.end() && it->second != nullptr) {
      row.has_proposals = true;
      row.ar = average_recall(target, it->second->for_evaluation(), config).ar;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void WeakLabelConfig::validate() const {
  if (candidate_pool <= 0) throw ConfigError("weak label config: candidate_pool must be positive");
  if (!(ignore_iou_low > 0.0 && ignore_iou_low < positive_iou && positive_iou <= 1.0))
    throw ConfigError("weak label config: need 0 < ignore_iou_low < positive_iou <= 1");
}

PseudoGtResult pseudo_ground_truth(const ProposalSet& proposals,
                                   const std::map<int64_t, std::vector<std::string>>& weak_labels,
                                   const WeakLabelConfig& config) {
  config.validate();
  PseudoGtResult result;

  for (const auto& [image_id, raw_classes] : weak_labels) {
    std::vector<std::string> classes = raw_classes;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.empty()) continue;

    auto it = proposals.images().find(image_id);
    if (it == proposals.images().end() || it->second.empty()) {
      std::ostringstream msg;
      msg << "image " << image_id << " has weak labels but no proposals";
      result.warnings.push_back(msg.str());
      continue;
    }
    const std::vector<Proposal>& list = it->second;

    // Anchor: best-scoring proposal inside the candidate pool (the list is
    // already score-ordered; the scan guards against unsorted edits).
    const size_t pool = std::min(list.size(), static_cast<size_t>(config.candidate_pool));
    size_t anchor = 0;
    for (size_t i = 1; i < pool; ++i)
      if (list[i].score > list[anchor].score) anchor = i;

    for (const std::string& class_name : classes) {
      PseudoGtEntry entry;
      entry.image_id = image_id;
      entry.class_name = class_name;
      entry.anchor_index = static_cast<int>(anchor);
      entry.roles.assign(list.size(), ProposalRole::kNegative);
      for (size_t i = 0; i < list.size(); ++i) {
        if (i == anchor) {
          entry.roles[i] = ProposalRole::kAnchor;
          continue;
        }
        const double v = iou(list[i].box, list[anchor].box);
        if (v > config.positive_iou)
          entry.roles[i] = ProposalRole::kPositive;
        else if (v > config.ignore_iou_low)
          entry.roles[i] = ProposalRole::kIgnored;
      }
      result.entries.push_back(std::move(entry));
    }
  }
  return result;
}

}  // namespace propgen
