#include "oracles.hpp"

#include <algorithm>
#include <map>

namespace oracle {

using propgen::Box;
using propgen::Dataset;
using propgen::Detection;
using propgen::GtInstance;
using propgen::MetricConfig;
using propgen::ProposalsByImage;
using propgen::ScoredBox;

namespace {

struct RankedDet {
  int64_t image_id;
  Box box;
  double score;
};

// Per-image score ordering (ties keep input order) with the per-image cap,
// then one global list ordered by score with ties in (image, in-image rank)
// order.
std::vector<RankedDet> pooled_rank(const std::vector<Detection>& dets, int cap) {
  std::map<int64_t, std::vector<Detection>> per_image;
  for (const Detection& d : dets) per_image[d.image_id].push_back(d);

  std::vector<RankedDet> pooled;
  for (auto& [image_id, list] : per_image) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    const size_t keep = std::min<size_t>(list.size(), static_cast<size_t>(cap));
    for (size_t i = 0; i < keep; ++i) pooled.push_back({image_id, list[i].box, list[i].score});
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const RankedDet& a, const RankedDet& b) { return a.score > b.score; });
  return pooled;
}

}  // namespace

std::optional<double> brute_force_ap(const std::vector<GtInstance>& gts,
                                     const std::vector<Detection>& dets,
                                     const MetricConfig& config) {
  if (gts.empty()) return std::nullopt;
  std::map<int64_t, std::vector<Box>> gt_by_image;
  for (const GtInstance& g : gts) gt_by_image[g.image_id].push_back(g.box);

  const std::vector<RankedDet> pooled = pooled_rank(dets, config.max_detections_per_image);

  double threshold_sum = 0.0;
  for (double threshold : config.iou_thresholds) {
    // Greedy matching runs independently per image, walking that image's
    // detections from best to worst score.
    std::map<int64_t, std::vector<bool>> gt_taken;
    for (const auto& [image_id, boxes] : gt_by_image)
      gt_taken[image_id].assign(boxes.size(), false);

    std::vector<bool> tp(pooled.size(), false);
    std::map<int64_t, std::vector<size_t>> pooled_by_image;
    for (size_t i = 0; i < pooled.size(); ++i)
      pooled_by_image[pooled[i].image_id].push_back(i);
    for (auto& [image_id, idxs] : pooled_by_image) {
      std::stable_sort(idxs.begin(), idxs.end(), [&](size_t a, size_t b) {
        return pooled[a].score > pooled[b].score;
      });
      auto git = gt_by_image.find(image_id);
      if (git == gt_by_image.end()) continue;
      const std::vector<Box>& boxes = git->second;
      std::vector<bool>& taken = gt_taken[image_id];
      for (size_t idx : idxs) {
        int best = -1;
        double best_iou = 0.0;
        for (size_t g = 0; g < boxes.size(); ++g) {
          if (taken[g]) continue;
          const double v = propgen::iou(pooled[idx].box, boxes[g]);
          if (v < threshold) continue;
          if (best < 0 || v > best_iou) {
            best = static_cast<int>(g);
            best_iou = v;
          }
        }
        if (best >= 0) {
          taken[best] = true;
          tp[idx] = true;
        }
      }
    }

    // Raw precision/recall at every pooled rank.
    std::vector<double> precision(pooled.size()), recall(pooled.size());
    int64_t cum = 0;
    for (size_t i = 0; i < pooled.size(); ++i) {
      if (tp[i]) ++cum;
      precision[i] = static_cast<double>(cum) / static_cast<double>(i + 1);
      recall[i] = static_cast<double>(cum) / static_cast<double>(gts.size());
    }

    // 101-point average, each grid point scanned directly: the best raw
    // precision among ranks whose recall reaches the grid value.
    double grid_sum = 0.0;
    for (int m = 0; m <= 100; ++m) {
      const double r = static_cast<double>(m) / 100.0;
      double best = 0.0;
      bool any = false;
      for (size_t i = 0; i < pooled.size(); ++i) {
        if (recall[i] >= r) {
          any = true;
          best = std::max(best, precision[i]);
        }
      }
      grid_sum += any ? best : 0.0;
    }
    threshold_sum += grid_sum / 101.0;
  }
  return threshold_sum / static_cast<double>(config.iou_thresholds.size());
}

double brute_force_ar(const Dataset& gt, const ProposalsByImage& proposals, int k,
                      const std::vector<double>& thresholds) {
  int64_t total = 0;
  std::map<int64_t, std::vector<double>> best_iou_by_image;  // per GT of the image

  for (int64_t image_id : gt.image_ids()) {
    const std::vector<int>& ann_idx = gt.annotations_of(image_id);
    if (ann_idx.empty()) continue;
    total += static_cast<int64_t>(ann_idx.size());

    std::vector<ScoredBox> top;
    auto it = proposals.find(image_id);
    if (it != proposals.end()) {
      top = it->second;
      std::stable_sort(top.begin(), top.end(), [](const ScoredBox& a, const ScoredBox& b) {
        return a.score > b.score;
      });
      if (static_cast<int>(top.size()) > k) top.resize(static_cast<size_t>(k));
    }
    std::vector<double>& best = best_iou_by_image[image_id];
    for (int ai : ann_idx) {
      const Box& gt_box = gt.annotations()[ai].box;
      double b = 0.0;
      for (const ScoredBox& p : top) b = std::max(b, propgen::iou(p.box, gt_box));
      best.push_back(b);
    }
  }

  double sum = 0.0;
  for (double t : thresholds) {
    int64_t covered = 0;
    for (const auto& [image_id, bests] : best_iou_by_image)
      for (double b : bests)
        if (b >= t) ++covered;
    sum += static_cast<double>(covered) / static_cast<double>(total);
  }
  return sum / static_cast<double>(thresholds.size());
}

std::vector<int> reference_nms(const std::vector<ScoredBox>& boxes, double threshold) {
  std::vector<int> order(boxes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (boxes[a].score != boxes[b].score) return boxes[a].score > boxes[b].score;
    return a < b;
  });
  std::vector<int> kept;
  for (int i : order) {
    bool survives = true;
    for (int j : kept)
      if (propgen::iou(boxes[i].box, boxes[j].box) > threshold) {
        survives = false;
        break;
      }
    if (survives) kept.push_back(i);
  }
  return kept;
}

}  // namespace oracle
