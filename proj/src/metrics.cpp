#include "propgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "propgen/errors.hpp"

namespace propgen {

using Json = nlohmann::json;

std::vector<double> MetricConfig::default_iou_thresholds() {
  std::vector<double> grid;
  for (int i = 0; i <= 9; ++i) grid.push_back(static_cast<double>(50 + 5 * i) / 100.0);
  return grid;
}

void MetricConfig::validate() const {
  if (iou_thresholds.empty()) throw ConfigError("metric config: empty IoU threshold grid");
  double prev = 0.0;
  for (double t : iou_thresholds) {
    if (!(t > 0.0 && t <= 1.0))
      throw ConfigError("metric config: IoU threshold " + std::to_string(t) + " outside (0, 1]");
    if (t <= prev) throw ConfigError("metric config: IoU thresholds must be strictly increasing");
    prev = t;
  }
  if (max_detections_per_image <= 0)
    throw ConfigError("metric config: max_detections must be positive");
  if (ar_k_values.empty()) throw ConfigError("metric config: empty k list");
  for (int k : ar_k_values)
    if (k <= 0) throw ConfigError("metric config: k values must be positive");
}

MatchResult greedy_match(std::span<const Box> gts, std::span<const ScoredBox> dets,
                         double threshold) {
  MatchResult result;
  result.threshold = threshold;
  result.det_to_gt.assign(dets.size(), -1);
  result.gt_covered.assign(gts.size(), false);

  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dets[a].score > dets[b].score; });

  for (int d : order) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (result.gt_covered[g]) continue;
      const double v = iou(dets[d].box, gts[g]);
      if (v < threshold) continue;
      if (best < 0 || v > best_iou) {  // IoU ties keep the lower GT index
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      result.det_to_gt[d] = best;
      result.gt_covered[best] = true;
    }
  }
  return result;
}

namespace {

// True-positive flags for one image's detections (already in rank order)
// against one class's GT boxes, at one threshold.
std::vector<bool> match_flags(const std::vector<Box>& gts, const std::vector<Box>& dets,
                              double threshold) {
  std::vector<bool> tp(dets.size(), false);
  std::vector<bool> used(gts.size(), false);
  for (size_t d = 0; d < dets.size(); ++d) {
    int best = -1;
    double best_iou = 0.0;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) continue;
      const double v = iou(dets[d], gts[g]);
      if (v < threshold) continue;
      if (best < 0 || v > best_iou) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[best] = true;
      tp[d] = true;
    }
  }
  return tp;
}

// 101-point interpolated AP from rank-ordered true-positive flags.
double interpolated_ap(const std::vector<bool>& tp, int64_t total_gt) {
  const size_t n = tp.size();
  std::vector<double> precision(n), recall(n);
  int64_t cum_tp = 0;
  for (size_t i = 0; i < n; ++i) {
    if (tp[i]) ++cum_tp;
    precision[i] = static_cast<double>(cum_tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(cum_tp) / static_cast<double>(total_gt);
  }
  // Precision envelope from the right: value at rank i becomes the best
  // precision achievable at recall >= recall[i].
  for (size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0.0;
  size_t idx = 0;
  for (int m = 0; m <= 100; ++m) {
    const double r = static_cast<double>(m) / 100.0;
    while (idx < n && recall[idx] < r) ++idx;
    if (idx < n) sum += precision[idx];
  }
  return sum / 101.0;
}

struct RankedDetections {
  // Per image: detection boxes in (score desc, stable) order, capped.
  std::map<int64_t, std::vector<Box>> by_image;
  // Pooled rank order as (image_id, in-image rank) pairs.
  std::vector<std::pair<int64_t, int>> pooled;
};

RankedDetections rank_detections(const std::vector<Detection>& dets, int cap) {
  RankedDetections ranked;
  std::map<int64_t, std::vector<int>> idx_by_image;
  for (size_t i = 0; i < dets.size(); ++i)
    idx_by_image[dets[i].image_id].push_back(static_cast<int>(i));

  struct PoolEntry {
    double score;
    int64_t image_id;
    int rank;
  };
  std::vector<PoolEntry> pool;
  for (auto& [image_id, idxs] : idx_by_image) {
    std::stable_sort(idxs.begin(), idxs.end(),
                     [&](int a, int b) { return dets[a].score > dets[b].score; });
    if (static_cast<int>(idxs.size()) > cap) idxs.resize(cap);
    auto& boxes = ranked.by_image[image_id];
    for (size_t r = 0; r < idxs.size(); ++r) {
      boxes.push_back(dets[idxs[r]].box);
      pool.push_back(PoolEntry{dets[idxs[r]].score, image_id, static_cast<int>(r)});
    }
  }
  // Pooled ranking: score descending; ties keep (image id, in-image rank)
  // order, which the construction above already provides.
  std::stable_sort(pool.begin(), pool.end(),
                   [](const PoolEntry& a, const PoolEntry& b) { return a.score > b.score; });
  for (const PoolEntry& e : pool) ranked.pooled.emplace_back(e.image_id, e.rank);
  return ranked;
}

}  // namespace

std::optional<double> average_precision(const std::vector<GtInstance>& gts,
                                        const std::vector<Detection>& dets,
                                        const MetricConfig& config) {
  config.validate();
  if (gts.empty()) return std::nullopt;  // undefined, distinct from 0

  std::map<int64_t, std::vector<Box>> gt_by_image;
  for (const GtInstance& g : gts) gt_by_image[g.image_id].push_back(g.box);

  const RankedDetections ranked = rank_detections(dets, config.max_detections_per_image);
  static const std::vector<Box> kNoBoxes;

  double sum = 0.0;
  for (double threshold : config.iou_thresholds) {
    // Per-image matching, then true-positive flags read off in pooled order.
    std::map<int64_t, std::vector<bool>> flags;
    for (const auto& [image_id, boxes] : ranked.by_image) {
      auto it = gt_by_image.find(image_id);
      flags[image_id] = match_flags(it == gt_by_image.end() ? kNoBoxes : it->second, boxes,
                                    threshold);
    }
    std::vector<bool> tp;
    tp.reserve(ranked.pooled.size());
    for (const auto& [image_id, rank] : ranked.pooled) tp.push_back(flags[image_id][rank]);
    sum += interpolated_ap(tp, static_cast<int64_t>(gts.size()));
  }
  return sum / static_cast<double>(config.iou_thresholds.size());
}

namespace {

struct PerClassData {
  std::vector<std::vector<GtInstance>> gts;    // per class index
  std::vector<std::vector<Detection>> dets;    // per class index
};

PerClassData split_by_class(const Dataset& gt, const std::vector<Detection>& dets) {
  PerClassData data;
  const size_t n = gt.classes().size();
  data.gts.resize(n);
  data.dets.resize(n);
  for (const Annotation& a : gt.annotations())
    data.gts[a.class_idx].push_back(GtInstance{a.image_id, a.box});
  for (const Detection& d : dets) {
    if (d.class_idx < 0 || d.class_idx >= static_cast<int>(n))
      throw ValidationError("detection with class index outside the dataset class table");
    data.dets[d.class_idx].push_back(d);
  }
  return data;
}

}  // namespace

ApTable compute_ap_table(const Dataset& gt, const std::vector<Detection>& dets,
                         const MetricConfig& config) {
  config.validate();
  ApTable table;
  table.config = config;
  for (const ClassInfo& c : gt.classes()) table.classes.push_back(c.name);

  const PerClassData data = split_by_class(gt, dets);
  const size_t n = table.classes.size();
  table.values.assign(n * n, std::nullopt);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      table.values[i * n + j] = average_precision(data.gts[j], data.dets[i], config);
  return table;
}

std::optional<double> cross_class_ap(const Dataset& gt, const std::vector<Detection>& dets,
                                     const std::string& det_class, const std::string& gt_class,
                                     const MetricConfig& config) {
  const int i = gt.class_index(det_class);
  const int j = gt.class_index(gt_class);
  if (i < 0) throw ValidationError("unknown detection class '" + det_class + "'");
  if (j < 0) throw ValidationError("unknown ground-truth class '" + gt_class + "'");

  std::vector<GtInstance> gts;
  for (const Annotation& a : gt.annotations())
    if (a.class_idx == j) gts.push_back(GtInstance{a.image_id, a.box});
  std::vector<Detection> class_dets;
  for (const Detection& d : dets)
    if (d.class_idx == i) class_dets.push_back(d);
  return average_precision(gts, class_dets, config);
}

double ArTable::ar_at(int k) const {
  for (size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return ar[i];
  throw ConfigError("AR table has no entry for k = " + std::to_string(k));
}

ArTable average_recall(const Dataset& gt, const ProposalsByImage& proposals,
                       const MetricConfig& config) {
  config.validate();
  if (gt.annotations().empty())
    throw ValidationError("average_recall: dataset has no ground-truth boxes");

  ArTable table;
  table.ks = config.ar_k_values;
  std::sort(table.ks.begin(), table.ks.end());
  table.ks.erase(std::unique(table.ks.begin(), table.ks.end()), table.ks.end());
  table.thresholds = config.iou_thresholds;
  table.total_gt = static_cast<int64_t>(gt.annotations().size());

  const size_t num_ks = table.ks.size();
  const size_t num_ts = table.thresholds.size();

  // best_at_k[a][ki]: best IoU of annotation a over the top-k proposals of
  // its image. Computed incrementally as the rank cut grows.
  std::vector<std::vector<double>> best_at_k(gt.annotations().size(),
                                             std::vector<double>(num_ks, 0.0));
  for (const ImageRecord& im : gt.images()) {
    const std::vector<int>& ann_idx = gt.annotations_of(im.id);
    if (ann_idx.empty()) continue;
    auto it = proposals.find(im.id);
    if (it == proposals.end()) continue;

    std::vector<int> order(it->second.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return it->second[a].score > it->second[b].score;
    });

    std::vector<double> running(ann_idx.size(), 0.0);
    size_t rank = 0;
    for (size_t ki = 0; ki < num_ks; ++ki) {
      const size_t cut = std::min(order.size(), static_cast<size_t>(table.ks[ki]));
      for (; rank < cut; ++rank) {
        const Box& p = it->second[order[rank]].box;
        for (size_t a = 0; a < ann_idx.size(); ++a) {
          const double v = iou(p, gt.annotations()[ann_idx[a]].box);
          if (v > running[a]) running[a] = v;
        }
      }
      for (size_t a = 0; a < ann_idx.size(); ++a) best_at_k[ann_idx[a]][ki] = running[a];
    }
  }

  table.recall.assign(num_ks, std::vector<double>(num_ts, 0.0));
  table.ar.assign(num_ks, 0.0);
  for (size_t ki = 0; ki < num_ks; ++ki) {
    for (size_t ti = 0; ti < num_ts; ++ti) {
      int64_t covered = 0;
      for (size_t a = 0; a < best_at_k.size(); ++a)
        if (best_at_k[a][ki] >= table.thresholds[ti]) ++covered;
      table.recall[ki][ti] = static_cast<double>(covered) / static_cast<double>(table.total_gt);
    }
    table.ar[ki] = std::accumulate(table.recall[ki].begin(), table.recall[ki].end(), 0.0) /
                   static_cast<double>(num_ts);
  }

  // Per-class breakdown over classes with ground truth.
  std::vector<std::vector<int>> anns_of_class(gt.classes().size());
  for (size_t a = 0; a < gt.annotations().size(); ++a)
    anns_of_class[gt.annotations()[a].class_idx].push_back(static_cast<int>(a));
  for (size_t c = 0; c < gt.classes().size(); ++c) {
    if (anns_of_class[c].empty()) continue;
    table.class_names.push_back(gt.classes()[c].name);
    table.class_gt_counts.push_back(static_cast<int64_t>(anns_of_class[c].size()));
    std::vector<double> class_ar(num_ks, 0.0);
    for (size_t ki = 0; ki < num_ks; ++ki) {
      double sum = 0.0;
      for (size_t ti = 0; ti < num_ts; ++ti) {
        int64_t covered = 0;
        for (int a : anns_of_class[c])
          if (best_at_k[a][ki] >= table.thresholds[ti]) ++covered;
        sum += static_cast<double>(covered) / static_cast<double>(anns_of_class[c].size());
      }
      class_ar[ki] = sum / static_cast<double>(num_ts);
    }
    table.class_ar.push_back(std::move(class_ar));
  }
  table.class_mean_ar.assign(num_ks, 0.0);
  if (!table.class_names.empty()) {
    for (size_t ki = 0; ki < num_ks; ++ki) {
      double sum = 0.0;
      for (const auto& class_ar : table.class_ar) sum += class_ar[ki];
      table.class_mean_ar[ki] = sum / static_cast<double>(table.class_ar.size());
    }
  }
  return table;
}

std::vector<Detection> detections_from_json(const std::string& text, const Dataset& data) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("detections file must be a list");

  std::map<int64_t, int> by_coco;
  for (size_t i = 0; i < data.classes().size(); ++i)
    by_coco[data.classes()[i].coco_id] = static_cast<int>(i);

  std::vector<Detection> dets;
  std::vector<std::string> issues;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& dj = j[i];
    Detection d;
    if (!dj.contains("image_id") || !dj["image_id"].is_number())
      throw ParseError("detection index " + std::to_string(i) + " without image_id");
    d.image_id = dj["image_id"].get<int64_t>();
    if (!data.has_image(d.image_id))
      issues.push_back("detection index " + std::to_string(i) + " references missing image " +
                       std::to_string(d.image_id));
    if (!dj.contains("category_id") || !dj["category_id"].is_number())
      throw ParseError("detection index " + std::to_string(i) + " without category_id");
    const int64_t cat = dj["category_id"].get<int64_t>();
    auto it = by_coco.find(cat);
    if (it == by_coco.end())
      issues.push_back("unknown category_id " + std::to_string(cat) + " at detection index " +
                       std::to_string(i));
    else
      d.class_idx = it->second;
    if (!dj.contains("bbox") || !dj["bbox"].is_array() || dj["bbox"].size() != 4)
      throw ParseError("detection index " + std::to_string(i) + " has no 4-element bbox");
    d.box = box_from_xywh(dj["bbox"][0].get<double>(), dj["bbox"][1].get<double>(),
                          dj["bbox"][2].get<double>(), dj["bbox"][3].get<double>());
    if (!d.box.valid()) issues.push_back("degenerate box at index " + std::to_string(i));
    if (!dj.contains("score") || !dj["score"].is_number())
      throw ParseError("detection index " + std::to_string(i) + " without score");
    d.score = dj["score"].get<double>();
    if (!std::isfinite(d.score) || d.score < 0.0)
      issues.push_back("detection index " + std::to_string(i) + " has invalid score");
    dets.push_back(d);
  }
  if (!issues.empty()) {
    std::ostringstream out;
    for (size_t i = 0; i < issues.size(); ++i) out << (i ? "; " : "") << issues[i];
    throw ValidationError(out.str());
  }
  return dets;
}

std::vector<Detection> load_detections(const std::string& path, const Dataset& data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open detections file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return detections_from_json(buf.str(), data);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string detections_to_json(const std::vector<Detection>& dets, const Dataset& data) {
  Json j = Json::array();
  for (const Detection& d : dets) {
    const auto bb = box_to_xywh(d.box);
    j.push_back(Json{{"image_id", d.image_id},
                     {"category_id", data.classes().at(d.class_idx).coco_id},
                     {"bbox", Json::array({bb[0], bb[1], bb[2], bb[3]})},
                     {"score", d.score}});
  }
  return j.dump(2) + "\n";
}

void save_detections(const std::vector<Detection>& dets, const Dataset& data,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write detections file: " + path);
  out << detections_to_json(dets, data);
}

}  // namespace propgen
