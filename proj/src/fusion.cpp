#include "propgen/fusion.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "propgen/errors.hpp"

namespace propgen {

using Json = nlohmann::json;

void FusionConfig::validate() const {
  if (!(nms_threshold > 0.0 && nms_threshold <= 1.0))
    throw ConfigError("fusion config: nms_threshold outside (0, 1]");
  if (!(score_threshold >= 0.0))
    throw ConfigError("fusion config: score_threshold must be >= 0");
  if (per_image_cap <= 0) throw ConfigError("fusion config: per_image_cap must be positive");
}

std::vector<int> nms(const std::vector<ScoredBox>& boxes, double threshold) {
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return boxes[a].score > boxes[b].score; });

  std::vector<int> kept;
  for (int candidate : order) {
    bool suppressed = false;
    for (int k : kept) {
      if (iou(boxes[candidate].box, boxes[k].box) > threshold) {  // strictly greater
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

int32_t ProposalSet::intern_source(const std::string& name) {
  auto it = source_index_.find(name);
  if (it != source_index_.end()) return it->second;
  const int32_t idx = static_cast<int32_t>(source_classes_.size());
  source_classes_.push_back(name);
  source_index_[name] = idx;
  return idx;
}

const std::string& ProposalSet::source_name(int32_t idx) const {
  static const std::string kNone;
  if (idx < 0) return kNone;
  return source_classes_.at(idx);
}

int64_t ProposalSet::total_count() const {
  int64_t total = 0;
  for (const auto& [id, list] : images_) total += static_cast<int64_t>(list.size());
  return total;
}

ProposalsByImage ProposalSet::for_evaluation() const {
  ProposalsByImage out;
  for (const auto& [id, list] : images_) {
    auto& boxes = out[id];
    boxes.reserve(list.size());
    for (const Proposal& p : list) boxes.push_back(ScoredBox{p.box, p.score});
  }
  return out;
}

void ProposalSet::normalize(int per_image_cap) {
  for (auto& [id, list] : images_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Proposal& a, const Proposal& b) { return a.score > b.score; });
    if (per_image_cap > 0 && static_cast<int>(list.size()) > per_image_cap)
      list.resize(per_image_cap);
  }
}

ProposalSet fuse_detections_to_proposals(const Dataset& classes_from,
                                         const std::vector<Detection>& dets,
                                         const FusionConfig& config) {
  config.validate();
  ProposalSet out;
  if (dets.empty()) return out;

  // Provenance table mirrors the dataset class table (sorted names), so
  // source indices are stable no matter which classes survive.
  for (const ClassInfo& c : classes_from.classes()) out.intern_source(c.name);

  std::map<int64_t, std::vector<int>> by_image;
  for (size_t i = 0; i < dets.size(); ++i) {
    const Detection& d = dets[i];
    if (d.class_idx < 0 || d.class_idx >= static_cast<int>(classes_from.classes().size()))
      throw ValidationError("fuse: detection with class index outside the class table");
    if (d.score < config.score_threshold) continue;
    by_image[d.image_id].push_back(static_cast<int>(i));
  }

  for (const auto& [image_id, idxs] : by_image) {
    std::vector<Proposal> pooled;
    if (config.mode == NmsMode::kPerClass) {
      // Class table order is name order, so classes are processed and pooled
      // lexicographically; within a class NMS preserves input order on ties.
      std::map<int, std::vector<int>> by_class;
      for (int i : idxs) by_class[dets[i].class_idx].push_back(i);
      for (const auto& [class_idx, class_idxs] : by_class) {
        std::vector<ScoredBox> boxes;
        boxes.reserve(class_idxs.size());
        for (int i : class_idxs) boxes.push_back(ScoredBox{dets[i].box, dets[i].score});
        for (int kept : nms(boxes, config.nms_threshold)) {
          const Detection& d = dets[class_idxs[kept]];
          pooled.push_back(Proposal{d.box, d.score, class_idx});
        }
      }
    } else {
      std::vector<ScoredBox> boxes;
      boxes.reserve(idxs.size());
      for (int i : idxs) boxes.push_back(ScoredBox{dets[i].box, dets[i].score});
      for (int kept : nms(boxes, config.nms_threshold)) {
        const Detection& d = dets[idxs[kept]];
        pooled.push_back(Proposal{d.box, d.score, d.class_idx});
      }
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Proposal& a, const Proposal& b) { return a.score > b.score; });
    if (static_cast<int>(pooled.size()) > config.per_image_cap)
      pooled.resize(config.per_image_cap);
    out.images()[image_id] = std::move(pooled);
  }
  return out;
}

std::vector<std::pair<double, ProposalSet>> nms_sweep(const Dataset& classes_from,
                                                      const std::vector<Detection>& dets,
                                                      const std::vector<double>& thresholds,
                                                      const FusionConfig& base) {
  if (thresholds.empty()) throw ConfigError("nms_sweep: empty threshold list");
  std::vector<std::pair<double, ProposalSet>> out;
  for (double t : thresholds) {
    FusionConfig config = base;
    config.nms_threshold = t;
    out.emplace_back(t, fuse_detections_to_proposals(classes_from, dets, config));
  }
  return out;
}

ProposalSet remove_by_source(const ProposalSet& set, const std::string& source_class) {
  ProposalSet out;
  for (const std::string& name : set.source_classes()) out.intern_source(name);
  for (const auto& [image_id, list] : set.images()) {
    std::vector<Proposal> kept;
    for (const Proposal& p : list)
      if (set.source_name(p.source) != source_class) kept.push_back(p);
    if (!kept.empty()) out.images()[image_id] = std::move(kept);
  }
  return out;
}

std::string proposals_to_json(const ProposalSet& set) {
  Json j = Json::array();
  for (const auto& [image_id, list] : set.images()) {
    for (const Proposal& p : list) {
      const auto bb = box_to_xywh(p.box);
      Json pj{{"image_id", image_id},
              {"bbox", Json::array({bb[0], bb[1], bb[2], bb[3]})},
              {"score", p.score}};
      if (p.source >= 0) pj["source_class"] = set.source_name(p.source);
      j.push_back(std::move(pj));
    }
  }
  return j.dump(2) + "\n";
}

ProposalSet proposals_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_array()) throw ParseError("proposals file must be a list");

  ProposalSet out;
  std::vector<std::string> issues;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& pj = j[i];
    if (!pj.contains("image_id") || !pj["image_id"].is_number())
      throw ParseError("proposal index " + std::to_string(i) + " without image_id");
    if (!pj.contains("bbox") || !pj["bbox"].is_array() || pj["bbox"].size() != 4)
      throw ParseError("proposal index " + std::to_string(i) + " has no 4-element bbox");
    if (!pj.contains("score") || !pj["score"].is_number())
      throw ParseError("proposal index " + std::to_string(i) + " without score");
    Proposal p;
    p.box = box_from_xywh(pj["bbox"][0].get<double>(), pj["bbox"][1].get<double>(),
                          pj["bbox"][2].get<double>(), pj["bbox"][3].get<double>());
    if (!p.box.valid()) issues.push_back("degenerate box at index " + std::to_string(i));
    p.score = pj["score"].get<double>();
    if (pj.contains("source_class") && pj["source_class"].is_string())
      p.source = out.intern_source(pj["source_class"].get<std::string>());
    out.images()[pj["image_id"].get<int64_t>()].push_back(p);
  }
  if (!issues.empty()) {
    std::ostringstream msg;
    for (size_t i = 0; i < issues.size(); ++i) msg << (i ? "; " : "") << issues[i];
    throw ValidationError(msg.str());
  }
  out.normalize(0);  // restore per-image score order; no cap on load
  return out;
}

void save_proposals(const ProposalSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write proposals file: " + path);
  out << proposals_to_json(set);
}

ProposalSet load_proposals(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open proposals file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return proposals_from_json(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace propgen
