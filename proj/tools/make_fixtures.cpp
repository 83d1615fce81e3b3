// Regenerates the checked-in fixture files. Usage: make_fixtures [out_dir]
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/fusion.hpp"
#include "propgen/metrics.hpp"
#include "propgen/serialize.hpp"
#include "propgen/tree.hpp"

namespace {

using propgen::Annotation;
using propgen::Box;
using propgen::box_from_xywh;
using propgen::ClassInfo;
using propgen::Dataset;
using propgen::Detection;
using propgen::ImageRecord;
using propgen::Json;
using propgen::ProposalSet;
using propgen::SemanticTree;

std::string pad(int v, int width) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

SemanticTree tiny_hierarchy() {
  std::vector<SemanticTree::NodeSpec> specs{
      {0, "thing", -1}, {1, "ant", 0}, {2, "bee", 0}, {3, "cat", 0}, {4, "dog", 0}};
  return SemanticTree::from_nodes(specs);
}

// Six 100x100 images; class frequencies ant 10, bee 5, cat 3, dog 2.
Dataset tiny_dataset() {
  const std::vector<std::vector<std::string>> layout{
      {"ant", "ant", "ant", "bee"}, {"ant", "ant", "ant", "bee"}, {"ant", "ant", "bee"},
      {"ant", "ant", "cat"},        {"bee", "bee", "cat"},        {"cat", "dog", "dog"}};
  std::vector<ImageRecord> images;
  std::vector<ClassInfo> classes{{1, "ant"}, {2, "bee"}, {3, "cat"}, {4, "dog"}};
  std::vector<Annotation> anns;
  int64_t next_ann = 1;
  for (size_t i = 0; i < layout.size(); ++i) {
    const int64_t image_id = static_cast<int64_t>(i) + 1;
    images.push_back({image_id, 100, 100});
    for (size_t slot = 0; slot < layout[i].size(); ++slot) {
      const double x = 5.0 + 22.0 * static_cast<double>(slot);
      const double y = 5.0 + 18.0 * static_cast<double>(slot);
      int idx = 0;
      for (size_t c = 0; c < classes.size(); ++c)
        if (classes[c].name == layout[i][slot]) idx = static_cast<int>(c);
      anns.push_back({next_ann++, image_id, idx, box_from_xywh(x, y, 20.0, 15.0)});
    }
  }
  return Dataset(std::move(images), std::move(classes), std::move(anns));
}

// Near-perfect same-class detections, deliberate ant/bee and cat/dog
// confusions, and two low-score background boxes per image.
std::vector<Detection> tiny_detections(const Dataset& data) {
  std::vector<Detection> dets;
  const auto confusion = [&](const std::string& name) -> std::string {
    if (name == "ant") return "bee";
    if (name == "bee") return "ant";
    if (name == "cat") return "dog";
    return "cat";
  };
  for (const ImageRecord& im : data.images()) {
    const auto& ann_ids = data.annotations_of(im.id);
    for (size_t slot = 0; slot < ann_ids.size(); ++slot) {
      const Annotation& a = data.annotations()[ann_ids[slot]];
      const auto bb = propgen::box_to_xywh(a.box);
      dets.push_back({im.id, a.class_idx, box_from_xywh(bb[0] + 1.0, bb[1] + 1.0, bb[2], bb[3]),
                      0.95 - 0.02 * static_cast<double>(slot)});
      const int conf_idx = data.class_index(confusion(data.class_name(a.class_idx)));
      dets.push_back({im.id, conf_idx, box_from_xywh(bb[0] + 2.0, bb[1], bb[2], bb[3]),
                      a.class_idx == conf_idx ? 0.5 : 0.55});
    }
    dets.push_back({im.id, 0, box_from_xywh(70.0, 5.0, 18.0, 12.0), 0.15});
    dets.push_back({im.id, 1, box_from_xywh(5.0, 75.0, 18.0, 12.0), 0.12});
  }
  return dets;
}

// Proposal boxes with hand-checkable IoU structure on images 1 and 6; image 4
// is left empty on purpose (weakly labeled, no proposals).
ProposalSet tiny_proposals() {
  ProposalSet set;
  auto add = [&set](int64_t image, double x, double y, double w, double h, double score) {
    set.images()[image].push_back({box_from_xywh(x, y, w, h), score, -1});
  };
  add(1, 5, 5, 20, 15, 0.95);
  add(1, 6, 5, 20, 15, 0.90);
  add(1, 12, 8, 20, 15, 0.80);
  add(1, 9, 7, 20, 15, 0.60);
  add(1, 60, 60, 20, 15, 0.40);
  add(2, 6, 6, 20, 15, 0.90);
  add(2, 28, 24, 20, 15, 0.80);
  add(2, 50, 42, 20, 15, 0.70);
  add(2, 72, 60, 20, 15, 0.60);
  add(2, 60, 5, 20, 15, 0.30);
  add(3, 5, 5, 20, 15, 0.95);
  add(3, 27, 23, 20, 15, 0.85);
  add(3, 49, 41, 20, 15, 0.75);
  add(5, 6, 5, 20, 15, 0.90);
  add(5, 27, 24, 20, 15, 0.80);
  add(5, 49, 41, 20, 15, 0.70);
  add(6, 10, 10, 30, 24, 0.90);
  add(6, 12, 11, 30, 24, 0.70);
  add(6, 30, 20, 30, 24, 0.50);
  set.normalize(0);
  return set;
}

Json tiny_labels() {
  return Json::array({Json{{"image_id", 1}, {"classes", Json::array({"ant", "bee"})}},
                      Json{{"image_id", 4}, {"classes", Json::array({"cat"})}},
                      Json{{"image_id", 6}, {"classes", Json::array({"dog"})}}});
}

// Five-level hierarchy shaped like a real large-vocabulary taxonomy: 432
// leaves total, and relabeling a full-leaf dataset to levels 0..4 touches
// 1 / 86 / 270 / 398 / 432 distinct classes.
SemanticTree deep_hierarchy() {
  std::vector<SemanticTree::NodeSpec> specs;
  specs.push_back({0, "entity", -1});
  int64_t next_id = 1;
  std::vector<int64_t> l1_internal, l2_internal, l3_internal;
  for (int i = 0; i < 66; ++i) {
    l1_internal.push_back(next_id);
    specs.push_back({next_id++, "g1_" + pad(i, 2), 0});
  }
  for (int i = 0; i < 20; ++i) specs.push_back({next_id++, "leaf1_" + pad(i, 2), 0});
  for (int i = 0; i < 100; ++i) {
    l2_internal.push_back(next_id);
    specs.push_back({next_id++, "g2_" + pad(i, 3), l1_internal[i % l1_internal.size()]});
  }
  for (int i = 0; i < 150; ++i)
    specs.push_back({next_id++, "leaf2_" + pad(i, 3), l1_internal[(100 + i) % l1_internal.size()]});
  for (int i = 0; i < 68; ++i) {
    l3_internal.push_back(next_id);
    specs.push_back({next_id++, "g3_" + pad(i, 3), l2_internal[i % l2_internal.size()]});
  }
  for (int i = 0; i < 160; ++i)
    specs.push_back({next_id++, "leaf3_" + pad(i, 3), l2_internal[(68 + i) % l2_internal.size()]});
  for (int i = 0; i < 102; ++i)
    specs.push_back({next_id++, "leaf4_" + pad(i, 3), l3_internal[i % l3_internal.size()]});
  return SemanticTree::from_nodes(specs);
}

// One box per leaf, four boxes per 640x480 image.
Dataset deep_dataset(const SemanticTree& tree) {
  const std::vector<std::string> leaves = tree.leaf_names();
  std::vector<ClassInfo> classes;
  for (const std::string& name : leaves)
    classes.push_back({tree.nodes()[tree.node_index(name)].id, name});
  std::vector<ImageRecord> images;
  std::vector<Annotation> anns;
  for (size_t j = 0; j < leaves.size(); ++j) {
    const int64_t image_id = 1 + static_cast<int64_t>(j) / 4;
    const int slot = static_cast<int>(j % 4);
    if (slot == 0) images.push_back({image_id, 640, 480});
    anns.push_back({static_cast<int64_t>(j) + 1, image_id, static_cast<int>(j),
                    box_from_xywh(10.0 + 150.0 * slot, 20.0 + 100.0 * slot, 120.0, 90.0)});
  }
  return Dataset(std::move(images), std::move(classes), std::move(anns));
}

Json sim_world_config() {
  Json world{{"num_blocks", 3}, {"leaves_per_block", 8}, {"num_images", 120}, {"seed", 7}};
  Json detector{{"training_classes",
                 Json::array({"leaf_00_00", "leaf_00_01", "leaf_01_00", "leaf_01_01",
                              "leaf_02_00", "leaf_02_01"})}};
  return Json{{"world", world}, {"detector", detector}};
}

// Reference numbers from a full-scale run of the same analysis on a public
// large-vocabulary detection dataset; used to exercise the report renderers
// at realistic magnitudes.
Json reference_baselines() {
  Json rows = Json::array();
  const int counts[5] = {1, 86, 270, 398, 432};
  const double ar100[5] = {0.617, 0.634, 0.637, 0.652, 0.642};
  const double ar1000[5] = {0.720, 0.730, 0.752, 0.772, 0.761};
  for (int level = 0; level < 5; ++level)
    rows.push_back(Json{{"level", level},
                        {"class_count", counts[level]},
                        {"ar", Json{{"100", ar100[level]}, {"1000", ar1000[level]}}}});
  Json sources{{"rpn", Json{{"weak_ap", 0.087}, {"ar100", 0.550}}},
               {"detection_head", Json{{"weak_ap", 0.240}, {"ar100", 0.694}}},
               {"rpn_full_source", Json{{"weak_ap", 0.096}, {"ar100", 0.604}}},
               {"detection_head_full_source", Json{{"weak_ap", 0.308}, {"ar100", 0.769}}}};
  Json sufficiency{{"quarter_subset_drop_ar100", 0.043},
                   {"half_subset_drop_ar100", 0.009},
                   {"oracle_100_of_432_drop_ar100", 0.048},
                   {"oracle_200_of_432_drop_ar100", 0.004},
                   {"oracle_200_ar100", 0.732},
                   {"oracle_300_ar100", 0.759}};
  return Json{
      {"granularity", Json{{"k_values", Json::array({100, 1000})}, {"rows", rows}}},
      {"proposal_sources", sources},
      {"sufficiency", sufficiency},
      {"fusion_gain_ar100", Json{{"over_rpn", 0.100}, {"over_single_stage", 0.035}}}};
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "fixtures";
  std::filesystem::create_directories(out_dir);
  const auto put = [&out_dir](const std::string& name, const std::string& text) {
    propgen::write_text_file((out_dir / name).string(), text);
    std::cout << "wrote " << (out_dir / name).string() << "\n";
  };

  const SemanticTree tiny_tree = tiny_hierarchy();
  const Dataset tiny = tiny_dataset();
  put("tiny_hierarchy.json", propgen::hierarchy_to_json(tiny_tree));
  put("tiny_dataset.json", propgen::dataset_to_json(tiny));
  put("tiny_detections.json", propgen::detections_to_json(tiny_detections(tiny), tiny));
  put("tiny_proposals.json", propgen::proposals_to_json(tiny_proposals()));
  put("tiny_labels.json", propgen::canonical_dump(tiny_labels()));

  const SemanticTree deep = deep_hierarchy();
  put("oiv4_like_hierarchy.json", propgen::hierarchy_to_json(deep));
  put("oiv4_like_dataset.json", propgen::dataset_to_json(deep_dataset(deep)));

  put("sim_world.json", propgen::canonical_dump(sim_world_config()));
  put("reference_baselines.json", propgen::canonical_dump(reference_baselines()));
  return 0;
}
