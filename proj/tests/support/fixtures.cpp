#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "propgen/rng.hpp"

namespace fixtures {

using propgen::Annotation;
using propgen::Box;
using propgen::ClassInfo;
using propgen::Dataset;
using propgen::Detection;
using propgen::GtInstance;
using propgen::ImageRecord;
using propgen::Rng;
using propgen::ScoredBox;

namespace {

// Score on a 0.05 grid in (0, 1]; collisions are the point.
double quantized_score(Rng& rng) {
  return static_cast<double>(1 + rng.next_below(20)) * 0.05;
}

// Box near (cx, cy) with jittered size; stays strictly inside [0, 100]^2.
Box box_near(Rng& rng, double cx, double cy) {
  const double w = 8.0 + rng.next_range(0.0, 24.0);
  const double h = 8.0 + rng.next_range(0.0, 24.0);
  const double x = std::clamp(cx + rng.next_range(-10.0, 10.0) - w / 2.0, 0.0, 100.0 - w);
  const double y = std::clamp(cy + rng.next_range(-10.0, 10.0) - h / 2.0, 0.0, 100.0 - h);
  return propgen::box_from_xywh(x, y, w, h);
}

}  // namespace

ApScene random_ap_scene(uint64_t seed) {
  Rng rng = Rng(seed).substream("ap-scene");
  const int num_images = 1 + static_cast<int>(rng.next_below(3));
  const int num_gt = 1 + static_cast<int>(rng.next_below(5));
  const int num_det = static_cast<int>(rng.next_below(11));

  // A few cluster points shared by GT and detections.
  std::vector<std::pair<double, double>> anchors;
  const int num_anchors = 2 + static_cast<int>(rng.next_below(3));
  for (int i = 0; i < num_anchors; ++i)
    anchors.push_back({rng.next_range(15.0, 85.0), rng.next_range(15.0, 85.0)});

  ApScene scene;
  for (int i = 0; i < num_gt; ++i) {
    const auto& [cx, cy] = anchors[rng.next_below(anchors.size())];
    GtInstance g;
    g.image_id = 1 + static_cast<int64_t>(rng.next_below(num_images));
    g.box = box_near(rng, cx, cy);
    scene.gts.push_back(g);
  }
  for (int i = 0; i < num_det; ++i) {
    const auto& [cx, cy] = anchors[rng.next_below(anchors.size())];
    Detection d;
    d.image_id = 1 + static_cast<int64_t>(rng.next_below(num_images));
    d.box = box_near(rng, cx, cy);
    d.score = quantized_score(rng);
    scene.dets.push_back(d);
  }
  return scene;
}

ArScene random_ar_scene(uint64_t seed) {
  Rng rng = Rng(seed).substream("ar-scene");
  const int num_images = 2 + static_cast<int>(rng.next_below(3));
  const int num_gt = 1 + static_cast<int>(rng.next_below(5));

  std::vector<ImageRecord> images;
  for (int i = 0; i < num_images; ++i) images.push_back({i + 1, 100, 100});
  std::vector<ClassInfo> classes = {{1, "alpha"}, {2, "beta"}};

  std::vector<Annotation> anns;
  for (int i = 0; i < num_gt; ++i) {
    Annotation a;
    a.id = i + 1;
    a.image_id = 1 + static_cast<int64_t>(rng.next_below(num_images));
    a.class_idx = static_cast<int>(rng.next_below(2));
    a.box = box_near(rng, rng.next_range(20.0, 80.0), rng.next_range(20.0, 80.0));
    anns.push_back(a);
  }

  ArScene scene{Dataset(images, classes, anns), {}};
  for (const ImageRecord& img : images) {
    const int n = static_cast<int>(rng.next_below(11));
    std::vector<ScoredBox> props;
    for (int i = 0; i < n; ++i) {
      // Half the proposals hover near some GT box, half are anywhere.
      Box b;
      if (!anns.empty() && rng.next_below(2) == 0) {
        const Box& g = anns[rng.next_below(anns.size())].box;
        b = box_near(rng, (g.x1 + g.x2) / 2.0, (g.y1 + g.y2) / 2.0);
      } else {
        b = box_near(rng, rng.next_range(10.0, 90.0), rng.next_range(10.0, 90.0));
      }
      props.push_back({b, quantized_score(rng)});
    }
    if (!props.empty()) scene.proposals[img.id] = props;
  }
  return scene;
}

std::vector<ScoredBox> random_boxes(uint64_t seed, int n) {
  Rng rng = Rng(seed).substream("nms-boxes");
  std::vector<std::pair<double, double>> anchors;
  const int num_anchors = 2 + static_cast<int>(rng.next_below(4));
  for (int i = 0; i < num_anchors; ++i)
    anchors.push_back({rng.next_range(20.0, 80.0), rng.next_range(20.0, 80.0)});

  std::vector<ScoredBox> boxes;
  for (int i = 0; i < n; ++i) {
    const auto& [cx, cy] = anchors[rng.next_below(anchors.size())];
    boxes.push_back({box_near(rng, cx, cy), quantized_score(rng)});
  }
  return boxes;
}

propgen::ApTable random_ap_table(uint64_t seed, int n) {
  Rng rng = Rng(seed).substream("ap-table");
  propgen::ApTable table;
  for (int i = 0; i < n; ++i) table.classes.push_back("class_" + std::to_string(i));
  table.values.assign(static_cast<size_t>(n) * n, std::nullopt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        table.values[static_cast<size_t>(i) * n + j] = rng.next_range(0.05, 1.0);
      } else if (rng.next_below(10) != 0) {  // ~10% undefined off the diagonal
        table.values[static_cast<size_t>(i) * n + j] = rng.next_range(0.0, 1.0);
      }
    }
  return table;
}

}  // namespace fixtures
