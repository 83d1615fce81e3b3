#include "propgen/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "propgen/errors.hpp"
#include "propgen/rng.hpp"

namespace propgen {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

std::string two_digits(int v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", v);
  return buf;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void normalize(std::vector<double>& v) {
  const double norm = std::sqrt(dot(v, v));
  if (norm <= 0.0) throw ValidationError("simulator: zero-norm embedding");
  for (double& x : v) x /= norm;
}

// Clip to the image, then restore a minimal extent so the box stays valid.
Box clip_box(Box box, double width, double height) {
  const double min_extent = 1.0;
  box.x1 = std::max(0.0, std::min(box.x1, width));
  box.x2 = std::max(0.0, std::min(box.x2, width));
  box.y1 = std::max(0.0, std::min(box.y1, height));
  box.y2 = std::max(0.0, std::min(box.y2, height));
  if (box.x2 - box.x1 < min_extent) {
    double cx = std::min(std::max((box.x1 + box.x2) / 2.0, min_extent / 2.0), width - min_extent / 2.0);
    box.x1 = cx - min_extent / 2.0;
    box.x2 = cx + min_extent / 2.0;
  }
  if (box.y2 - box.y1 < min_extent) {
    double cy = std::min(std::max((box.y1 + box.y2) / 2.0, min_extent / 2.0), height - min_extent / 2.0);
    box.y1 = cy - min_extent / 2.0;
    box.y2 = cy + min_extent / 2.0;
  }
  return box;
}

}  // namespace

void SimConfig::validate() const {
  if (num_blocks < 1) throw ConfigError("sim config: num_blocks must be positive");
  if (leaves_per_block < 1) throw ConfigError("sim config: leaves_per_block must be positive");
  if (num_blocks > 99 || leaves_per_block > 99)
    throw ConfigError("sim config: at most 99 blocks and 99 leaves per block");
  if (num_images < 1) throw ConfigError("sim config: num_images must be positive");
  if (min_boxes_per_image < 0 || max_boxes_per_image < min_boxes_per_image)
    throw ConfigError("sim config: box count range is invalid");
  if (image_width < 16 || image_height < 16)
    throw ConfigError("sim config: image extent too small");
  if (embed_dim < num_blocks)
    throw ConfigError("sim config: embed_dim must be at least num_blocks");
  if (!(within_block_noise >= 0.0)) throw ConfigError("sim config: negative embedding noise");
  if (!(box_min_frac > 0.0 && box_min_frac <= box_max_frac && box_max_frac <= 1.0))
    throw ConfigError("sim config: box size fractions must satisfy 0 < min <= max <= 1");
  if (placement != "uniform" && placement != "clustered")
    throw ConfigError("sim config: placement must be 'uniform' or 'clustered'");
  if (cluster_centers < 1) throw ConfigError("sim config: cluster_centers must be positive");
  if (!(cluster_spread >= 0.0)) throw ConfigError("sim config: negative cluster_spread");
  if (!(class_weight_decay > 0.0 && class_weight_decay <= 1.0))
    throw ConfigError("sim config: class_weight_decay outside (0, 1]");
}

SimWorld generate_world(const SimConfig& config) {
  config.validate();
  SimWorld world;
  world.config = config;
  const Rng base(config.seed);

  // Hierarchy: root, one node per block, leaves below their block. Names are
  // zero-padded so lexicographic order is block-major construction order.
  std::vector<SemanticTree::NodeSpec> specs;
  specs.push_back({0, "entity", -1});
  for (int b = 0; b < config.num_blocks; ++b)
    specs.push_back({1 + b, "group_" + two_digits(b), 0});
  int64_t next_id = 1 + config.num_blocks;
  for (int b = 0; b < config.num_blocks; ++b) {
    for (int l = 0; l < config.leaves_per_block; ++l) {
      specs.push_back({next_id++, "leaf_" + two_digits(b) + "_" + two_digits(l), 1 + b});
    }
  }
  world.tree = SemanticTree::from_nodes(specs);

  std::vector<ClassInfo> classes;
  for (int b = 0; b < config.num_blocks; ++b) {
    for (int l = 0; l < config.leaves_per_block; ++l) {
      const std::string name = "leaf_" + two_digits(b) + "_" + two_digits(l);
      classes.push_back(ClassInfo{world.tree.nodes()[world.tree.node_index(name)].id, name});
      world.class_names.push_back(name);
      world.block_of.push_back(b);
    }
  }

  // Block centers are orthogonal basis directions; leaves add seeded noise,
  // so same-block pairs stay far more aligned than cross-block pairs.
  const Rng emb_base = base.substream("emb");
  for (size_t c = 0; c < world.class_names.size(); ++c) {
    Rng stream = emb_base.substream(static_cast<uint64_t>(c));
    std::vector<double> v(config.embed_dim, 0.0);
    v[world.block_of[c]] = 1.0;
    for (int d = 0; d < config.embed_dim; ++d)
      v[d] += config.within_block_noise * stream.next_normal();
    normalize(v);
    world.embeddings.push_back(std::move(v));
  }

  // Leaf sampling weights decay with the leaf's rank inside its block.
  std::vector<double> cumulative;
  double total = 0.0;
  for (size_t c = 0; c < world.class_names.size(); ++c) {
    const int rank = static_cast<int>(c) % config.leaves_per_block;
    total += std::pow(config.class_weight_decay, rank);
    cumulative.push_back(total);
  }

  const double width = config.image_width, height = config.image_height;
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  int64_t next_ann = 1;
  const Rng img_base = base.substream("img");
  for (int i = 0; i < config.num_images; ++i) {
    const int64_t image_id = i + 1;
    images.push_back(ImageRecord{image_id, config.image_width, config.image_height});
    Rng stream = img_base.substream(static_cast<uint64_t>(image_id));

    std::vector<std::pair<double, double>> centers;
    if (config.placement == "clustered") {
      for (int c = 0; c < config.cluster_centers; ++c)
        centers.emplace_back(stream.next_range(0.25 * width, 0.75 * width),
                             stream.next_range(0.25 * height, 0.75 * height));
    }

    const int span = config.max_boxes_per_image - config.min_boxes_per_image + 1;
    const int count = config.min_boxes_per_image +
                      static_cast<int>(stream.next_below(static_cast<uint64_t>(span)));
    for (int b = 0; b < count; ++b) {
      const double pick = stream.next_double() * total;
      const size_t class_idx =
          std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();

      const double w = stream.next_range(config.box_min_frac, config.box_max_frac) * width;
      const double h = stream.next_range(config.box_min_frac, config.box_max_frac) * height;
      Box box;
      if (config.placement == "clustered") {
        const auto& [cx, cy] = centers[stream.next_below(centers.size())];
        const double x = cx + stream.next_normal() * config.cluster_spread * width - w / 2.0;
        const double y = cy + stream.next_normal() * config.cluster_spread * height - h / 2.0;
        box = Box{x, y, x + w, y + h};
      } else {
        const double x = stream.next_double() * (width - w);
        const double y = stream.next_double() * (height - h);
        box = Box{x, y, x + w, y + h};
      }
      box = clip_box(box, width, height);
      annotations.push_back(Annotation{next_ann++, image_id,
                                       static_cast<int>(std::min(class_idx, world.class_names.size() - 1)),
                                       box});
    }
  }
  world.dataset = Dataset(std::move(images), std::move(classes), std::move(annotations));
  return world;
}

void DetectorModelConfig::validate() const {
  if (training_classes.empty()) throw ConfigError("detector model: empty training class list");
  if (!(jitter_scale >= 0.0)) throw ConfigError("detector model: negative jitter_scale");
  if (!(miss_base >= 0.0 && miss_base <= 1.0))
    throw ConfigError("detector model: miss_base outside [0, 1]");
  if (!(label_noise >= 0.0)) throw ConfigError("detector model: negative label_noise");
  if (!(score_noise >= 0.0 && score_noise <= 1.0))
    throw ConfigError("detector model: score_noise outside [0, 1]");
  if (!(fp_rate >= 0.0)) throw ConfigError("detector model: negative fp_rate");
  if (!(fp_score_max >= 0.0 && fp_score_max <= 1.0))
    throw ConfigError("detector model: fp_score_max outside [0, 1]");
  if (!(emit_min_kappa >= 0.0 && emit_min_kappa <= 1.0))
    throw ConfigError("detector model: emit_min_kappa outside [0, 1]");
}

double kappa(const SimWorld& world, const std::vector<int>& training, int class_idx) {
  if (training.empty()) throw ConfigError("kappa: empty training set");
  double best = 0.0;
  for (int t : training) {
    if (t == class_idx) return 1.0;  // trained classes hit exactly 1
    best = std::max(best, clamp01(dot(world.embeddings[class_idx], world.embeddings[t])));
  }
  return best;
}

std::vector<Detection> simulate_detections(const SimWorld& world,
                                           const DetectorModelConfig& model) {
  model.validate();
  std::vector<int> training;
  for (const std::string& name : model.training_classes) {
    const auto it =
        std::lower_bound(world.class_names.begin(), world.class_names.end(), name);
    if (it == world.class_names.end() || *it != name)
      throw ValidationError("detector model: unknown training class '" + name + "'");
    training.push_back(static_cast<int>(it - world.class_names.begin()));
  }
  std::sort(training.begin(), training.end());
  training.erase(std::unique(training.begin(), training.end()), training.end());

  std::vector<double> kappa_of(world.class_names.size(), 0.0);
  for (size_t c = 0; c < world.class_names.size(); ++c)
    kappa_of[c] = kappa(world, training, static_cast<int>(c));

  const double width = world.config.image_width, height = world.config.image_height;
  const Rng base(world.config.seed);
  const Rng det_base = base.substream("det");
  const Rng fp_base = base.substream("fp");

  std::vector<Detection> dets;
  for (const ImageRecord& im : world.dataset.images()) {
    const std::vector<int>& ann_idx = world.dataset.annotations_of(im.id);
    const Rng image_stream = det_base.substream(static_cast<uint64_t>(im.id));

    for (size_t a = 0; a < ann_idx.size(); ++a) {
      const Annotation& ann = world.dataset.annotations()[ann_idx[a]];
      Rng stream = image_stream.substream(static_cast<uint64_t>(a));

      if (!model.emit_per_class) {
        // Draws happen unconditionally and depend only on (seed, image, box),
        // so two models see identical randomness for the same instance.
        const double u_miss = stream.next_double();
        const double j1 = stream.next_normal(), j2 = stream.next_normal();
        const double j3 = stream.next_normal(), j4 = stream.next_normal();
        const double u_score = stream.next_double();
        std::vector<double> appearance = world.embeddings[ann.class_idx];
        for (double& x : appearance) x += model.label_noise * stream.next_normal();

        const double k = kappa_of[ann.class_idx];
        if (u_miss < clamp01(model.miss_base * (1.0 - k))) continue;

        const double sigma = model.jitter_scale * (1.0 - k);
        const double bw = ann.box.width(), bh = ann.box.height();
        Box box{ann.box.x1 + j1 * sigma * bw, ann.box.y1 + j2 * sigma * bh,
                ann.box.x2 + j3 * sigma * bw, ann.box.y2 + j4 * sigma * bh};
        box = clip_box(box, width, height);

        int label = training.front();
        double best = -2.0;
        for (int t : training) {
          const double v = dot(appearance, world.embeddings[t]);
          if (v > best) {
            best = v;
            label = t;
          }
        }
        dets.push_back(Detection{im.id, label, box, clamp01(k * (1.0 - model.score_noise * u_score))});
      } else {
        // Redundant per-class emission: every sufficiently similar training
        // class regresses its own copy of the box.
        for (int t : training) {
          const double k = (t == ann.class_idx)
                               ? 1.0
                               : clamp01(dot(world.embeddings[ann.class_idx], world.embeddings[t]));
          if (k < model.emit_min_kappa) continue;
          Rng sub = stream.substream(static_cast<uint64_t>(t) + 1000);
          const double u_miss = sub.next_double();
          const double j1 = sub.next_normal(), j2 = sub.next_normal();
          const double j3 = sub.next_normal(), j4 = sub.next_normal();
          const double u_score = sub.next_double();
          if (u_miss < clamp01(model.miss_base * (1.0 - k))) continue;
          const double sigma = model.jitter_scale * (1.0 - k);
          const double bw = ann.box.width(), bh = ann.box.height();
          Box box{ann.box.x1 + j1 * sigma * bw, ann.box.y1 + j2 * sigma * bh,
                  ann.box.x2 + j3 * sigma * bw, ann.box.y2 + j4 * sigma * bh};
          box = clip_box(box, width, height);
          dets.push_back(Detection{im.id, t, box, clamp01(k * (1.0 - model.score_noise * u_score))});
        }
      }
    }

    // Background false positives; count, box and score draws are independent
    // of the training set so paired runs share them.
    Rng fp_stream = fp_base.substream(static_cast<uint64_t>(im.id));
    const double frac = model.fp_rate - std::floor(model.fp_rate);
    int fp_count = static_cast<int>(std::floor(model.fp_rate));
    if (fp_stream.next_double() < frac) ++fp_count;
    for (int f = 0; f < fp_count; ++f) {
      Rng sub = fp_stream.substream(static_cast<uint64_t>(f));
      const double w = sub.next_range(world.config.box_min_frac, world.config.box_max_frac) * width;
      const double h = sub.next_range(world.config.box_min_frac, world.config.box_max_frac) * height;
      const double x = sub.next_double() * (width - w);
      const double y = sub.next_double() * (height - h);
      const double score = model.fp_score_max * sub.next_double();
      const int label = training[sub.next_below(training.size())];
      dets.push_back(Detection{im.id, label, clip_box(Box{x, y, x + w, y + h}, width, height), score});
    }
  }
  return dets;
}

}  // namespace propgen
