#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/metrics.hpp"
#include "propgen/tree.hpp"

namespace propgen {

// Synthetic world: a two-level hierarchy (root, blocks, leaves), unit-norm
// class embeddings with block structure (orthogonal block centers plus
// per-leaf noise, so siblings are closer than non-siblings by construction),
// and a seeded ground-truth image set. Leaf sampling weights decay within a
// block, giving the selection strategies a frequency signal.
struct SimConfig {
  int num_blocks = 3;
  int leaves_per_block = 8;
  int num_images = 600;
  int min_boxes_per_image = 1;
  int max_boxes_per_image = 5;
  int image_width = 640;
  int image_height = 480;
  int embed_dim = 16;
  double within_block_noise = 0.10;
  double box_min_frac = 0.08;          // box side as a fraction of image side
  double box_max_frac = 0.45;
  std::string placement = "uniform";   // "uniform" | "clustered"
  int cluster_centers = 3;             // clustered placement: centers per image
  double cluster_spread = 0.10;        // center-relative gaussian offset, image frac
  double class_weight_decay = 0.78;    // leaf weight ~ decay^rank within block
  uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct SimWorld {
  SimConfig config;
  SemanticTree tree;
  Dataset dataset;                              // ground truth, classes = leaves
  std::vector<std::string> class_names;         // sorted; aligned with dataset classes
  std::vector<std::vector<double>> embeddings;  // unit vectors, aligned
  std::vector<int> block_of;                    // planted partition, aligned
};

SimWorld generate_world(const SimConfig& config);

// Detector stand-in. Behaviour is driven by the class-level kernel
//   kappa(c, T) = max over t in T of clamp01(cos(emb_c, emb_t))
// (exactly 1 when c is trained on): miss probability miss_base * (1 - kappa),
// corner jitter sigma = jitter_scale * (1 - kappa) of the box extent (exactly
// 0 at kappa = 1), score kappa * (1 - score_noise * u). The emitted label is
// the training class nearest to the instance appearance, a noisy copy of the
// class embedding, which is what produces cross-class confusion between
// similar classes. Background false positives arrive at fp_rate per image
// with scores below fp_score_max.
struct DetectorModelConfig {
  std::vector<std::string> training_classes;
  double jitter_scale = 0.25;
  double miss_base = 1.0;
  double label_noise = 0.35;
  double score_noise = 0.3;
  double fp_rate = 0.5;
  double fp_score_max = 0.25;

  // Redundant emission: one detection per training class whose own kernel
  // clears emit_min_kappa, each with its own jitter and score. Off by
  // default; used for high-overlap scenes where the proposal budget matters.
  bool emit_per_class = false;
  double emit_min_kappa = 0.35;

  void validate() const;  // throws ConfigError
};

double kappa(const SimWorld& world, const std::vector<int>& training, int class_idx);

// Deterministic per (world seed, image id): detections for any two training
// sets are generated from identical random draws, so growing the training
// set can only improve each box's detection.
std::vector<Detection> simulate_detections(const SimWorld& world,
                                           const DetectorModelConfig& model);

}  // namespace propgen
