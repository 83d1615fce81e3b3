#pragma once

// Seeded random scene generators shared by the unit and acceptance suites.
// Scores are quantized so ties actually occur and ordering rules get
// exercised instead of being vacuously satisfied.

#include <string>
#include <vector>

#include "propgen/dataset.hpp"
#include "propgen/metrics.hpp"
#include "propgen/similarity.hpp"

namespace fixtures {

struct ApScene {
  std::vector<propgen::GtInstance> gts;   // 1..5
  std::vector<propgen::Detection> dets;   // 0..10
};

// Small detection scene spread over 1..3 images. Boxes overlap on purpose
// (drawn around a handful of cluster points) so IoU thresholds discriminate.
ApScene random_ap_scene(uint64_t seed);

struct ArScene {
  propgen::Dataset gt;
  propgen::ProposalsByImage proposals;
};

// Dataset of 2..4 images / 2 classes with 1..5 boxes total, plus 0..10
// proposals per image clustered near the ground truth.
ArScene random_ar_scene(uint64_t seed);

// n scored boxes in a crowded field; roughly half the pairs overlap and
// scores collide often.
std::vector<propgen::ScoredBox> random_boxes(uint64_t seed, int n);

// Square AP table over n named classes: positive diagonal, random
// off-diagonal values, a sprinkle of undefined entries off the diagonal.
propgen::ApTable random_ap_table(uint64_t seed, int n);

}  // namespace fixtures
