// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "nlq/data/dataset.hpp"

namespace nlq::data {

// Planted-signal dataset. Each query owns a unit signature u; its tokens are
// u plus noise and the frames inside its span carry P*u plus noise, where P
// is one fixed random map per dataset. Frames elsewhere are N(0, 1) noise,
// with distractor segments carrying signatures of queries from other videos.
// One raw frame per second.
struct SyntheticSpec {
  int num_videos = 4;
  int frames_per_video = 256;
  int feature_dim = 32;
  int text_dim = 16;
  int tokens_per_query = 8;
  int queries_per_video = 2;
  double span_min = 0.01;
  double span_max = 0.08;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticDataset {
  Dataset dataset;
  Matrix projection;  // feature_dim x text_dim
  FeatureMap signatures;  // query_id -> 1 x text_dim
};

// Pure function of the spec. All values are f32-representable so that a
// write/read cycle reproduces them exactly.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace nlq::data
