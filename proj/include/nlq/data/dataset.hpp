// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "nlq/data/annotations.hpp"
#include "nlq/data/feature_io.hpp"

namespace nlq::data {

// A directory holding annotations.json, video_features/ (keyed by video_id)
// and text_features/ (token embeddings keyed by query_id).
struct Dataset {
  AnnotationSet annotations;
  FeatureMap video_features;
  FeatureMap text_features;

  // Every annotated video and query has features, dims agree across entries,
  // every query has >= 1 token and all values are finite.
  void validate() const;
  int video_dim() const;
  int text_dim() const;
};

void write_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

// First `num_videos - val_videos` videos form the first set, the rest the
// second. Features are copied along with their annotations.
std::pair<Dataset, Dataset> split_by_video(const Dataset& ds, int val_videos);

}  // namespace nlq::data
