// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nlq/core/span.hpp"

namespace nlq {

// Anchor window proportions r_k and the sampled sequence length T.
struct AnchorConfig {
  std::vector<double> scales;
  int num_frames = 0;

  int num_scales() const { return static_cast<int>(scales.size()); }
  void validate() const;
};

// K*T clipped candidate spans in index units, t-major then k-minor.
struct AnchorSet {
  std::vector<TimeSpan> spans;
  std::vector<double> window_sizes;  // w_k = r_k * T
  AnchorConfig config;

  int num_frames() const { return config.num_frames; }
  int num_scales() const { return config.num_scales(); }
  std::size_t size() const { return spans.size(); }
  std::size_t flat_index(int t, int k) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(num_scales()) +
           static_cast<std::size_t>(k);
  }
  const TimeSpan& at(int t, int k) const { return spans[flat_index(t, k)]; }
};

struct AnchorLabels {
  std::vector<double> iou_targets;
  std::vector<std::uint8_t> positive_mask;
  int num_positives = 0;
  // Set when ensure_positive had to promote an anchor.
  bool forced_positive = false;
};

AnchorSet build_lattice(const AnchorConfig& config);

// IoU targets against the ground truth and the strict "> threshold" positive
// rule. No forcing is applied here; see ensure_positive.
AnchorLabels label_anchors(const AnchorSet& anchors, const TimeSpan& gt, double threshold);

// If no anchor is positive, marks the highest-IoU anchor positive (ties go to
// the anchor whose center is nearest the ground-truth center, then the lower
// index). Returns true when an anchor was promoted.
bool ensure_positive(AnchorLabels& labels, const AnchorSet& anchors, const TimeSpan& gt);

}  // namespace nlq
