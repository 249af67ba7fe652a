// SPDX-License-Identifier: Apache-2.0
#include "nlq/anchors/anchors.hpp"

#include <cmath>
#include <limits>

#include "nlq/core/errors.hpp"

namespace nlq {

void AnchorConfig::validate() const {
  if (num_frames < 2) throw InvalidArgument("AnchorConfig: num_frames must be >= 2");
  if (scales.empty()) throw InvalidArgument("AnchorConfig: scales must be non-empty");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const double r = scales[i];
    if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("AnchorConfig: scales must lie in (0, 1]");
    if (i > 0 && !(r > scales[i - 1])) {
      throw InvalidArgument("AnchorConfig: scales must be strictly increasing");
    }
  }
}

AnchorSet build_lattice(const AnchorConfig& config) {
  config.validate();
  AnchorSet set;
  set.config = config;
  const int T = config.num_frames;
  const int K = config.num_scales();
  set.window_sizes.reserve(K);
  for (double r : config.scales) set.window_sizes.push_back(r * T);

  set.spans.reserve(static_cast<std::size_t>(T) * K);
  for (int t = 0; t < T; ++t) {
    const double c = t + 0.5;
    for (int k = 0; k < K; ++k) {
      const double half = 0.5 * set.window_sizes[k];
      set.spans.push_back(clamp_span({c - half, c + half, Units::index}, 0.0, T));
    }
  }
  return set;
}

AnchorLabels label_anchors(const AnchorSet& anchors, const TimeSpan& gt, double threshold) {
  if (gt.units != Units::index) throw InvalidArgument("label_anchors: ground truth must be in index units");
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw InvalidArgument("label_anchors: threshold must lie in [0, 1)");
  }
  if (!gt.valid() || gt.end > anchors.num_frames()) {
    throw OutOfRange("label_anchors: ground truth outside [0, T]");
  }
  AnchorLabels labels;
  labels.iou_targets.resize(anchors.size());
  labels.positive_mask.assign(anchors.size(), 0);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double o = iou(anchors.spans[i], gt);
    labels.iou_targets[i] = o;
    if (o > threshold) {
      labels.positive_mask[i] = 1;
      ++labels.num_positives;
    }
  }
  return labels;
}

bool ensure_positive(AnchorLabels& labels, const AnchorSet& anchors, const TimeSpan& gt) {
  if (labels.num_positives > 0 || anchors.size() == 0) return false;
  std::size_t best = 0;
  double best_iou = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();
  const double gc = gt.center();
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double o = labels.iou_targets[i];
    const double d = std::abs(anchors.spans[i].center() - gc);
    if (o > best_iou || (o == best_iou && d < best_dist)) {
      best = i;
      best_iou = o;
      best_dist = d;
    }
  }
  labels.positive_mask[best] = 1;
  labels.num_positives = 1;
  labels.forced_positive = true;
  return true;
}

}  // namespace nlq
