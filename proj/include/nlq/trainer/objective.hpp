// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nlq/anchors/anchors.hpp"
#include "nlq/losses/losses.hpp"
#include "nlq/nn/model.hpp"
#include "nlq/trainer/schedule.hpp"

namespace nlq::trainer {

struct ObjectiveResult {
  LossBreakdown loss;
  nn::OutputGrad grad;  // filled only when requested
  bool forced_positive = false;
};

// Combined alignment + mu * boundary loss for one sample.
//
// Anchor head: IoU targets and positives come from the anchor lattice; the
// boundary term compares decoded (anchor + offset) spans against the ground
// truth on positive anchors.
//
// Anchor-free head: frame t is positive when its center t + 0.5 lies inside
// the ground truth, and its alignment target is its centerness
// min(l, r) / max(l, r) with l, r the distances to the two boundaries. A
// forced frame gets the IoU of [t, t + 1] instead.
ObjectiveResult compute_objective(const nn::ModelOutput& output, const AnchorSet& anchors, const TimeSpan& gt_index,
                                  nn::HeadKind head, const TrainConfig& config, bool with_grad);

}  // namespace nlq::trainer
