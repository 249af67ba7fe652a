// SPDX-License-Identifier: Apache-2.0
#include "nlq/trainer/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "nlq/core/errors.hpp"
#include "nlq/inference/proposals.hpp"

namespace nlq::trainer {

namespace {

struct Labels {
  std::vector<double> targets;
  std::vector<std::uint8_t> positive;
  int num_positives = 0;
  bool forced = false;
};

Labels anchor_labels(const AnchorSet& anchors, const TimeSpan& gt, const TrainConfig& config) {
  AnchorLabels l = label_anchors(anchors, gt, config.positive_threshold);
  const bool forced = config.force_positive && ensure_positive(l, anchors, gt);
  return {std::move(l.iou_targets), std::move(l.positive_mask), l.num_positives, forced};
}

// Frames whose center lies in the ground truth are positives. The soft target
// is centerness, so it does not depend on the regressed extents.
Labels anchor_free_labels(std::size_t T, const TimeSpan& gt, const TrainConfig& config) {
  Labels l;
  l.targets.assign(T, 0.0);
  l.positive.assign(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    const double c = static_cast<double>(t) + 0.5;
    if (c >= gt.start && c <= gt.end) {
      const double left = c - gt.start, right = gt.end - c;
      const double far = std::max(left, right);
      l.targets[t] = far > 0.0 ? std::min(left, right) / far : 1.0;
      l.positive[t] = 1;
      ++l.num_positives;
    }
  }
  if (l.num_positives == 0 && config.force_positive && T > 0) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < T; ++t) {
      const double d = std::abs(static_cast<double>(t) + 0.5 - gt.center());
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    l.targets[best] = iou({static_cast<double>(best), static_cast<double>(best) + 1.0, Units::index}, gt);
    l.positive[best] = 1;
    l.num_positives = 1;
    l.forced = true;
  }
  return l;
}

}  // namespace

ObjectiveResult compute_objective(const nn::ModelOutput& output, const AnchorSet& anchors, const TimeSpan& gt_index,
                                  nn::HeadKind head, const TrainConfig& config, bool with_grad) {
  const auto T = output.confidence.rows();
  const auto K = output.confidence.cols();
  if (gt_index.units != Units::index) throw InvalidArgument("objective: ground truth must be in index units");

  std::vector<inference::DecodedSpan> decoded;
  Labels labels;
  if (head == nn::HeadKind::anchor) {
    decoded = inference::decode_anchor_spans(output.offsets, anchors);
    labels = anchor_labels(anchors, gt_index, config);
  } else {
    decoded = inference::decode_anchor_free_spans(output.offsets, static_cast<int>(T));
    labels = anchor_free_labels(static_cast<std::size_t>(T), gt_index, config);
  }
  if (static_cast<Eigen::Index>(labels.targets.size()) != T * K) throw ShapeError("objective: head/label size mismatch");

  const std::span<const double> conf(output.confidence.data(), static_cast<std::size_t>(T * K));
  const double align = alignment_loss(labels.targets, conf);

  std::vector<TimeSpan> spans;
  spans.reserve(decoded.size());
  for (const auto& d : decoded) spans.push_back(d.span);
  const double norm = config.box_units == BoxUnits::normalized ? static_cast<double>(T) : 1.0;
  // Without positives (forcing disabled) the sample contributes no box term.
  const bool has_box = labels.num_positives > 0;
  const double box = has_box ? boundary_loss(spans, gt_index, labels.positive, config.smooth_l1_beta, norm) : 0.0;

  ObjectiveResult result;
  result.loss = total_loss(align, box, config.mu);
  result.loss.num_positives = labels.num_positives;
  result.forced_positive = labels.forced;
  if (!with_grad) return result;

  const auto dconf = alignment_loss_grad(labels.targets, conf);
  result.grad.confidence = Eigen::Map<const Matrix>(dconf.data(), T, K);
  result.grad.offsets = Matrix::Zero(T, 2 * K);
  if (has_box) {
    const auto bg = boundary_loss_grad(spans, gt_index, labels.positive, config.smooth_l1_beta, norm);
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      if (!labels.positive[i]) continue;
      const auto& d = decoded[i];
      result.grad.offsets(d.t, d.start_col) += config.mu * bg.d_start[i] * d.start_scale;
      result.grad.offsets(d.t, d.end_col) += config.mu * bg.d_end[i] * d.end_scale;
    }
  }
  return result;
}

}  // namespace nlq::trainer
