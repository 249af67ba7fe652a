// SPDX-License-Identifier: Apache-2.0
#include "nlq/losses/losses.hpp"

#include <algorithm>
#include <cmath>

#include "nlq/core/errors.hpp"

namespace nlq {

namespace {

void check_alignment_inputs(std::span<const double> o, std::span<const double> s) {
  if (o.empty()) throw InvalidArgument("alignment_loss: empty input");
  if (o.size() != s.size()) throw ShapeError("alignment_loss: targets and confidences differ in length");
}

int count_positives(std::span<const TimeSpan> preds, std::span<const std::uint8_t> mask) {
  if (preds.size() != mask.size()) throw ShapeError("boundary_loss: predictions and mask differ in length");
  int n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  if (n == 0) throw NoPositivesError("boundary_loss: no positive proposals");
  return n;
}

void check_box_params(double beta, double norm) {
  if (!(beta > 0.0)) throw InvalidArgument("boundary_loss: beta must be positive");
  if (!(norm > 0.0)) throw InvalidArgument("boundary_loss: norm must be positive");
}

}  // namespace

double alignment_loss(std::span<const double> iou_targets, std::span<const double> confidences) {
  check_alignment_inputs(iou_targets, confidences);
  double sum = 0.0;
  for (std::size_t i = 0; i < iou_targets.size(); ++i) {
    const double s = std::clamp(confidences[i], kConfidenceEpsilon, 1.0 - kConfidenceEpsilon);
    const double o = iou_targets[i];
    sum += o * std::log(s) + (1.0 - o) * std::log(1.0 - s);
  }
  return -sum / static_cast<double>(iou_targets.size());
}

std::vector<double> alignment_loss_grad(std::span<const double> iou_targets,
                                        std::span<const double> confidences) {
  check_alignment_inputs(iou_targets, confidences);
  const double n = static_cast<double>(iou_targets.size());
  std::vector<double> g(iou_targets.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = confidences[i];
    if (s < kConfidenceEpsilon || s > 1.0 - kConfidenceEpsilon) continue;
    g[i] = (s - iou_targets[i]) / (n * s * (1.0 - s));
  }
  return g;
}

double smooth_l1(double x, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("smooth_l1: beta must be positive");
  const double a = std::abs(x);
  return a < beta ? 0.5 * x * x / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("smooth_l1: beta must be positive");
  if (std::abs(x) < beta) return x / beta;
  return x > 0.0 ? 1.0 : -1.0;
}

double boundary_loss(std::span<const TimeSpan> pred_spans, const TimeSpan& gt,
                     std::span<const std::uint8_t> positive_mask, double beta, double norm) {
  check_box_params(beta, norm);
  const int n = count_positives(pred_spans, positive_mask);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred_spans.size(); ++i) {
    if (!positive_mask[i]) continue;
    sum += smooth_l1((pred_spans[i].start - gt.start) / norm, beta) +
           smooth_l1((pred_spans[i].end - gt.end) / norm, beta);
  }
  return sum / n;
}

BoundaryGrad boundary_loss_grad(std::span<const TimeSpan> pred_spans, const TimeSpan& gt,
                                std::span<const std::uint8_t> positive_mask, double beta,
                                double norm) {
  check_box_params(beta, norm);
  const int n = count_positives(pred_spans, positive_mask);
  BoundaryGrad g{std::vector<double>(pred_spans.size(), 0.0),
                 std::vector<double>(pred_spans.size(), 0.0)};
  const double scale = 1.0 / (n * norm);
  for (std::size_t i = 0; i < pred_spans.size(); ++i) {
    if (!positive_mask[i]) continue;
    g.d_start[i] = smooth_l1_grad((pred_spans[i].start - gt.start) / norm, beta) * scale;
    g.d_end[i] = smooth_l1_grad((pred_spans[i].end - gt.end) / norm, beta) * scale;
  }
  return g;
}

LossBreakdown total_loss(double align, double box, double mu) {
  if (align < 0.0 || box < 0.0) throw InvalidArgument("total_loss: components must be nonnegative");
  if (mu < 0.0) throw InvalidArgument("total_loss: mu must be nonnegative");
  LossBreakdown b;
  b.align = align;
  b.box = box;
  b.mu = mu;
  b.total = align + mu * box;
  return b;
}

}  // namespace nlq
