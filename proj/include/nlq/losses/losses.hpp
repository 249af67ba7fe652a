// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlq/core/span.hpp"

namespace nlq {

inline constexpr double kConfidenceEpsilon = 1e-7;

struct LossBreakdown {
  double align = 0.0;
  double box = 0.0;
  double total = 0.0;
  double mu = 0.0;
  int num_positives = 0;
};

// Soft-target binary cross-entropy between IoU targets and confidences,
// averaged over all anchors. Confidences are clamped to [eps, 1 - eps].
double alignment_loss(std::span<const double> iou_targets, std::span<const double> confidences);

// d alignment_loss / d confidence_i. Zero where the clamp is active.
std::vector<double> alignment_loss_grad(std::span<const double> iou_targets,
                                        std::span<const double> confidences);

double smooth_l1(double x, double beta);
double smooth_l1_grad(double x, double beta);

struct BoundaryGrad {
  std::vector<double> d_start;
  std::vector<double> d_end;
};

// Mean smooth-L1 over positive predictions of the start and end residuals,
// each residual divided by `norm`. Throws NoPositivesError when the mask is
// empty.
double boundary_loss(std::span<const TimeSpan> pred_spans, const TimeSpan& gt,
                     std::span<const std::uint8_t> positive_mask, double beta, double norm);

// Gradient of boundary_loss with respect to each predicted start and end.
BoundaryGrad boundary_loss_grad(std::span<const TimeSpan> pred_spans, const TimeSpan& gt,
                                std::span<const std::uint8_t> positive_mask, double beta,
                                double norm);

LossBreakdown total_loss(double align, double box, double mu);

}  // namespace nlq
