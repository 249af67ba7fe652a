// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace nlq::trainer {

enum class BoxUnits { normalized, raw };

std::string_view to_string(BoxUnits u);
BoxUnits box_units_from_string(std::string_view s);

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double base_lr = 2e-4;
  int warmup_steps = 1000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double mu = 1.0;
  double positive_threshold = 0.5;
  double grad_clip_norm = 1.0;  // 0 disables clipping
  bool force_positive = true;
  BoxUnits box_units = BoxUnits::normalized;
  double smooth_l1_beta = 1.0;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Linear warmup to base_lr at warmup_steps, then base_lr * sqrt(warmup / step).
double lr_at(long step, const TrainConfig& config);

}  // namespace nlq::trainer
