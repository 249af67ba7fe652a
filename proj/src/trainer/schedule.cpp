// SPDX-License-Identifier: Apache-2.0
#include "nlq/trainer/schedule.hpp"

#include <cmath>
#include <string>

#include "nlq/core/errors.hpp"

namespace nlq::trainer {

std::string_view to_string(BoxUnits u) { return u == BoxUnits::normalized ? "normalized" : "raw"; }

BoxUnits box_units_from_string(std::string_view s) {
  if (s == "normalized") return BoxUnits::normalized;
  if (s == "raw") return BoxUnits::raw;
  throw InvalidArgument("unknown box units '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("TrainConfig: batch_size must be >= 1");
  if (!(base_lr > 0.0)) throw InvalidArgument("TrainConfig: base_lr must be positive");
  if (warmup_steps < 1) throw InvalidArgument("TrainConfig: warmup_steps must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw InvalidArgument("TrainConfig: Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw InvalidArgument("TrainConfig: adam_eps must be positive");
  if (!(mu >= 0.0)) throw InvalidArgument("TrainConfig: mu must be nonnegative");
  if (!(positive_threshold >= 0.0 && positive_threshold < 1.0)) {
    throw InvalidArgument("TrainConfig: positive_threshold must lie in [0, 1)");
  }
  if (!(grad_clip_norm >= 0.0)) throw InvalidArgument("TrainConfig: grad_clip_norm must be nonnegative");
  if (!(smooth_l1_beta > 0.0)) throw InvalidArgument("TrainConfig: smooth_l1_beta must be positive");
  if (threads < 0) throw InvalidArgument("TrainConfig: threads must be nonnegative");
}

double lr_at(long step, const TrainConfig& config) {
  if (step < 1) throw InvalidArgument("lr_at: step must be >= 1");
  const double w = config.warmup_steps;
  if (step <= config.warmup_steps) return config.base_lr * static_cast<double>(step) / w;
  return config.base_lr * std::sqrt(w / static_cast<double>(step));
}

}  // namespace nlq::trainer
