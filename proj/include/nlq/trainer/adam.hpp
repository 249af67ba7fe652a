// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nlq/nn/parameters.hpp"
#include "nlq/trainer/schedule.hpp"

namespace nlq::trainer {

struct OptimizerState {
  nn::ParameterStore first_moment;
  nn::ParameterStore second_moment;
  long step_count = 0;

  static OptimizerState for_parameters(const nn::ParameterStore& params);
};

struct AdamStepInfo {
  double grad_norm = 0.0;  // before clipping
  bool clipped = false;
};

// Global-norm clipping to config.grad_clip_norm, then one bias-corrected Adam
// update at learning rate `lr`. Non-finite gradients raise DivergenceError
// and leave parameters and state untouched.
AdamStepInfo adam_step(nn::ParameterStore& params, nn::ParameterStore grads, OptimizerState& state, double lr,
                       const TrainConfig& config);

}  // namespace nlq::trainer
