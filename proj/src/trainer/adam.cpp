// SPDX-License-Identifier: Apache-2.0
#include "nlq/trainer/adam.hpp"

#include <cmath>

#include "nlq/core/errors.hpp"

namespace nlq::trainer {

OptimizerState OptimizerState::for_parameters(const nn::ParameterStore& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

AdamStepInfo adam_step(nn::ParameterStore& params, nn::ParameterStore grads, OptimizerState& state, double lr,
                       const TrainConfig& config) {
  if (!params.same_layout(grads) || !params.same_layout(state.first_moment) ||
      !params.same_layout(state.second_moment)) {
    throw ShapeError("adam_step: parameter, gradient and moment layouts differ");
  }
  const long step = state.step_count + 1;
  if (!grads.all_finite()) throw DivergenceError("non-finite gradient at step " + std::to_string(step), step);

  AdamStepInfo info;
  info.grad_norm = std::sqrt(grads.squared_norm());
  if (config.grad_clip_norm > 0.0 && info.grad_norm > config.grad_clip_norm) {
    grads.scale(config.grad_clip_norm / info.grad_norm);
    info.clipped = true;
  }

  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.first_moment.value(i);
    Matrix& v = state.second_moment.value(i);
    const Matrix& g = grads.value(i);
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseAbs2();
    params.value(i).array() -=
        lr * (m.array() / c1) / ((v.array() / c2).sqrt() + config.adam_eps);
  }
  state.step_count = step;
  return info;
}

}  // namespace nlq::trainer
