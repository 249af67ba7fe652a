// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <vector>

#include "nlq/anchors/anchors.hpp"
#include "nlq/nn/gradcheck.hpp"
#include "nlq/nn/model.hpp"
#include "nlq/trainer/objective.hpp"

namespace nlq::testing {

// A model small enough for finite differences: T=8 video rows, L=4 text
// rows (the last one padding), hidden 8, two heads, two scales.
struct TinyProblem {
  nn::EncoderConfig config;
  std::uint64_t seed = 3;
  Matrix video;
  std::vector<std::uint8_t> video_mask;
  Matrix text;
  std::vector<std::uint8_t> text_mask;
  AnchorSet anchors;
  TimeSpan gt{2.3, 5.1, Units::index};
  trainer::TrainConfig train;
  bool train_mode = false;
  std::uint64_t dropout_seed = 0;
};

inline TinyProblem make_tiny_problem(nn::HeadKind head = nn::HeadKind::anchor) {
  TinyProblem p;
  p.config.hidden_dim = 8;
  p.config.num_heads = 2;
  p.config.intra_layers = 1;
  p.config.cross_layers = 2;
  p.config.video_input_dim = 6;
  p.config.text_input_dim = 5;
  p.config.head = head;
  p.config.num_scales = head == nn::HeadKind::anchor ? 2 : 1;
  p.config.dropout_rate = 0.0;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n(0.0, 1.0);
  p.video = Matrix(8, 6);
  for (auto& v : p.video.reshaped()) v = n(rng);
  p.text = Matrix(4, 5);
  for (auto& v : p.text.reshaped()) v = n(rng);
  p.video_mask.assign(8, 1);
  p.text_mask = {1, 1, 1, 0};
  p.anchors = build_lattice({{0.25, 0.5}, 8});
  if (head == nn::HeadKind::anchor_free) p.anchors = AnchorSet{{}, {}, {{1.0}, 8}};
  return p;
}

// Combined alignment + boundary loss of the problem as a function of the
// parameters, with the analytic gradient from backward().
inline nn::DifferentiableLoss tiny_loss(const TinyProblem& p) {
  return [p](const nn::ParameterStore& params, bool with_grad) {
    const auto model = nn::GroundingModel::from_parameters(p.config, p.seed, params);
    nn::ForwardCache cache;
    const auto out = model.forward(p.video, p.video_mask, p.text, p.text_mask, p.train_mode, p.dropout_seed,
                                   with_grad ? &cache : nullptr);
    const auto obj = trainer::compute_objective(out, p.anchors, p.gt, p.config.head, p.train, with_grad);
    nn::LossAndGrad r;
    r.value = obj.loss.total;
    if (with_grad) r.grad = model.backward(cache, obj.grad).params;
    return r;
  };
}

}  // namespace nlq::testing
