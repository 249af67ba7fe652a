// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nlq/core/matrix.hpp"
#include "nlq/nn/layers.hpp"
#include "nlq/nn/parameters.hpp"

namespace nlq::nn {

// Which prediction head sits on top of the fused video embeddings.
//   anchor:      K confidences and 2K window-relative offsets per index.
//   anchor_free: one confidence and two extents per index (K fixed to 1).
enum class HeadKind { anchor, anchor_free };

std::string_view to_string(HeadKind h);
HeadKind head_kind_from_string(std::string_view s);

struct EncoderConfig {
  int hidden_dim = 512;
  int num_heads = 4;
  int intra_layers = 1;
  int cross_layers = 5;
  int video_input_dim = 0;
  int text_input_dim = 0;
  int num_scales = 2;
  double dropout_rate = 0.1;
  int feedforward_dim = 0;  // 0 selects 4 * hidden_dim
  HeadKind head = HeadKind::anchor;

  int ffn_dim() const { return feedforward_dim > 0 ? feedforward_dim : 4 * hidden_dim; }
  int outputs_per_index() const { return head == HeadKind::anchor ? num_scales : 1; }
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct ModelOutput {
  Matrix confidence;  // T x K, sigmoid outputs
  Matrix offsets;     // T x 2K raw regression outputs, columns (start_k, end_k) per scale
  Matrix fused;       // T x hidden
};

// Upstream gradients for backward. An empty `fused` is treated as zero.
struct OutputGrad {
  Matrix confidence;
  Matrix offsets;
  Matrix fused;
};

struct ModelGrad {
  ParameterStore params;
  Matrix video;
  Matrix text;
};

class GroundingModel;

// Activations recorded by a forward pass, including dropout decisions.
struct ForwardCache {
  const GroundingModel* owner = nullptr;
  Eigen::Index video_rows = 0;
  Eigen::Index text_rows = 0;
  Matrix video_in, text_in;
  std::vector<EncoderLayerCache> video_layers, text_layers, cross_layers;
  std::vector<std::uint8_t> joint_mask;
  LayerNormCache final_norm;
  Matrix fused;
  Matrix conf_hidden_pre, conf_hidden;
  Matrix reg_hidden_pre, reg_hidden;
  Matrix confidence;
};

class GroundingModel {
 public:
  // Glorot-uniform weights, zero biases, unit layer-norm gains; a pure
  // function of (config, seed).
  GroundingModel(const EncoderConfig& config, std::uint64_t seed);

  // Rebuilds the layer structure for `config` and adopts `params`, which must
  // match its layout exactly.
  static GroundingModel from_parameters(const EncoderConfig& config, std::uint64_t seed, ParameterStore params);

  const EncoderConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Masks hold 1 for valid rows. With train_mode=false the call is a pure
  // function of its inputs; in train mode dropout draws from dropout_seed.
  ModelOutput forward(const Matrix& video, std::span<const std::uint8_t> video_mask, const Matrix& text,
                      std::span<const std::uint8_t> text_mask, bool train_mode,
                      std::uint64_t dropout_seed = 0, ForwardCache* cache = nullptr) const;

  ModelGrad backward(const ForwardCache& cache, const OutputGrad& upstream) const;

 private:
  struct Head {
    Linear hidden;
    Linear out;
  };

  EncoderConfig config_;
  std::uint64_t seed_ = 0;
  ParameterStore params_;
  Linear video_proj_, text_proj_;
  std::vector<EncoderLayer> video_layers_, text_layers_, cross_layers_;
  std::size_t type_embedding_ = 0;
  LayerNorm final_norm_;
  Head conf_head_, reg_head_;
};

inline GroundingModel init_model(const EncoderConfig& config, std::uint64_t seed) {
  return GroundingModel(config, seed);
}

}  // namespace nlq::nn
