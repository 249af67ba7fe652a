// SPDX-License-Identifier: Apache-2.0
#include "nlq/nn/model.hpp"

#include <algorithm>

#include "nlq/core/errors.hpp"

namespace nlq::nn {

std::string_view to_string(HeadKind h) { return h == HeadKind::anchor ? "anchor" : "anchor_free"; }

HeadKind head_kind_from_string(std::string_view s) {
  if (s == "anchor") return HeadKind::anchor;
  if (s == "anchor_free") return HeadKind::anchor_free;
  throw InvalidArgument("unknown prediction mode '" + std::string(s) + "'");
}

void EncoderConfig::validate() const {
  if (hidden_dim <= 0 || num_heads <= 0) throw InvalidArgument("EncoderConfig: hidden_dim and num_heads must be positive");
  if (hidden_dim % num_heads != 0) throw InvalidArgument("EncoderConfig: hidden_dim must be divisible by num_heads");
  if (hidden_dim % 2 != 0) throw InvalidArgument("EncoderConfig: hidden_dim must be even for positional tables");
  if (intra_layers <= 0 || cross_layers <= 0) throw InvalidArgument("EncoderConfig: layer counts must be positive");
  if (video_input_dim <= 0 || text_input_dim <= 0) throw InvalidArgument("EncoderConfig: input dims must be positive");
  if (num_scales <= 0) throw InvalidArgument("EncoderConfig: num_scales must be positive");
  if (head == HeadKind::anchor_free && num_scales != 1) {
    throw InvalidArgument("EncoderConfig: anchor_free head requires num_scales = 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("EncoderConfig: dropout_rate must lie in [0, 1)");
  if (feedforward_dim < 0) throw InvalidArgument("EncoderConfig: feedforward_dim must be nonnegative");
}

GroundingModel::GroundingModel(const EncoderConfig& config, std::uint64_t seed) : config_(config), seed_(seed) {
  config_.validate();
  Rng rng(seed);
  const int h = config_.hidden_dim;
  const int ffn = config_.ffn_dim();
  const int k = config_.outputs_per_index();

  video_proj_ = Linear(params_, "video_proj", config_.video_input_dim, h, true, rng);
  text_proj_ = Linear(params_, "text_proj", config_.text_input_dim, h, true, rng);
  for (int i = 0; i < config_.intra_layers; ++i) {
    video_layers_.emplace_back(params_, "video_enc." + std::to_string(i), h, config_.num_heads, ffn, rng);
  }
  for (int i = 0; i < config_.intra_layers; ++i) {
    text_layers_.emplace_back(params_, "text_enc." + std::to_string(i), h, config_.num_heads, ffn, rng);
  }
  type_embedding_ = params_.add("type_embedding", glorot_uniform(2, h, 2, h, rng));
  for (int i = 0; i < config_.cross_layers; ++i) {
    cross_layers_.emplace_back(params_, "cross_enc." + std::to_string(i), h, config_.num_heads, ffn, rng);
  }
  final_norm_ = LayerNorm(params_, "cross_norm", h);
  conf_head_.hidden = Linear(params_, "conf_head.hidden", h, h, true, rng);
  conf_head_.out = Linear(params_, "conf_head.out", h, k, true, rng);
  reg_head_.hidden = Linear(params_, "reg_head.hidden", h, h, true, rng);
  reg_head_.out = Linear(params_, "reg_head.out", h, 2 * k, true, rng);
}

GroundingModel GroundingModel::from_parameters(const EncoderConfig& config, std::uint64_t seed,
                                               ParameterStore params) {
  GroundingModel model(config, seed);
  if (!model.params_.same_layout(params)) {
    throw ShapeError("GroundingModel: parameter layout does not match the encoder config");
  }
  model.params_ = std::move(params);
  return model;
}

namespace {

void check_mask(std::span<const std::uint8_t> mask, Eigen::Index rows, const char* what) {
  if (static_cast<Eigen::Index>(mask.size()) != rows) {
    throw ShapeError(std::string(what) + ": mask length does not match row count");
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw InvalidArgument(std::string(what) + ": every position is masked");
  }
}

}  // namespace

ModelOutput GroundingModel::forward(const Matrix& video, std::span<const std::uint8_t> video_mask,
                                    const Matrix& text, std::span<const std::uint8_t> text_mask,
                                    bool train_mode, std::uint64_t dropout_seed, ForwardCache* cache) const {
  if (video.cols() != config_.video_input_dim) throw ShapeError("forward: video feature dim mismatch");
  if (text.cols() != config_.text_input_dim) throw ShapeError("forward: text feature dim mismatch");
  if (video.rows() < 1 || text.rows() < 1) throw ShapeError("forward: empty modality");
  check_mask(video_mask, video.rows(), "forward(video)");
  check_mask(text_mask, text.rows(), "forward(text)");

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c = ForwardCache{};
  c.owner = this;
  c.video_rows = video.rows();
  c.text_rows = text.rows();
  c.video_in = video;
  c.text_in = text;

  Rng rng(dropout_seed);
  Dropout dropout = train_mode ? Dropout(config_.dropout_rate, &rng) : Dropout();

  const int h = config_.hidden_dim;
  const Eigen::Index T = video.rows();
  const Eigen::Index L = text.rows();
  const Matrix pos_video = sinusoidal_positions(static_cast<int>(T), h);
  const Matrix pos_text = sinusoidal_positions(static_cast<int>(L), h);

  Matrix xv = video_proj_.forward(params_, video) + pos_video;
  c.video_layers.resize(video_layers_.size());
  for (std::size_t i = 0; i < video_layers_.size(); ++i) {
    xv = video_layers_[i].forward(params_, xv, video_mask, dropout, c.video_layers[i]);
  }
  Matrix xt = text_proj_.forward(params_, text) + pos_text;
  c.text_layers.resize(text_layers_.size());
  for (std::size_t i = 0; i < text_layers_.size(); ++i) {
    xt = text_layers_[i].forward(params_, xt, text_mask, dropout, c.text_layers[i]);
  }

  const Matrix& types = params_.value(type_embedding_);
  Matrix joint(T + L, h);
  joint.topRows(T) = xv + pos_video;
  joint.topRows(T).rowwise() += types.row(0);
  joint.bottomRows(L) = xt + pos_text;
  joint.bottomRows(L).rowwise() += types.row(1);

  c.joint_mask.assign(video_mask.begin(), video_mask.end());
  c.joint_mask.insert(c.joint_mask.end(), text_mask.begin(), text_mask.end());
  c.cross_layers.resize(cross_layers_.size());
  for (std::size_t i = 0; i < cross_layers_.size(); ++i) {
    joint = cross_layers_[i].forward(params_, joint, c.joint_mask, dropout, c.cross_layers[i]);
  }
  const Matrix normed = final_norm_.forward(params_, joint, c.final_norm);

  ModelOutput out;
  out.fused = normed.topRows(T);
  c.fused = out.fused;

  c.conf_hidden_pre = conf_head_.hidden.forward(params_, out.fused);
  c.conf_hidden = c.conf_hidden_pre.unaryExpr([](double v) { return gelu(v); });
  out.confidence = conf_head_.out.forward(params_, c.conf_hidden).unaryExpr([](double v) { return sigmoid(v); });
  c.confidence = out.confidence;

  c.reg_hidden_pre = reg_head_.hidden.forward(params_, out.fused);
  c.reg_hidden = c.reg_hidden_pre.unaryExpr([](double v) { return gelu(v); });
  out.offsets = reg_head_.out.forward(params_, c.reg_hidden);
  return out;
}

ModelGrad GroundingModel::backward(const ForwardCache& c, const OutputGrad& up) const {
  if (c.owner != this) throw InvalidState("backward: cache was produced by a different model");
  const Eigen::Index T = c.video_rows;
  const Eigen::Index L = c.text_rows;
  const int k = config_.outputs_per_index();
  if (up.confidence.rows() != T || up.confidence.cols() != k || up.offsets.rows() != T ||
      up.offsets.cols() != 2 * k) {
    throw InvalidState("backward: upstream gradient shapes do not match the cached forward");
  }
  if (up.fused.size() > 0 && (up.fused.rows() != T || up.fused.cols() != config_.hidden_dim)) {
    throw InvalidState("backward: fused gradient shape mismatch");
  }

  ModelGrad grad;
  grad.params = params_.zeros_like();
  ParameterStore& g = grad.params;

  const Matrix dlogits = up.confidence.cwiseProduct(
      c.confidence.unaryExpr([](double s) { return s * (1.0 - s); }));
  Matrix dch = conf_head_.out.backward(params_, c.conf_hidden, dlogits, g);
  dch = dch.cwiseProduct(c.conf_hidden_pre.unaryExpr([](double v) { return gelu_grad(v); }));
  Matrix dfused = conf_head_.hidden.backward(params_, c.fused, dch, g);

  Matrix drh = reg_head_.out.backward(params_, c.reg_hidden, up.offsets, g);
  drh = drh.cwiseProduct(c.reg_hidden_pre.unaryExpr([](double v) { return gelu_grad(v); }));
  dfused += reg_head_.hidden.backward(params_, c.fused, drh, g);
  if (up.fused.size() > 0) dfused += up.fused;

  Matrix djoint = Matrix::Zero(T + L, config_.hidden_dim);
  djoint.topRows(T) = dfused;
  djoint = final_norm_.backward(params_, c.final_norm, djoint, g);
  for (std::size_t i = cross_layers_.size(); i-- > 0;) {
    djoint = cross_layers_[i].backward(params_, c.cross_layers[i], djoint, g);
  }

  Matrix& dtypes = g.value(type_embedding_);
  dtypes.row(0) += djoint.topRows(T).colwise().sum();
  dtypes.row(1) += djoint.bottomRows(L).colwise().sum();

  Matrix dxv = djoint.topRows(T);
  for (std::size_t i = video_layers_.size(); i-- > 0;) {
    dxv = video_layers_[i].backward(params_, c.video_layers[i], dxv, g);
  }
  Matrix dxt = djoint.bottomRows(L);
  for (std::size_t i = text_layers_.size(); i-- > 0;) {
    dxt = text_layers_[i].backward(params_, c.text_layers[i], dxt, g);
  }
  grad.video = video_proj_.backward(params_, c.video_in, dxv, g);
  grad.text = text_proj_.backward(params_, c.text_in, dxt, g);
  return grad;
}

}  // namespace nlq::nn
