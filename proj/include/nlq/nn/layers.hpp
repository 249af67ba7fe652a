// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nlq/core/matrix.hpp"
#include "nlq/nn/parameters.hpp"

// Building blocks of the encoder stack. Every layer is a thin handle holding
// indices into a ParameterStore; forward passes fill a cache that the matching
// backward pass consumes. Backward passes accumulate into a gradient store
// with the same layout and return the gradient with respect to the input.

namespace nlq::nn {

using Rng = std::mt19937_64;

double gelu(double x);
double gelu_grad(double x);
double sigmoid(double x);
double softplus(double x);

// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(int rows, int cols, int fan_in, int fan_out, Rng& rng);

// Dropout decisions for one forward pass. Inactive contexts never touch the
// generator, so eval-mode forwards are pure.
class Dropout {
 public:
  Dropout() = default;
  Dropout(double rate, Rng* rng) : rate_(rate), rng_(rng) {}

  bool active() const { return rng_ != nullptr && rate_ > 0.0; }
  // Mask of 0 or 1/(1-rate) entries; empty when inactive.
  Matrix sample(Eigen::Index rows, Eigen::Index cols);

 private:
  double rate_ = 0.0;
  Rng* rng_ = nullptr;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out, bool bias, Rng& rng);

  Matrix forward(const ParameterStore& p, const Matrix& x) const;
  Matrix backward(const ParameterStore& p, const Matrix& x, const Matrix& dy, ParameterStore& g) const;

  int in_dim() const { return in_; }
  int out_dim() const { return out_; }

 private:
  std::size_t weight_ = 0;
  std::size_t bias_ = 0;
  bool has_bias_ = false;
  int in_ = 0;
  int out_ = 0;
};

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

class LayerNorm {
 public:
  static constexpr double kEpsilon = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, int dim);

  Matrix forward(const ParameterStore& p, const Matrix& x, LayerNormCache& cache) const;
  Matrix backward(const ParameterStore& p, const LayerNormCache& cache, const Matrix& dy,
                  ParameterStore& g) const;

 private:
  std::size_t gain_ = 0;
  std::size_t shift_ = 0;
};

struct AttentionCache {
  Matrix x;
  Matrix q, k, v;
  std::vector<Matrix> probs;    // per head, softmax output
  std::vector<Matrix> dropout;  // per head, empty when inactive
  Matrix context;               // concatenated heads, input to the output map
  std::vector<std::uint8_t> key_mask;
};

// Multi-head self-attention. Keys whose mask entry is 0 receive zero weight.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name, int dim, int heads, Rng& rng);

  Matrix forward(const ParameterStore& p, const Matrix& x, std::span<const std::uint8_t> key_mask,
                 Dropout& dropout, AttentionCache& cache) const;
  Matrix backward(const ParameterStore& p, const AttentionCache& cache, const Matrix& dy,
                  ParameterStore& g) const;

  int heads() const { return heads_; }

 private:
  Linear q_, k_, v_, o_;
  int dim_ = 0;
  int heads_ = 1;
};

struct FeedForwardCache {
  Matrix x;
  Matrix pre;        // before GELU
  Matrix activated;  // after GELU and dropout
  Matrix dropout;
};

class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& name, int dim, int hidden, Rng& rng);

  Matrix forward(const ParameterStore& p, const Matrix& x, Dropout& dropout, FeedForwardCache& cache) const;
  Matrix backward(const ParameterStore& p, const FeedForwardCache& cache, const Matrix& dy,
                  ParameterStore& g) const;

 private:
  Linear in_, out_;
};

struct EncoderLayerCache {
  LayerNormCache ln1;
  AttentionCache attn;
  LayerNormCache ln2;
  FeedForwardCache ffn;
};

// Pre-norm residual block: x + MHA(LN(x)), then x + FFN(LN(x)).
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ParameterStore& store, const std::string& name, int dim, int heads, int ffn_dim, Rng& rng);

  Matrix forward(const ParameterStore& p, const Matrix& x, std::span<const std::uint8_t> mask,
                 Dropout& dropout, EncoderLayerCache& cache) const;
  Matrix backward(const ParameterStore& p, const EncoderLayerCache& cache, const Matrix& dy,
                  ParameterStore& g) const;

 private:
  LayerNorm ln1_;
  MultiHeadAttention attn_;
  LayerNorm ln2_;
  FeedForward ffn_;
};

// Fixed sinusoidal table: (p, 2i) = sin(p / 10000^(2i/dim)), (p, 2i+1) = cos(...).
Matrix sinusoidal_positions(int length, int dim);

}  // namespace nlq::nn
