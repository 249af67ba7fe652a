// SPDX-License-Identifier: Apache-2.0
#include "nlq/nn/layers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlq/core/errors.hpp"

namespace nlq::nn {

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return cdf + x * pdf;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

Matrix glorot_uniform(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix Dropout::sample(Eigen::Index rows, Eigen::Index cols) {
  if (!active()) return {};
  // Four 16-bit uniforms per engine draw; the keep probability is rounded
  // to a multiple of 2^-16.
  const auto threshold = static_cast<std::uint64_t>(std::llround((1.0 - rate_) * 65536.0));
  const double scale = 1.0 / (1.0 - rate_);
  Matrix m(rows, cols);
  double* out = m.data();
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; i += 4) {
    std::uint64_t bits = (*rng_)();
    for (Eigen::Index j = i; j < std::min(n, i + 4); ++j, bits >>= 16) out[j] = (bits & 0xffff) < threshold ? scale : 0.0;
  }
  return m;
}

// --- Linear ---------------------------------------------------------------

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out, bool bias, Rng& rng)
    : has_bias_(bias), in_(in), out_(out) {
  weight_ = store.add(name + ".weight", glorot_uniform(in, out, in, out, rng));
  if (bias) bias_ = store.add(name + ".bias", Matrix::Zero(1, out));
}

Matrix Linear::forward(const ParameterStore& p, const Matrix& x) const {
  if (x.cols() != in_) throw ShapeError("Linear: expected " + std::to_string(in_) + " input columns, got " +
                                        std::to_string(x.cols()));
  Matrix y(x.rows(), out_);
  y.noalias() = x * p.value(weight_);
  if (has_bias_) y.rowwise() += p.value(bias_).row(0);
  return y;
}

Matrix Linear::backward(const ParameterStore& p, const Matrix& x, const Matrix& dy, ParameterStore& g) const {
  g.value(weight_).noalias() += x.transpose() * dy;
  if (has_bias_) g.value(bias_).row(0) += dy.colwise().sum();
  Matrix dx(dy.rows(), in_);
  dx.noalias() = dy * p.value(weight_).transpose();
  return dx;
}

// --- LayerNorm ------------------------------------------------------------

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, int dim) {
  gain_ = store.add(name + ".gain", Matrix::Ones(1, dim));
  shift_ = store.add(name + ".shift", Matrix::Zero(1, dim));
}

Matrix LayerNorm::forward(const ParameterStore& p, const Matrix& x, LayerNormCache& cache) const {
  const Eigen::Index n = x.cols();
  cache.xhat.resize(x.rows(), n);
  cache.inv_std.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const auto centered = x.row(r).array() - mean;
    const double var = centered.square().sum() / static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kEpsilon);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = centered * inv;
  }
  Matrix y = cache.xhat.array().rowwise() * p.value(gain_).row(0).array();
  y.rowwise() += p.value(shift_).row(0);
  return y;
}

Matrix LayerNorm::backward(const ParameterStore& p, const LayerNormCache& cache, const Matrix& dy,
                           ParameterStore& g) const {
  g.value(gain_).row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  g.value(shift_).row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * p.value(gain_).row(0).array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double sum = dxhat.row(r).sum();
    const double dot = dxhat.row(r).dot(cache.xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / n) *
                (n * dxhat.row(r).array() - sum - cache.xhat.row(r).array() * dot).matrix();
  }
  return dx;
}

// --- MultiHeadAttention ---------------------------------------------------

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name, int dim, int heads,
                                       Rng& rng)
    : dim_(dim), heads_(heads) {
  if (heads <= 0 || dim % heads != 0) throw InvalidArgument("attention: dim must be divisible by heads");
  q_ = Linear(store, name + ".query", dim, dim, true, rng);
  // A key bias only shifts every score in a row by the same amount, which the
  // softmax cancels; it would carry an identically-zero gradient.
  k_ = Linear(store, name + ".key", dim, dim, false, rng);
  v_ = Linear(store, name + ".value", dim, dim, true, rng);
  o_ = Linear(store, name + ".output", dim, dim, true, rng);
}

Matrix MultiHeadAttention::forward(const ParameterStore& p, const Matrix& x,
                                   std::span<const std::uint8_t> key_mask, Dropout& dropout,
                                   AttentionCache& cache) const {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(key_mask.size()) != n) throw ShapeError("attention: mask length mismatch");
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  cache.x = x;
  cache.key_mask.assign(key_mask.begin(), key_mask.end());
  cache.q = q_.forward(p, x);
  cache.k = k_.forward(p, x);
  cache.v = v_.forward(p, x);
  cache.probs.assign(heads_, Matrix());
  cache.dropout.assign(heads_, Matrix());
  cache.context.resize(n, dim_);

  RowVector key_bias(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    key_bias(j) = key_mask[j] ? 0.0 : -std::numeric_limits<double>::infinity();
  }

  for (int h = 0; h < heads_; ++h) {
    const auto qh = cache.q.middleCols(h * dh, dh);
    const auto kh = cache.k.middleCols(h * dh, dh);
    const auto vh = cache.v.middleCols(h * dh, dh);
    Matrix scores(n, n);
    scores.noalias() = qh * kh.transpose();
    scores *= scale;
    scores.rowwise() += key_bias;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double mx = scores.row(r).maxCoeff();
      scores.row(r) = (scores.row(r).array() - mx).exp().matrix();
      scores.row(r) /= scores.row(r).sum();
      assert(std::abs(scores.row(r).sum() - 1.0) < 1e-6);
    }
    Matrix& probs = cache.probs[h];
    probs = std::move(scores);
    Matrix& mask = cache.dropout[h];
    mask = dropout.sample(n, n);
    if (mask.size() > 0) {
      const Matrix dropped = probs.cwiseProduct(mask);
      cache.context.middleCols(h * dh, dh).noalias() = dropped * vh;
    } else {
      cache.context.middleCols(h * dh, dh).noalias() = probs * vh;
    }
  }
  return o_.forward(p, cache.context);
}

Matrix MultiHeadAttention::backward(const ParameterStore& p, const AttentionCache& cache, const Matrix& dy,
                                    ParameterStore& g) const {
  const Eigen::Index n = cache.x.rows();
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Matrix dcontext = o_.backward(p, cache.context, dy, g);
  Matrix dq(n, dim_), dk(n, dim_), dv(n, dim_);

  for (int h = 0; h < heads_; ++h) {
    const auto qh = cache.q.middleCols(h * dh, dh);
    const auto kh = cache.k.middleCols(h * dh, dh);
    const auto vh = cache.v.middleCols(h * dh, dh);
    const auto dctx = dcontext.middleCols(h * dh, dh);
    const Matrix& probs = cache.probs[h];
    const Matrix& mask = cache.dropout[h];

    Matrix dprobs(n, n);
    dprobs.noalias() = dctx * vh.transpose();
    if (mask.size() > 0) {
      dv.middleCols(h * dh, dh).noalias() = probs.cwiseProduct(mask).transpose() * dctx;
      dprobs = dprobs.cwiseProduct(mask);
    } else {
      dv.middleCols(h * dh, dh).noalias() = probs.transpose() * dctx;
    }
    // softmax backward: dS = P * (dP - rowsum(dP * P))
    const Eigen::VectorXd inner = dprobs.cwiseProduct(probs).rowwise().sum();
    Matrix dscores = probs.array() * (dprobs.colwise() - inner).array();
    dscores *= scale;
    dq.middleCols(h * dh, dh).noalias() = dscores * kh;
    dk.middleCols(h * dh, dh).noalias() = dscores.transpose() * qh;
  }

  Matrix dx = q_.backward(p, cache.x, dq, g);
  dx += k_.backward(p, cache.x, dk, g);
  dx += v_.backward(p, cache.x, dv, g);
  return dx;
}

// --- FeedForward ----------------------------------------------------------

FeedForward::FeedForward(ParameterStore& store, const std::string& name, int dim, int hidden, Rng& rng) {
  in_ = Linear(store, name + ".in", dim, hidden, true, rng);
  out_ = Linear(store, name + ".out", hidden, dim, true, rng);
}

Matrix FeedForward::forward(const ParameterStore& p, const Matrix& x, Dropout& dropout,
                            FeedForwardCache& cache) const {
  cache.x = x;
  cache.pre = in_.forward(p, x);
  cache.activated = cache.pre.unaryExpr([](double v) { return gelu(v); });
  cache.dropout = dropout.sample(cache.pre.rows(), cache.pre.cols());
  if (cache.dropout.size() > 0) cache.activated = cache.activated.cwiseProduct(cache.dropout);
  return out_.forward(p, cache.activated);
}

Matrix FeedForward::backward(const ParameterStore& p, const FeedForwardCache& cache, const Matrix& dy,
                             ParameterStore& g) const {
  Matrix da = out_.backward(p, cache.activated, dy, g);
  if (cache.dropout.size() > 0) da = da.cwiseProduct(cache.dropout);
  const Matrix dpre = da.cwiseProduct(cache.pre.unaryExpr([](double v) { return gelu_grad(v); }));
  return in_.backward(p, cache.x, dpre, g);
}

// --- EncoderLayer ---------------------------------------------------------

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& name, int dim, int heads, int ffn_dim,
                           Rng& rng) {
  ln1_ = LayerNorm(store, name + ".ln1", dim);
  attn_ = MultiHeadAttention(store, name + ".attn", dim, heads, rng);
  ln2_ = LayerNorm(store, name + ".ln2", dim);
  ffn_ = FeedForward(store, name + ".ffn", dim, ffn_dim, rng);
}

Matrix EncoderLayer::forward(const ParameterStore& p, const Matrix& x, std::span<const std::uint8_t> mask,
                             Dropout& dropout, EncoderLayerCache& cache) const {
  Matrix h = x + attn_.forward(p, ln1_.forward(p, x, cache.ln1), mask, dropout, cache.attn);
  Matrix out = h + ffn_.forward(p, ln2_.forward(p, h, cache.ln2), dropout, cache.ffn);
  return out;
}

Matrix EncoderLayer::backward(const ParameterStore& p, const EncoderLayerCache& cache, const Matrix& dy,
                              ParameterStore& g) const {
  Matrix dh = dy + ln2_.backward(p, cache.ln2, ffn_.backward(p, cache.ffn, dy, g), g);
  return dh + ln1_.backward(p, cache.ln1, attn_.backward(p, cache.attn, dh, g), g);
}

// --- positions ------------------------------------------------------------

Matrix sinusoidal_positions(int length, int dim) {
  if (length <= 0) throw InvalidArgument("sinusoidal_positions: length must be positive");
  if (dim <= 0 || dim % 2 != 0) throw InvalidArgument("sinusoidal_positions: dim must be positive and even");
  Matrix m(length, dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(dim));
    for (int pos = 0; pos < length; ++pos) {
      m(pos, 2 * i) = std::sin(pos * freq);
      m(pos, 2 * i + 1) = std::cos(pos * freq);
    }
  }
  return m;
}

}  // namespace nlq::nn
