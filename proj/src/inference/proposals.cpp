// SPDX-License-Identifier: Apache-2.0
#include "nlq/inference/proposals.hpp"

#include <algorithm>
#include <utility>

#include "nlq/core/errors.hpp"
#include "nlq/nn/layers.hpp"

namespace nlq::inference {

namespace {

struct Endpoint {
  double value;
  int col;
  double scale;
};

Endpoint clamp_endpoint(double raw, int col, double scale, double hi) {
  if (raw < 0.0) return {0.0, col, 0.0};
  if (raw > hi) return {hi, col, 0.0};
  return {raw, col, scale};
}

DecodedSpan make_decoded(int t, Endpoint s, Endpoint e) {
  if (s.value > e.value) std::swap(s, e);
  return {{s.value, e.value, Units::index}, t, s.col, s.scale, e.col, e.scale};
}

std::vector<Proposal> to_proposals(const std::vector<DecodedSpan>& spans, const Matrix& confidence,
                                   const FrameGrid& grid, nn::HeadKind kind) {
  const int K = static_cast<int>(confidence.cols());
  std::vector<Proposal> out;
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Proposal p;
    p.source = {kind, spans[i].t, static_cast<int>(i) % K, i};
    p.span_sec = index_to_sec(spans[i].span, grid);
    p.confidence = confidence(p.source.t, p.source.k);
    p.score = p.confidence;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<DecodedSpan> decode_anchor_spans(const Matrix& offsets, const AnchorSet& anchors) {
  const int T = anchors.num_frames();
  const int K = anchors.num_scales();
  if (offsets.rows() != T || offsets.cols() != 2 * K) {
    throw ShapeError("decode_proposals: offsets must be T x 2K");
  }
  std::vector<DecodedSpan> out;
  out.reserve(anchors.size());
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      const TimeSpan& a = anchors.at(t, k);
      const double w = anchors.window_sizes[k];
      const Endpoint s = clamp_endpoint(a.start + offsets(t, 2 * k) * w, 2 * k, w, T);
      const Endpoint e = clamp_endpoint(a.end + offsets(t, 2 * k + 1) * w, 2 * k + 1, w, T);
      out.push_back(make_decoded(t, s, e));
    }
  }
  return out;
}

std::vector<DecodedSpan> decode_anchor_free_spans(const Matrix& offsets, int num_frames) {
  if (offsets.rows() != num_frames || offsets.cols() != 2) {
    throw ShapeError("decode_anchor_free: offsets must be T x 2");
  }
  const double T = num_frames;
  std::vector<DecodedSpan> out;
  out.reserve(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    const double c = t + 0.5;
    const double left = offsets(t, 0);
    const double right = offsets(t, 1);
    // d softplus(x) / dx = sigmoid(x)
    const Endpoint s = clamp_endpoint(c - nn::softplus(left) * T, 0, -T * nn::sigmoid(left), T);
    const Endpoint e = clamp_endpoint(c + nn::softplus(right) * T, 1, T * nn::sigmoid(right), T);
    out.push_back(make_decoded(t, s, e));
  }
  return out;
}

std::vector<Proposal> decode_proposals(const nn::ModelOutput& output, const AnchorSet& anchors,
                                       const FrameGrid& grid) {
  if (grid.num_frames() != anchors.num_frames()) throw ShapeError("decode_proposals: grid and anchors disagree on T");
  if (output.confidence.rows() != anchors.num_frames() || output.confidence.cols() != anchors.num_scales()) {
    throw ShapeError("decode_proposals: confidence must be T x K");
  }
  return to_proposals(decode_anchor_spans(output.offsets, anchors), output.confidence, grid, nn::HeadKind::anchor);
}

std::vector<Proposal> decode_anchor_free(const nn::ModelOutput& output, const FrameGrid& grid) {
  if (output.confidence.rows() != grid.num_frames() || output.confidence.cols() != 1) {
    throw ShapeError("decode_anchor_free: confidence must be T x 1");
  }
  return to_proposals(decode_anchor_free_spans(output.offsets, grid.num_frames()), output.confidence, grid,
                      nn::HeadKind::anchor_free);
}

bool ranks_before(const Proposal& a, const Proposal& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.span_sec.start != b.span_sec.start) return a.span_sec.start < b.span_sec.start;
  return a.source.flat_index < b.source.flat_index;
}

std::vector<Proposal> nms(std::vector<Proposal> proposals, double iou_threshold) {
  if (iou_threshold < 0.0 || iou_threshold > 1.0) throw InvalidArgument("nms: threshold must lie in (0, 1], or 0 to disable");
  std::sort(proposals.begin(), proposals.end(), ranks_before);
  if (iou_threshold == 0.0) return proposals;
  std::vector<Proposal> kept;
  for (auto& p : proposals) {
    const bool clear = std::all_of(kept.begin(), kept.end(),
                                   [&](const Proposal& q) { return iou(p.span_sec, q.span_sec) <= iou_threshold; });
    if (clear) kept.push_back(std::move(p));
  }
  return kept;
}

std::vector<Proposal> top_k(std::vector<Proposal> proposals, int k) {
  if (k < 1) throw InvalidArgument("top_k: k must be >= 1");
  const auto n = std::min<std::size_t>(proposals.size(), static_cast<std::size_t>(k));
  std::partial_sort(proposals.begin(), proposals.begin() + static_cast<std::ptrdiff_t>(n), proposals.end(),
                    ranks_before);
  proposals.resize(n);
  return proposals;
}

std::vector<Proposal> rerank(std::vector<Proposal> proposals, std::span<const RerankChannel> channels) {
  for (const auto& c : channels) {
    if (c.scores.size() != proposals.size()) {
      throw AlignmentError("rerank: channel '" + c.name + "' has " + std::to_string(c.scores.size()) +
                           " scores for " + std::to_string(proposals.size()) + " proposals");
    }
  }
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    Proposal& p = proposals[i];
    double s = p.confidence;
    for (const auto& c : channels) {
      s += c.weight * c.scores[i];
      p.channel_scores[c.name] = c.scores[i];
    }
    p.score = s;
  }
  std::stable_sort(proposals.begin(), proposals.end(),
                   [](const Proposal& a, const Proposal& b) { return a.score > b.score; });
  return proposals;
}

}  // namespace nlq::inference
