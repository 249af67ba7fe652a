// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "nlq/anchors/anchors.hpp"
#include "nlq/core/matrix.hpp"
#include "nlq/core/span.hpp"
#include "nlq/nn/model.hpp"

namespace nlq::inference {

struct ProposalSource {
  nn::HeadKind kind = nn::HeadKind::anchor;
  int t = 0;
  int k = 0;
  std::size_t flat_index = 0;  // t * K + k
};

struct Proposal {
  TimeSpan span_sec;
  double confidence = 0.0;
  double score = 0.0;  // ranking score; equals confidence until re-ranked
  std::map<std::string, double> channel_scores;
  ProposalSource source;
};

// A decoded span in index units with the route its endpoints took back to
// the raw offsets: d(start)/d(offsets[t, start_col]) = start_scale, likewise
// for the end. A zero scale marks a clamped endpoint.
struct DecodedSpan {
  TimeSpan span;
  int t = 0;
  int start_col = 0;
  double start_scale = 0.0;
  int end_col = 1;
  double end_scale = 0.0;
};

// Anchor (t, k) with offsets (d_s, d_e) decodes to
// clamp([a_s + d_s * w_k, a_e + d_e * w_k], 0, T), endpoints swapped if inverted.
std::vector<DecodedSpan> decode_anchor_spans(const Matrix& offsets, const AnchorSet& anchors);

// Frame t with extents softplus(raw) = (l, r) decodes to
// clamp([t + 0.5 - l*T, t + 0.5 + r*T], 0, T).
std::vector<DecodedSpan> decode_anchor_free_spans(const Matrix& offsets, int num_frames);

std::vector<Proposal> decode_proposals(const nn::ModelOutput& output, const AnchorSet& anchors,
                                       const FrameGrid& grid);
std::vector<Proposal> decode_anchor_free(const nn::ModelOutput& output, const FrameGrid& grid);

// Ranking order: score descending, then earlier start, then lower source index.
bool ranks_before(const Proposal& a, const Proposal& b);

// Greedy suppression: keeps a proposal iff its IoU with every kept one is
// <= iou_threshold. A threshold of 0 disables suppression.
std::vector<Proposal> nms(std::vector<Proposal> proposals, double iou_threshold);

std::vector<Proposal> top_k(std::vector<Proposal> proposals, int k);

struct RerankChannel {
  std::string name;
  double weight = 1.0;
  std::vector<double> scores;  // aligned with the proposal list
};

// score_i = confidence_i + sum_c weight_c * channel_c[i], stable re-sort.
std::vector<Proposal> rerank(std::vector<Proposal> proposals, std::span<const RerankChannel> channels);

}  // namespace nlq::inference
