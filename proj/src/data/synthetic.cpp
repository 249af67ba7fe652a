// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "nlq/core/errors.hpp"

namespace nlq::data {

namespace {

constexpr int kPlacementAttempts = 100;

struct Segment {
  double start;
  double end;
};

bool overlaps(const Segment& a, const std::vector<Segment>& others) {
  return std::any_of(others.begin(), others.end(),
                     [&](const Segment& b) { return a.start < b.end && b.start < a.end; });
}

// Raw rows whose centers fall inside the segment; at least the row holding
// the segment center.
std::vector<int> rows_in(const Segment& s, int num_rows) {
  std::vector<int> rows;
  for (int r = 0; r < num_rows; ++r) {
    const double c = r + 0.5;
    if (c >= s.start && c <= s.end) rows.push_back(r);
  }
  if (rows.empty()) {
    rows.push_back(std::clamp(static_cast<int>(std::floor(0.5 * (s.start + s.end))), 0, num_rows - 1));
  }
  return rows;
}

std::string video_name(int v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%04d", v);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (num_videos < 1) throw InvalidArgument("SyntheticSpec: num_videos must be >= 1");
  if (frames_per_video < 2) throw InvalidArgument("SyntheticSpec: frames_per_video must be >= 2");
  if (feature_dim < 1 || text_dim < 1) throw InvalidArgument("SyntheticSpec: dims must be positive");
  if (tokens_per_query < 1) throw InvalidArgument("SyntheticSpec: tokens_per_query must be >= 1");
  if (queries_per_video < 1) throw InvalidArgument("SyntheticSpec: queries_per_video must be >= 1");
  if (!(span_min > 0.0 && span_max <= 1.0 && span_min <= span_max)) {
    throw InvalidArgument("SyntheticSpec: span fraction range must satisfy 0 < min <= max <= 1");
  }
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("SyntheticSpec: noise_sigma must be nonnegative");
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto noise = [&] { return spec.noise_sigma > 0.0 ? spec.noise_sigma * normal(rng) : 0.0; };

  SyntheticDataset out;
  out.projection.resize(spec.feature_dim, spec.text_dim);
  for (Eigen::Index i = 0; i < out.projection.size(); ++i) out.projection.data()[i] = normal(rng);
  out.projection = round_to_f32(out.projection);

  const double duration = spec.frames_per_video;
  std::vector<std::vector<Segment>> spans(spec.num_videos);
  std::vector<std::string> query_ids;

  // Annotations, signatures and tokens first, so distractors can borrow
  // signatures from any video.
  for (int v = 0; v < spec.num_videos; ++v) {
    VideoAnnotations video;
    video.video_id = video_name(v);
    video.duration_sec = duration;
    for (int q = 0; q < spec.queries_per_video; ++q) {
      QueryAnnotation ann;
      ann.video_id = video.video_id;
      ann.query_id = video.video_id + "_q" + std::to_string(q);
      ann.text = "synthetic query " + ann.query_id;

      RowVector u(spec.text_dim);
      for (auto& x : u) x = normal(rng);
      u = round_to_f32(u / u.norm());

      const double fraction = spec.span_min + (spec.span_max - spec.span_min) * unit(rng);
      const double length = fraction * duration;
      Segment seg{0.0, length};
      for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
        const double start = (duration - length) * unit(rng);
        seg = {start, start + length};
        if (!overlaps(seg, spans[v])) break;
      }
      spans[v].push_back(seg);
      ann.start_sec = seg.start;
      ann.end_sec = seg.end;

      Matrix tokens(spec.tokens_per_query, spec.text_dim);
      for (int l = 0; l < spec.tokens_per_query; ++l) {
        for (int d = 0; d < spec.text_dim; ++d) tokens(l, d) = u(d) + noise();
      }
      out.dataset.text_features.emplace(ann.query_id, round_to_f32(tokens));
      out.signatures.emplace(ann.query_id, u);
      query_ids.push_back(ann.query_id);
      video.queries.push_back(std::move(ann));
    }
    out.dataset.annotations.videos.push_back(std::move(video));
  }

  const int qpv = spec.queries_per_video;
  for (int v = 0; v < spec.num_videos; ++v) {
    Matrix frames(spec.frames_per_video, spec.feature_dim);
    for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = normal(rng);

    auto plant = [&](const Segment& seg, const RowVector& signature) {
      const RowVector image = (out.projection * signature.transpose()).transpose();
      for (int r : rows_in(seg, spec.frames_per_video)) {
        for (int d = 0; d < spec.feature_dim; ++d) frames(r, d) = image(d) + noise();
      }
    };

    if (spec.num_videos > 1) {
      std::vector<Segment> occupied = spans[v];
      for (int n = 0; n < qpv; ++n) {
        int other = static_cast<int>(unit(rng) * (spec.num_videos - 1));
        if (other >= v) ++other;
        const int q = std::min(qpv - 1, static_cast<int>(unit(rng) * qpv));
        const RowVector& sig = out.signatures.at(query_ids[other * qpv + q]);
        const double length = (spec.span_min + (spec.span_max - spec.span_min) * unit(rng)) * duration;
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
          const double start = (duration - length) * unit(rng);
          const Segment seg{start, start + length};
          if (overlaps({seg.start - 1.0, seg.end + 1.0}, occupied)) continue;
          plant(seg, sig);
          occupied.push_back(seg);
          break;
        }
      }
    }
    for (int q = 0; q < qpv; ++q) plant(spans[v][q], out.signatures.at(query_ids[v * qpv + q]));
    out.dataset.video_features.emplace(video_name(v), round_to_f32(frames));
  }
  return out;
}

}  // namespace nlq::data
