// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "nlq/core/errors.hpp"
#include "nlq/data/batching.hpp"
#include "nlq/data/synthetic.hpp"
#include "nlq/inference/pipeline.hpp"
#include "nlq/inference/predictions_io.hpp"
#include "nlq/inference/proposals.hpp"

using nlq::Matrix;
using nlq::TimeSpan;
using nlq::Units;
using namespace nlq::inference;

namespace {

TimeSpan idx(double s, double e) { return {s, e, Units::index}; }

Proposal make(double s, double e, double conf, std::size_t index = 0) {
  Proposal p;
  p.span_sec = {s, e, Units::seconds};
  p.confidence = conf;
  p.score = conf;
  p.source.flat_index = index;
  return p;
}

std::vector<Proposal> random_proposals(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 50.0), len(0.5, 15.0);
  std::uniform_int_distribution<int> conf(0, 9);  // coarse scores force ties
  std::vector<Proposal> out;
  for (int i = 0; i < n; ++i) {
    const double s = u(rng);
    out.push_back(make(s, s + len(rng), conf(rng) / 10.0, static_cast<std::size_t>(i)));
  }
  return out;
}

// Independent greedy oracle: order by (score desc, start asc, index asc),
// keep anything not overlapping a kept proposal by more than the threshold.
std::vector<std::size_t> greedy_oracle(const std::vector<Proposal>& ps, double thr, std::size_t k) {
  std::vector<std::size_t> order(ps.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ps[a].score != ps[b].score) return ps[a].score > ps[b].score;
    if (ps[a].span_sec.start != ps[b].span_sec.start) return ps[a].span_sec.start < ps[b].span_sec.start;
    return ps[a].source.flat_index < ps[b].source.flat_index;
  });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool ok = true;
    for (std::size_t j : kept) {
      const auto& x = ps[i].span_sec;
      const auto& y = ps[j].span_sec;
      const double inter = std::max(0.0, std::min(x.end, y.end) - std::max(x.start, y.start));
      const double uni = x.length() + y.length() - inter;
      if (uni > 0 && inter / uni > thr) ok = false;
    }
    if (ok) kept.push_back(i);
    if (kept.size() == k) break;
  }
  return kept;
}

}  // namespace

TEST_CASE("anchor decoding") {
  const auto anchors = nlq::build_lattice({{0.2}, 10});  // w = 2; anchor t=4 is [3.5, 5.5]
  Matrix off = Matrix::Zero(10, 2);
  auto d = decode_anchor_spans(off, anchors);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].span == anchors.spans[i]);

  off(4, 0) = -0.25;  // start 3.5 - 0.5 = 3.0
  off(4, 1) = 0.75;   // end 5.5 + 1.5 = 7.0
  d = decode_anchor_spans(off, anchors);
  CHECK(d[4].span == idx(3.0, 7.0));
  CHECK(d[4].start_scale == 2.0);
  CHECK(d[4].end_scale == 2.0);

  off(4, 0) = 1.75;   // start 7.0
  off(4, 1) = -1.25;  // end 3.0 -> swapped
  d = decode_anchor_spans(off, anchors);
  CHECK(d[4].span == idx(3.0, 7.0));
  CHECK(d[4].start_col == 1);
  CHECK(d[4].end_col == 0);

  off(0, 0) = -5.0;  // clamps at 0
  d = decode_anchor_spans(off, anchors);
  CHECK(d[0].span.start == 0.0);
  CHECK(d[0].start_scale == 0.0);

  CHECK_THROWS_AS(decode_anchor_spans(Matrix::Zero(9, 2), anchors), nlq::ShapeError);
}

TEST_CASE("anchor decoding hand values") {
  // Every anchor set to [4, 6] with window 2.
  nlq::AnchorSet anchors{std::vector<TimeSpan>(10, idx(4, 6)), {2.0}, {{0.2}, 10}};
  Matrix off = Matrix::Zero(10, 2);
  off(0, 0) = -0.5;
  off(0, 1) = 0.5;
  off(1, 0) = 1.5;
  off(1, 1) = -1.5;
  const auto d = decode_anchor_spans(off, anchors);
  CHECK(d[0].span == idx(3, 7));
  CHECK(d[1].span == idx(3, 7));
  CHECK(d[2].span == idx(4, 6));
}

TEST_CASE("anchor decoding matches the offset formula") {
  const auto anchors = nlq::build_lattice({{0.2, 0.4}, 10});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix off(10, 4);
  for (auto& v : off.reshaped()) v = n(rng);
  const auto d = decode_anchor_spans(off, anchors);
  for (int t = 0; t < 10; ++t) {
    for (int k = 0; k < 2; ++k) {
      const auto& a = anchors.at(t, k);
      const double w = anchors.window_sizes[static_cast<std::size_t>(k)];
      double s = std::clamp(a.start + off(t, 2 * k) * w, 0.0, 10.0);
      double e = std::clamp(a.end + off(t, 2 * k + 1) * w, 0.0, 10.0);
      if (s > e) std::swap(s, e);
      CHECK(d[anchors.flat_index(t, k)].span == idx(s, e));
    }
  }
}

TEST_CASE("proposals are reported in seconds") {
  const auto anchors = nlq::build_lattice({{0.2}, 10});
  nlq::nn::ModelOutput out;
  out.confidence = Matrix::Constant(10, 1, 0.25);
  out.confidence(3, 0) = 0.9;
  out.offsets = Matrix::Zero(10, 2);
  const auto ps = decode_proposals(out, anchors, nlq::FrameGrid(10, 50.0));
  REQUIRE(ps.size() == 10);
  CHECK(ps[3].confidence == 0.9);
  CHECK(ps[3].score == 0.9);
  CHECK(ps[3].span_sec.units == Units::seconds);
  CHECK(ps[3].span_sec.start == doctest::Approx(12.5));
  CHECK(ps[3].span_sec.end == doctest::Approx(22.5));
  CHECK(ps[3].source.t == 3);
  for (const auto& p : ps) {
    CHECK(p.span_sec.start >= 0.0);
    CHECK(p.span_sec.end <= 50.0);
  }
}

TEST_CASE("anchor-free decoding") {
  // softplus^-1(y) = log(exp(y) - 1)
  auto inv = [](double y) { return std::log(std::expm1(y)); };
  Matrix off = Matrix::Constant(100, 2, -40.0);  // extents ~ 0
  off(5, 0) = inv(0.02);
  off(5, 1) = inv(0.03);
  const auto d = decode_anchor_free_spans(off, 100);
  REQUIRE(d.size() == 100);
  CHECK(d[5].span.start == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(d[5].span.end == doctest::Approx(8.5).epsilon(1e-12));
  CHECK(d[7].span.start == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(d[7].span.length() == doctest::Approx(0.0).epsilon(1e-12));

  nlq::nn::ModelOutput out;
  out.confidence = Matrix::Constant(100, 1, 0.5);
  out.offsets = off;
  CHECK(decode_anchor_free(out, nlq::FrameGrid(100, 100.0)).size() == 100);
}

TEST_CASE("nms hand example") {
  const std::vector<Proposal> ps{make(0, 10, 0.9, 0), make(1, 11, 0.8, 1), make(20, 30, 0.7, 2)};
  const auto kept = nms(ps, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].span_sec.start == 0.0);
  CHECK(kept[1].span_sec.start == 20.0);
  CHECK(nms(ps, 1.0).size() == 3);
  CHECK(nms(ps, 0.0).size() == 3);
  CHECK(nms(ps, 0.82).size() == 3);  // 9/11 = 0.818 is not above 0.82
  CHECK_THROWS_AS(nms(ps, -0.1), nlq::InvalidArgument);
  CHECK_THROWS_AS(nms(ps, 1.1), nlq::InvalidArgument);
}

TEST_CASE("nms and top_k match the greedy oracle") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 20);
    const auto ps = random_proposals(rng, n);
    for (double thr : {0.1, 0.3, 0.5, 0.7}) {
      const auto kept = top_k(nms(ps, thr), 5);
      const auto want = greedy_oracle(ps, thr, 5);
      REQUIRE(kept.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(kept[i].source.flat_index == ps[want[i]].source.flat_index);
      for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = i + 1; j < kept.size(); ++j) CHECK(nlq::iou(kept[i].span_sec, kept[j].span_sec) <= thr);
      }
    }
  }
}

TEST_CASE("top_k") {
  const std::vector<Proposal> ps{make(0, 1, 0.3, 0), make(2, 3, 0.9, 1), make(4, 5, 0.5, 2)};
  const auto two = top_k(ps, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].confidence == 0.9);
  CHECK(two[1].confidence == 0.5);
  CHECK(top_k(ps, 10).size() == 3);
  CHECK_THROWS_AS(top_k(ps, 0), nlq::InvalidArgument);
}

TEST_CASE("rerank") {
  const std::vector<Proposal> ps{make(0, 1, 0.5, 0), make(2, 3, 0.4, 1)};
  CHECK(rerank(ps, {})[0].source.flat_index == 0);

  const std::vector<RerankChannel> one{{"clip_sim", 1.0, {0.0, 0.3}}};
  const auto r = rerank(ps, one);
  CHECK(r[0].source.flat_index == 1);
  CHECK(r[0].score == doctest::Approx(0.7));
  CHECK(r[0].channel_scores.at("clip_sim") == 0.3);
  CHECK(r[1].score == doctest::Approx(0.5));

  const std::vector<RerankChannel> neg{{"neg", 1.0, {-0.5, -0.4}}};
  const auto z = rerank(ps, neg);
  CHECK(z[0].source.flat_index == 0);
  CHECK(z[1].source.flat_index == 1);

  const std::vector<RerankChannel> bad{{"short", 1.0, {0.1}}};
  try {
    rerank(ps, bad);
    FAIL("expected an alignment error");
  } catch (const nlq::AlignmentError& e) {
    CHECK(std::string(e.what()).find("short") != std::string::npos);
  }
}

TEST_CASE("rerank ordering is unchanged by a constant channel shift") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto ps = random_proposals(rng, 12);
    RerankChannel c{"c", 0.5, std::vector<double>(12)};
    for (auto& v : c.scores) v = std::round(u(rng) * 8) / 8;  // dyadic values keep sums exact
    RerankChannel shifted = c;
    for (auto& v : shifted.scores) v += 0.25;
    const auto a = rerank(ps, std::vector<RerankChannel>{c});
    const auto b = rerank(ps, std::vector<RerankChannel>{shifted});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].source.flat_index == b[i].source.flat_index);
    RerankChannel zero{"z", 1.0, std::vector<double>(12, 0.0)};
    const auto ident = rerank(ps, std::vector<RerankChannel>{zero});
    std::stable_sort(ps.begin(), ps.end(), [](const Proposal& x, const Proposal& y) { return x.confidence > y.confidence; });
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ident[i].source.flat_index == ps[i].source.flat_index);
  }
}

TEST_CASE("prediction and channel files round trip and re-rank") {
  const auto dir = std::filesystem::temp_directory_path() / "nlq_test_preds";
  std::filesystem::create_directories(dir);
  std::vector<QueryPrediction> preds{
      {"q1", "v1", {{0.0, 5.5, 0.9, {}}, {10.0, 12.25, 0.4, {}}}},
      {"q2", "v1", {{3.0, 4.0, 0.8, {}}}},
  };
  write_predictions(dir / "p.jsonl", preds);
  const auto back = read_predictions(dir / "p.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].proposals[1].end_sec == 12.25);
  CHECK(back[1].query_id == "q2");

  write_channels(dir / "c.jsonl", {{"q1", "clip_sim", {0.0, 0.6}}, {"q2", "clip_sim", {0.1}}});
  const auto ch = read_channels(dir / "c.jsonl");
  const auto rr = rerank_predictions(back, {{ch, 1.0}});
  CHECK(rr[0].proposals[0].start_sec == 10.0);
  CHECK(rr[0].proposals[0].score == doctest::Approx(1.0));
  CHECK(rr[0].proposals[0].channel_scores.at("clip_sim") == 0.6);
  write_predictions(dir / "r.jsonl", rr);
  CHECK(read_predictions(dir / "r.jsonl")[0].proposals[0].channel_scores.at("clip_sim") == 0.6);

  write_channels(dir / "m.jsonl", {{"q1", "clip_sim", {0.0, 0.6}}});
  CHECK_THROWS_AS(rerank_predictions(back, {{read_channels(dir / "m.jsonl"), 1.0}}), nlq::AlignmentError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("dataset prediction respects top_k and video bounds") {
  nlq::data::SyntheticSpec spec;
  spec.num_videos = 2;
  spec.frames_per_video = 64;
  const auto ds = nlq::data::generate_synthetic(spec).dataset;
  nlq::nn::EncoderConfig cfg;
  cfg.hidden_dim = 16;
  cfg.num_heads = 2;
  cfg.cross_layers = 1;
  cfg.video_input_dim = ds.video_dim();
  cfg.text_input_dim = ds.text_dim();
  cfg.num_scales = 2;
  const nlq::nn::GroundingModel model(cfg, 0);
  const nlq::AnchorConfig anchors{{0.05, 0.1}, 32};
  const auto preds = predict_dataset(model, ds, anchors, {5, 0.5});
  REQUIRE(preds.size() == 4);
  for (const auto& p : preds) {
    CHECK(p.proposals.size() == 5);
    for (std::size_t i = 1; i < p.proposals.size(); ++i) CHECK(p.proposals[i - 1].score >= p.proposals[i].score);
    for (const auto& s : p.proposals) {
      CHECK(s.start_sec >= 0.0);
      CHECK(s.end_sec <= 64.0);
    }
  }
  CHECK_THROWS_AS(predict_dataset(model, ds, {{0.05}, 32}, {5, 0.5}), nlq::InvalidArgument);
}
