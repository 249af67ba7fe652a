// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "nlq/core/errors.hpp"
#include "nlq/eval/metrics.hpp"
#include "support/metric_oracle.hpp"

using nlq::TimeSpan;
using nlq::Units;
using namespace nlq::eval;
using nlq::data::QueryAnnotation;
using nlq::inference::QueryPrediction;

namespace {

TimeSpan sec(double s, double e) { return {s, e, Units::seconds}; }

}  // namespace

TEST_CASE("query_hit hand example") {
  const std::vector<TimeSpan> ranked{sec(6, 10), sec(20, 22), sec(1, 6)};
  const TimeSpan gt = sec(0, 5);
  CHECK_FALSE(query_hit(ranked, gt, 1, 0.5));
  CHECK(query_hit(ranked, gt, 5, 0.5));
  CHECK_FALSE(query_hit(ranked, gt, 2, 0.5));
  CHECK_FALSE(query_hit({}, gt, 5, 0.3));
  const std::vector<TimeSpan> exact{sec(0, 5)};
  CHECK(query_hit(exact, gt, 1, 0.99));
  // IoU exactly at the threshold is a miss.
  const std::vector<TimeSpan> half{sec(0, 2.5)};
  CHECK_FALSE(query_hit(half, gt, 1, 0.5));
  CHECK(query_hit(half, gt, 1, 0.49));
}

TEST_CASE("evaluate hand example") {
  const std::vector<QueryAnnotation> ann{{"v", "A", "", 0, 5}, {"v", "B", "", 0, 5}};
  // A: rank-1 [0, 3] has IoU 0.6. B: only rank 3 overlaps, IoU 4/6.
  const std::vector<QueryPrediction> preds{
      {"A", "v", {{0, 3, 0.9, {}}}},
      {"B", "v", {{6, 10, 0.9, {}}, {20, 22, 0.8, {}}, {1, 6, 0.7, {}}}},
  };
  const auto r = evaluate(preds, ann);
  CHECK(r.total_queries == 2);
  CHECK(r.recall_at(1, 0.5) == 0.5);
  CHECK(r.recall_at(5, 0.5) == 1.0);
  CHECK(r.recall_at(1, 0.3) == 0.5);
  CHECK(r.recall_at(5, 0.3) == 1.0);
  const auto j = r.to_json();
  CHECK(j["cells"]["R@1,IoU=0.5"] == 0.5);
  CHECK(j["cells"]["R@5,IoU=0.3"] == 1.0);
  CHECK(j["total_queries"] == 2);
  CHECK(r.to_table().find("R@5") != std::string::npos);
  CHECK_THROWS(r.recall_at(3, 0.5));
}

TEST_CASE("perfect and empty predictions") {
  const std::vector<QueryAnnotation> ann{{"v", "A", "", 1, 5}, {"w", "B", "", 2, 9.5}};
  const std::vector<QueryPrediction> perfect{{"A", "v", {{1, 5, 1.0, {}}}}, {"B", "w", {{2, 9.5, 1.0, {}}}}};
  const auto r = evaluate(perfect, ann);
  for (int n : {1, 5}) {
    for (double m : {0.3, 0.5}) CHECK(r.recall_at(n, m) == 1.0);
  }
  const auto e = evaluate({}, ann);
  for (int n : {1, 5}) {
    for (double m : {0.3, 0.5}) CHECK(e.recall_at(n, m) == 0.0);
  }
  CHECK(e.warnings.size() == 2);
  EvalOptions strict;
  strict.strict = true;
  CHECK_THROWS_AS(evaluate({}, ann, strict), nlq::InputError);
}

TEST_CASE("duplicate predictions are rejected") {
  const std::vector<QueryAnnotation> ann{{"v", "A", "", 1, 5}};
  const std::vector<QueryPrediction> dup{{"A", "v", {}}, {"A", "v", {}}};
  CHECK_THROWS_AS(evaluate(dup, ann), nlq::InputError);
}

TEST_CASE("evaluate matches the brute-force loop, is monotone and order-free") {
  std::mt19937_64 rng(77);
  const std::vector<int> ranks{1, 2, 5};
  const std::vector<double> thr{0.1, 0.3, 0.5, 0.7};
  EvalOptions options{ranks, thr, false};
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = nlq::testing::random_metric_instance(rng);
    const auto r = evaluate(inst.predictions, inst.annotations, options);
    const auto want = nlq::testing::brute_force_hits(inst, ranks, thr);
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      for (std::size_t j = 0; j < thr.size(); ++j) {
        CHECK(r.hits[i][j] == want.at({ranks[i], thr[j]}));
        CHECK(r.recall(i, j) == static_cast<double>(r.hits[i][j]) / r.total_queries);
        if (i > 0) CHECK(r.recall(i, j) >= r.recall(i - 1, j));
        if (j > 0) CHECK(r.recall(i, j) <= r.recall(i, j - 1));
      }
    }
    std::shuffle(inst.annotations.begin(), inst.annotations.end(), rng);
    const auto again = evaluate(inst.predictions, inst.annotations, options);
    CHECK(again.hits == r.hits);
  }
}
