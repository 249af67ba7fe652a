// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "nlq/data/annotations.hpp"
#include "nlq/inference/predictions_io.hpp"

namespace nlq::testing {

struct MetricInstance {
  std::vector<inference::QueryPrediction> predictions;
  std::vector<data::QueryAnnotation> annotations;
};

// Random queries on short videos with proposals placed near the ground truth
// often enough that every recall cell takes intermediate values. Some
// queries get no prediction at all; some proposals reproduce the ground
// truth at a tenth-of-a-second granularity so IoU can land exactly on a
// threshold.
inline MetricInstance random_metric_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nq(1, 12), np(0, 8), tenth(0, 300);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MetricInstance inst;
  const int queries = nq(rng);
  for (int q = 0; q < queries; ++q) {
    data::QueryAnnotation a;
    a.video_id = "v" + std::to_string(q % 3);
    a.query_id = "q" + std::to_string(q);
    double s = tenth(rng) / 10.0, e = tenth(rng) / 10.0;
    if (s > e) std::swap(s, e);
    if (e == s) e = s + 0.1;
    a.start_sec = s;
    a.end_sec = e;
    inst.annotations.push_back(a);
    if (u(rng) < 0.1) continue;  // missing prediction
    inference::QueryPrediction p{a.query_id, a.video_id, {}};
    const int n = np(rng);
    for (int i = 0; i < n; ++i) {
      double ps, pe;
      if (u(rng) < 0.5) {
        const double len = e - s;
        ps = std::max(0.0, s + (u(rng) - 0.5) * len);
        pe = ps + len * (0.5 + u(rng));
        ps = std::round(ps * 10) / 10;
        pe = std::max(ps, std::round(pe * 10) / 10);
      } else {
        ps = tenth(rng) / 10.0;
        pe = ps + tenth(rng) / 30.0;
      }
      p.proposals.push_back({ps, pe, 1.0 - i * 0.1, {}});
    }
    inst.predictions.push_back(p);
  }
  std::shuffle(inst.predictions.begin(), inst.predictions.end(), rng);
  return inst;
}

// Brute force: loop over queries and ranks with the interval arithmetic
// written out; hits[n][m] counts queries with some rank < n of IoU > m.
inline std::map<std::pair<int, double>, int> brute_force_hits(const MetricInstance& inst, const std::vector<int>& ranks,
                                                              const std::vector<double>& thresholds) {
  std::map<std::pair<int, double>, int> hits;
  for (int n : ranks) {
    for (double m : thresholds) {
      int count = 0;
      for (const auto& a : inst.annotations) {
        const inference::QueryPrediction* pred = nullptr;
        for (const auto& p : inst.predictions) {
          if (p.query_id == a.query_id) pred = &p;
        }
        if (pred == nullptr) continue;
        bool hit = false;
        for (int r = 0; r < n && r < static_cast<int>(pred->proposals.size()); ++r) {
          const auto& p = pred->proposals[static_cast<std::size_t>(r)];
          const double inter = std::max(0.0, std::min(p.end_sec, a.end_sec) - std::max(p.start_sec, a.start_sec));
          const double uni = (p.end_sec - p.start_sec) + (a.end_sec - a.start_sec) - inter;
          if (uni > 0.0 && inter / uni > m) hit = true;
        }
        count += hit;
      }
      hits[{n, m}] = count;
    }
  }
  return hits;
}

}  // namespace nlq::testing
