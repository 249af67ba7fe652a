// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlq/core/span.hpp"
#include "nlq/data/annotations.hpp"
#include "nlq/inference/predictions_io.hpp"

namespace nlq::eval {

// "R@n, IoU=m" recall table.
struct MetricReport {
  std::vector<int> ranks;
  std::vector<double> thresholds;
  int total_queries = 0;
  std::vector<std::vector<int>> hits;  // [rank index][threshold index]
  std::vector<std::string> warnings;

  double recall(std::size_t rank_index, std::size_t threshold_index) const;
  // Recall for an (n, m) pair present in the report; throws otherwise.
  double recall_at(int n, double m) const;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

std::string cell_name(int n, double m);

// True iff one of the first min(n, size) spans has IoU strictly above m.
bool query_hit(std::span<const TimeSpan> ranked, const TimeSpan& gt, int n, double m);

struct EvalOptions {
  std::vector<int> ranks{1, 5};
  std::vector<double> thresholds{0.3, 0.5};
  bool strict = false;  // a missing query becomes an InputError instead of a miss
};

MetricReport evaluate(const std::vector<inference::QueryPrediction>& predictions,
                      const std::vector<data::QueryAnnotation>& annotations, const EvalOptions& options = {});

}  // namespace nlq::eval
