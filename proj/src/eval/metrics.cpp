// SPDX-License-Identifier: Apache-2.0
#include "nlq/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "nlq/core/errors.hpp"

namespace nlq::eval {

std::string cell_name(int n, double m) {
  std::ostringstream os;
  os << "R@" << n << ",IoU=" << m;
  return os.str();
}

double MetricReport::recall(std::size_t r, std::size_t t) const {
  if (total_queries == 0) return 0.0;
  return static_cast<double>(hits.at(r).at(t)) / static_cast<double>(total_queries);
}

double MetricReport::recall_at(int n, double m) const {
  const auto r = std::find(ranks.begin(), ranks.end(), n);
  const auto t = std::find(thresholds.begin(), thresholds.end(), m);
  if (r == ranks.end() || t == thresholds.end()) throw InvalidArgument("recall_at: no cell " + cell_name(n, m));
  return recall(static_cast<std::size_t>(r - ranks.begin()), static_cast<std::size_t>(t - thresholds.begin()));
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json cells = nlohmann::json::object();
  nlohmann::json counts = nlohmann::json::object();
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      cells[cell_name(ranks[r], thresholds[t])] = recall(r, t);
      counts[cell_name(ranks[r], thresholds[t])] = hits[r][t];
    }
  }
  return {{"cells", cells}, {"hits", counts}, {"total_queries", total_queries}};
}

std::string MetricReport::to_table() const {
  std::ostringstream os;
  os << std::left << std::setw(8) << "";
  for (double m : thresholds) {
    std::ostringstream head;
    head << "IoU=" << m;
    os << "| " << std::setw(9 * static_cast<int>(ranks.size())) << head.str();
  }
  os << "\n" << std::setw(8) << "";
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    os << "| ";
    for (int n : ranks) os << std::setw(9) << ("R@" + std::to_string(n));
  }
  os << "\n" << std::setw(8) << "recall" << std::fixed << std::setprecision(2);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    os << "| ";
    for (std::size_t r = 0; r < ranks.size(); ++r) os << std::setw(9) << 100.0 * recall(r, t);
  }
  os << "\n(" << total_queries << " queries, values in %)\n";
  return os.str();
}

bool query_hit(std::span<const TimeSpan> ranked, const TimeSpan& gt, int n, double m) {
  const std::size_t limit = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(std::max(n, 0)));
  for (std::size_t i = 0; i < limit; ++i) {
    if (iou(ranked[i], gt) > m) return true;
  }
  return false;
}

MetricReport evaluate(const std::vector<inference::QueryPrediction>& predictions,
                      const std::vector<data::QueryAnnotation>& annotations, const EvalOptions& options) {
  if (options.ranks.empty() || options.thresholds.empty()) throw InvalidArgument("evaluate: empty ranks or thresholds");
  for (int n : options.ranks) {
    if (n < 1) throw InvalidArgument("evaluate: ranks must be >= 1");
  }
  for (double m : options.thresholds) {
    if (!(m > 0.0 && m < 1.0)) throw InvalidArgument("evaluate: IoU thresholds must lie in (0, 1)");
  }

  std::map<std::string, const inference::QueryPrediction*> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.query_id, &p).second) throw InputError("evaluate: duplicate query_id '" + p.query_id + "'");
  }

  MetricReport report;
  report.ranks = options.ranks;
  report.thresholds = options.thresholds;
  report.total_queries = static_cast<int>(annotations.size());
  report.hits.assign(options.ranks.size(), std::vector<int>(options.thresholds.size(), 0));

  for (const auto& a : annotations) {
    auto it = by_id.find(a.query_id);
    if (it == by_id.end()) {
      if (options.strict) throw InputError("evaluate: no prediction for query '" + a.query_id + "'");
      report.warnings.push_back("no prediction for query '" + a.query_id + "', counted as a miss");
      continue;
    }
    std::vector<TimeSpan> ranked;
    for (const auto& s : it->second->proposals) ranked.push_back({s.start_sec, s.end_sec, Units::seconds});
    const TimeSpan gt{a.start_sec, a.end_sec, Units::seconds};
    for (std::size_t r = 0; r < options.ranks.size(); ++r) {
      for (std::size_t t = 0; t < options.thresholds.size(); ++t) {
        if (query_hit(ranked, gt, options.ranks[r], options.thresholds[t])) ++report.hits[r][t];
      }
    }
  }
  return report;
}

}  // namespace nlq::eval
