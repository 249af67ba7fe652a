// SPDX-License-Identifier: Apache-2.0
#include "nlq/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "nlq/core/errors.hpp"

namespace nlq::nn {

GradcheckReport gradcheck(const DifferentiableLoss& loss, const ParameterStore& params, double step,
                          double tolerance, const GradcheckOptions& options) {
  if (!(step > 0.0)) throw InvalidArgument("gradcheck: step must be positive");
  if (!(tolerance > 0.0)) throw InvalidArgument("gradcheck: tolerance must be positive");

  const LossAndGrad base = loss(params, true);
  if (loss(params, false).value != base.value) {
    throw InvalidState("gradcheck: loss function is not deterministic");
  }
  if (!base.grad.same_layout(params)) throw ShapeError("gradcheck: gradient layout differs from parameters");

  // (block, offset) pairs: a few from every block, then random fill.
  std::mt19937_64 rng(options.seed);
  std::set<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto n = static_cast<std::size_t>(params.value(b).size());
    if (n == 0) continue;
    if (n <= options.per_block) {
      for (std::size_t j = 0; j < n; ++j) picks.emplace(b, j);
    } else {
      std::uniform_int_distribution<std::size_t> d(0, n - 1);
      std::set<std::size_t> offsets;
      while (offsets.size() < options.per_block) offsets.insert(d(rng));
      for (std::size_t j : offsets) picks.emplace(b, j);
    }
  }
  const std::size_t total = params.scalar_count();
  const std::size_t target = std::min(total, std::max(options.min_samples, picks.size()));
  std::uniform_int_distribution<std::size_t> flat(0, total - 1);
  while (picks.size() < target) {
    std::size_t f = flat(rng);
    std::size_t b = 0;
    while (f >= static_cast<std::size_t>(params.value(b).size())) {
      f -= static_cast<std::size_t>(params.value(b).size());
      ++b;
    }
    picks.emplace(b, f);
  }

  GradcheckReport report;
  ParameterStore probe = params;
  for (const auto& [b, j] : picks) {
    double& theta = probe.value(b).data()[j];
    const double saved = theta;
    theta = saved + step;
    const double up = loss(probe, false).value;
    theta = saved - step;
    const double down = loss(probe, false).value;
    theta = saved;

    const double numeric = (up - down) / (2.0 * step);
    const double analytic = base.grad.value(b).data()[j];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    ++report.checked;
    if (rel > report.max_rel_error || report.worst_parameter.empty()) {
      report.max_rel_error = std::max(rel, report.max_rel_error);
      report.worst_parameter = params.name(b);
      report.worst_offset = j;
      report.worst_analytic = analytic;
      report.worst_numeric = numeric;
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

}  // namespace nlq::nn
