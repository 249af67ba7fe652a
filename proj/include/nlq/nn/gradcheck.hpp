// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "nlq/nn/parameters.hpp"

namespace nlq::nn {

struct LossAndGrad {
  double value = 0.0;
  ParameterStore grad;  // may be left empty when not requested
};

// Scalar objective of a parameter set. When `with_grad` is false the
// gradient may be omitted.
using DifferentiableLoss = std::function<LossAndGrad(const ParameterStore& params, bool with_grad)>;

struct GradcheckOptions {
  std::size_t min_samples = 200;
  std::size_t per_block = 4;  // entries checked from every block (or all, if fewer)
  std::uint64_t seed = 0;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_offset = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

// Central-difference check of the analytic gradient on a deterministic
// subsample of scalars. Relative error uses max(|analytic|, |numeric|, 1e-8)
// as denominator.
GradcheckReport gradcheck(const DifferentiableLoss& loss, const ParameterStore& params, double step,
                          double tolerance, const GradcheckOptions& options = {});

}  // namespace nlq::nn
