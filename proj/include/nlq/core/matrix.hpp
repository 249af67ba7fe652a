// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace nlq {

// Row-major dense matrix used for features, activations and parameters.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace nlq
