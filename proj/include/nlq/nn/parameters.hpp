// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nlq/core/matrix.hpp"

namespace nlq::nn {

// Ordered collection of named parameter blocks. Gradients and optimizer
// moments use the same type with an identical layout.
class ParameterStore {
 public:
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const { return values_.size(); }
  std::size_t scalar_count() const;

  Matrix& value(std::size_t i) { return values_[i]; }
  const Matrix& value(std::size_t i) const { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  ParameterStore zeros_like() const;
  bool same_layout(const ParameterStore& other) const;

  void set_zero();
  void scale(double s);
  // this += s * other
  void add_scaled(const ParameterStore& other, double s);
  double squared_norm() const;
  bool all_finite() const;

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

}  // namespace nlq::nn
