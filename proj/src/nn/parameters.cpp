// SPDX-License-Identifier: Apache-2.0
#include "nlq/nn/parameters.hpp"

#include "nlq/core/errors.hpp"

namespace nlq::nn {

std::size_t ParameterStore::add(std::string name, Matrix value) {
  if (find(name)) throw InvalidArgument("ParameterStore: duplicate parameter '" + name + "'");
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

ParameterStore ParameterStore::zeros_like() const {
  ParameterStore out;
  out.names_ = names_;
  out.values_.reserve(values_.size());
  for (const auto& v : values_) out.values_.push_back(Matrix::Zero(v.rows(), v.cols()));
  return out;
}

bool ParameterStore::same_layout(const ParameterStore& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i].rows() != other.values_[i].rows() || values_[i].cols() != other.values_[i].cols()) {
      return false;
    }
  }
  return true;
}

void ParameterStore::set_zero() {
  for (auto& v : values_) v.setZero();
}

void ParameterStore::scale(double s) {
  for (auto& v : values_) v *= s;
}

void ParameterStore::add_scaled(const ParameterStore& other, double s) {
  if (!same_layout(other)) throw ShapeError("ParameterStore::add_scaled: layout mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
}

double ParameterStore::squared_norm() const {
  double n = 0.0;
  for (const auto& v : values_) n += v.squaredNorm();
  return n;
}

bool ParameterStore::all_finite() const {
  for (const auto& v : values_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    if (a.values_[i] != b.values_[i]) return false;
  }
  return true;
}

}  // namespace nlq::nn
