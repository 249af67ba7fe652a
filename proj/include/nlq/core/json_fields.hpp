// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>

#include "json.hpp"
#include "nlq/core/errors.hpp"

namespace nlq {

// Strict config-section helpers: unknown keys and wrongly typed values are
// InvalidArgument naming "section.key".
inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw InvalidArgument(section + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw InvalidArgument(section + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument(section + "." + key + ": wrong type");
  }
}

}  // namespace nlq
