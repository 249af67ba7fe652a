// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlq/core/matrix.hpp"

namespace nlq::data {

// Feature container: a directory holding manifest.json plus one "EGF1" file
// per matrix:
//   bytes 0..3  magic "EGF1"
//   u32 LE      rows
//   u32 LE      cols
//   payload     rows*cols little-endian f32, row-major
// manifest.json = {"format": "EGF1", "entries": [{"id", "file", "rows", "cols"}]}
using FeatureMap = std::map<std::string, Matrix>;

std::vector<std::uint8_t> encode_feature_matrix(const Matrix& m);
// `id` only labels error messages.
Matrix decode_feature_matrix(const std::vector<std::uint8_t>& bytes, const std::string& id);

nlohmann::json write_features(const std::filesystem::path& dir, const FeatureMap& features);
FeatureMap read_features(const std::filesystem::path& dir);

// Rounds every entry to the nearest f32, the precision the container stores.
Matrix round_to_f32(const Matrix& m);

}  // namespace nlq::data
