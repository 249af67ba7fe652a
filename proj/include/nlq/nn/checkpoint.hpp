// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlq/nn/model.hpp"

namespace nlq::nn {

// "NLQC" container:
//   bytes 0..3   magic "NLQC"
//   u32 LE       format version (kCheckpointVersion)
//   u64 LE       length N of the JSON header
//   N bytes      UTF-8 JSON: {"encoder_config": {...}, "seed": s,
//                "parameters": [{"name", "rows", "cols", "offset"}...],
//                "metadata": {...}}
//   payload      little-endian f32 values, row-major, in manifest order;
//                "offset" is the byte offset of a block within the payload.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  GroundingModel model;
  nlohmann::json metadata;
};

nlohmann::json encoder_config_to_json(const EncoderConfig& config);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> encode_checkpoint(const GroundingModel& model, const nlohmann::json& metadata = {});
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const GroundingModel& model,
                     const nlohmann::json& metadata = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copy of `model` with every parameter rounded to the nearest f32, i.e. what
// a save/load cycle produces.
GroundingModel quantize_to_f32(const GroundingModel& model);

}  // namespace nlq::nn
