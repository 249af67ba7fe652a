// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "nlq/trainer/trainer.hpp"

namespace nlq::cli {

// One JSON document for a run:
//   {"encoder": {...}, "train": {...}, "anchors": {"scales", "num_frames"},
//    "inference": {"top_k", "nms_iou", "prediction_mode"},
//    "data": {"train": DIR, "val": DIR}}
// Every section is optional; unknown keys are rejected.
struct RunConfig {
  trainer::TrainSetup setup;
  std::string train_data;
  std::string val_data;

  // Referenced data directories must exist.
  void validate() const;
};

RunConfig default_run_config();
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

nn::EncoderConfig encoder_config_from_run_json(const nlohmann::json& j);

}  // namespace nlq::cli
