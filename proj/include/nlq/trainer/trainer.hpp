// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"
#include "nlq/anchors/anchors.hpp"
#include "nlq/data/dataset.hpp"
#include "nlq/eval/metrics.hpp"
#include "nlq/inference/pipeline.hpp"
#include "nlq/losses/losses.hpp"
#include "nlq/nn/model.hpp"
#include "nlq/trainer/adam.hpp"
#include "nlq/trainer/schedule.hpp"

namespace nlq::trainer {

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double lr = 0.0;
  double loss_align = 0.0;
  double loss_box = 0.0;
  double loss_total = 0.0;
  double grad_norm = 0.0;
  int forced_positives = 0;

  nlohmann::json to_json() const;
};

struct EpochRecord {
  int epoch = 0;
  double loss_align = 0.0;  // mean over the epoch's steps
  double loss_box = 0.0;
  eval::MetricReport val;

  // {epoch, loss_align, loss_box, R1@0.3, R1@0.5, R5@0.3, R5@0.5}
  nlohmann::json to_json() const;
};

struct TrainResult {
  nn::GroundingModel model;  // parameters after the last step
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_score = -1.0;  // val R@1, IoU=0.5 of best_epoch
};

// Loss and parameter gradient for one batch, averaged over its samples.
struct BatchGradient {
  LossBreakdown loss;
  nn::ParameterStore grad;
  int forced_positives = 0;
};

// Everything besides the data that shapes a training run.
struct TrainSetup {
  nn::EncoderConfig encoder;
  TrainConfig train;
  AnchorConfig anchors;
  inference::InferenceOptions inference;
};

// Output files written to out_dir by train():
inline constexpr const char* kLastCheckpoint = "last.nlqc";
inline constexpr const char* kBestCheckpoint = "best.nlqc";
inline constexpr const char* kMetricsLog = "metrics.jsonl";
inline constexpr const char* kStepLog = "train_steps.jsonl";

// Fills encoder input dims from the data when zero and ties the number of
// scales to the anchor config (1 for the anchor-free head).
nn::EncoderConfig resolve_encoder_config(nn::EncoderConfig config, const data::Dataset& ds,
                                         const AnchorConfig& anchors);

// Train-mode forward/backward over the batch. Samples are processed
// independently (in parallel when threads > 1) and reduced in batch order,
// so the result does not depend on the thread count.
BatchGradient batch_gradient(const nn::GroundingModel& model, const AnchorSet& anchors, const data::Batch& batch,
                             const TrainConfig& config, long step);

// Validation pass in eval mode.
eval::MetricReport validate_model(const nn::GroundingModel& model, const data::Dataset& val,
                                  const AnchorConfig& anchors, const inference::InferenceOptions& options);

// Full run. If out_dir is set, step and epoch logs plus last/best
// checkpoints are written there. `progress` receives one line per epoch.
TrainResult train(const data::Dataset& train_data, const data::Dataset& val_data, const TrainSetup& setup,
                  const std::optional<std::filesystem::path>& out_dir, std::ostream* progress = nullptr);

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);
nlohmann::json anchor_config_to_json(const AnchorConfig& config);
AnchorConfig anchor_config_from_json(const nlohmann::json& j);
nlohmann::json inference_options_to_json(const inference::InferenceOptions& options);
inference::InferenceOptions inference_options_from_json(const nlohmann::json& j);

// Checkpoint metadata recorded by train(): anchors, inference options,
// training config and the epoch.
nlohmann::json checkpoint_metadata(const TrainSetup& setup, int epoch);

}  // namespace nlq::trainer
