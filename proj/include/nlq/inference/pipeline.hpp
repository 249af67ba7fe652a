// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "nlq/anchors/anchors.hpp"
#include "nlq/data/batching.hpp"
#include "nlq/data/dataset.hpp"
#include "nlq/inference/predictions_io.hpp"
#include "nlq/inference/proposals.hpp"
#include "nlq/nn/model.hpp"

namespace nlq::inference {

struct InferenceOptions {
  int top_k = 5;
  double nms_iou = 0.5;  // 0 disables suppression
};

// Eval-mode forward, decode (anchor or anchor-free per the model head), NMS
// and top-k. `anchors` is ignored for anchor-free models.
std::vector<Proposal> predict_sample(const nn::GroundingModel& model, const AnchorSet& anchors,
                                     const data::Sample& sample, const InferenceOptions& options);

// All decoded proposals of a sample before suppression.
std::vector<Proposal> decode_sample(const nn::GroundingModel& model, const AnchorSet& anchors,
                                    const data::Sample& sample);

std::vector<QueryPrediction> predict_dataset(const nn::GroundingModel& model, const data::Dataset& ds,
                                             const AnchorConfig& anchor_config, const InferenceOptions& options);

}  // namespace nlq::inference
