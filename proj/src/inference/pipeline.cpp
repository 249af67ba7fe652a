// SPDX-License-Identifier: Apache-2.0
#include "nlq/inference/pipeline.hpp"

#include "nlq/core/errors.hpp"

namespace nlq::inference {

std::vector<Proposal> decode_sample(const nn::GroundingModel& model, const AnchorSet& anchors,
                                    const data::Sample& sample) {
  const auto out = model.forward(sample.video, sample.video_mask, sample.text, sample.text_mask, false);
  if (model.config().head == nn::HeadKind::anchor_free) return decode_anchor_free(out, sample.grid);
  return decode_proposals(out, anchors, sample.grid);
}

std::vector<Proposal> predict_sample(const nn::GroundingModel& model, const AnchorSet& anchors,
                                     const data::Sample& sample, const InferenceOptions& options) {
  return top_k(nms(decode_sample(model, anchors, sample), options.nms_iou), options.top_k);
}

std::vector<QueryPrediction> predict_dataset(const nn::GroundingModel& model, const data::Dataset& ds,
                                             const AnchorConfig& anchor_config, const InferenceOptions& options) {
  AnchorSet anchors;
  if (model.config().head == nn::HeadKind::anchor) {
    anchors = build_lattice(anchor_config);
    if (anchors.num_scales() != model.config().num_scales) {
      throw InvalidArgument("predict: anchor scale count does not match the model head");
    }
  }
  std::vector<QueryPrediction> out;
  for (const auto& ref : data::query_refs(ds)) {
    const auto sample = data::make_sample(ds, ref, anchor_config.num_frames);
    out.push_back(to_query_prediction(sample.query_id, sample.video_id, predict_sample(model, anchors, sample, options)));
  }
  return out;
}

}  // namespace nlq::inference
