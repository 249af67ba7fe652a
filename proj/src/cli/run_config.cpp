// SPDX-License-Identifier: Apache-2.0
#include "nlq/cli/run_config.hpp"

#include <fstream>

#include "nlq/core/errors.hpp"
#include "nlq/core/json_fields.hpp"

namespace nlq::cli {

namespace fs = std::filesystem;

RunConfig default_run_config() {
  RunConfig c;
  c.setup.anchors = {{0.01, 0.03}, 600};
  return c;
}

void RunConfig::validate() const {
  setup.train.validate();
  setup.anchors.validate();
  for (const auto* p : {&train_data, &val_data}) {
    if (!p->empty() && !fs::is_directory(*p)) throw InputError("data directory not found: " + *p);
  }
}

nn::EncoderConfig encoder_config_from_run_json(const nlohmann::json& j) {
  const std::string s = "encoder";
  check_keys(j,
             {"hidden_dim", "num_heads", "intra_layers", "cross_layers", "video_input_dim", "text_input_dim",
              "dropout_rate", "feedforward_dim"},
             s);
  nn::EncoderConfig c;
  read_field(j, "hidden_dim", c.hidden_dim, s);
  read_field(j, "num_heads", c.num_heads, s);
  read_field(j, "intra_layers", c.intra_layers, s);
  read_field(j, "cross_layers", c.cross_layers, s);
  read_field(j, "video_input_dim", c.video_input_dim, s);
  read_field(j, "text_input_dim", c.text_input_dim, s);
  read_field(j, "dropout_rate", c.dropout_rate, s);
  read_field(j, "feedforward_dim", c.feedforward_dim, s);
  return c;
}

RunConfig parse_run_config(const nlohmann::json& j) {
  check_keys(j, {"encoder", "train", "anchors", "inference", "data"}, "config");
  RunConfig c = default_run_config();
  if (j.contains("encoder")) c.setup.encoder = encoder_config_from_run_json(j.at("encoder"));
  if (j.contains("train")) c.setup.train = trainer::train_config_from_json(j.at("train"));
  if (j.contains("anchors")) c.setup.anchors = trainer::anchor_config_from_json(j.at("anchors"));
  if (j.contains("inference")) {
    nlohmann::json inf = j.at("inference");
    check_keys(inf, {"top_k", "nms_iou", "prediction_mode"}, "inference");
    std::string mode(nn::to_string(c.setup.encoder.head));
    read_field(inf, "prediction_mode", mode, "inference");
    try {
      c.setup.encoder.head = nn::head_kind_from_string(mode);
    } catch (const InvalidArgument&) {
      throw InvalidArgument("inference.prediction_mode must be anchor or anchor_free");
    }
    inf.erase("prediction_mode");
    c.setup.inference = trainer::inference_options_from_json(inf);
  }
  if (j.contains("data")) {
    check_keys(j.at("data"), {"train", "val"}, "data");
    read_field(j.at("data"), "train", c.train_data, "data");
    read_field(j.at("data"), "val", c.val_data, "data");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("config file not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  const auto& e = c.setup.encoder;
  auto inference = trainer::inference_options_to_json(c.setup.inference);
  inference["prediction_mode"] = std::string(nn::to_string(e.head));
  return {{"encoder",
           {{"hidden_dim", e.hidden_dim},
            {"num_heads", e.num_heads},
            {"intra_layers", e.intra_layers},
            {"cross_layers", e.cross_layers},
            {"video_input_dim", e.video_input_dim},
            {"text_input_dim", e.text_input_dim},
            {"dropout_rate", e.dropout_rate},
            {"feedforward_dim", e.feedforward_dim}}},
          {"train", trainer::train_config_to_json(c.setup.train)},
          {"anchors", trainer::anchor_config_to_json(c.setup.anchors)},
          {"inference", inference},
          {"data", {{"train", c.train_data}, {"val", c.val_data}}}};
}

}  // namespace nlq::cli
