// SPDX-License-Identifier: Apache-2.0
#include "nlq/trainer/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>

#include "nlq/core/errors.hpp"
#include "nlq/core/json_fields.hpp"
#include "nlq/data/batching.hpp"
#include "nlq/nn/checkpoint.hpp"
#include "nlq/trainer/objective.hpp"

namespace nlq::trainer {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t dropout_seed(std::uint64_t seed, long step, std::size_t item) {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(step))) + item);
}

int worker_count(const TrainConfig& config, std::size_t items) {
  int n = config.threads > 0 ? config.threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), items));
}

struct ItemResult {
  ObjectiveResult objective;
  nn::ParameterStore grad;
};

ItemResult item_gradient(const nn::GroundingModel& model, const AnchorSet& anchors, const data::Sample& s,
                         const TrainConfig& config, std::uint64_t seed) {
  nn::ForwardCache cache;
  const auto out = model.forward(s.video, s.video_mask, s.text, s.text_mask, true, seed, &cache);
  ItemResult r;
  r.objective = compute_objective(out, anchors, s.gt_index, model.config().head, config, true);
  r.grad = model.backward(cache, r.objective.grad).params;
  return r;
}

void append_line(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw IoError("cannot append to " + path.string());
  f << j.dump() << '\n';
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace

nlohmann::json StepRecord::to_json() const {
  return {{"step", step},         {"epoch", epoch},         {"lr", lr},
          {"loss_align", loss_align}, {"loss_box", loss_box}, {"loss_total", loss_total},
          {"grad_norm", grad_norm}, {"forced_positives", forced_positives}};
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch},
          {"loss_align", loss_align},
          {"loss_box", loss_box},
          {"R1@0.3", val.recall_at(1, 0.3)},
          {"R1@0.5", val.recall_at(1, 0.5)},
          {"R5@0.3", val.recall_at(5, 0.3)},
          {"R5@0.5", val.recall_at(5, 0.5)}};
}

nn::EncoderConfig resolve_encoder_config(nn::EncoderConfig config, const data::Dataset& ds,
                                         const AnchorConfig& anchors) {
  if (config.video_input_dim == 0) config.video_input_dim = ds.video_dim();
  if (config.text_input_dim == 0) config.text_input_dim = ds.text_dim();
  if (config.video_input_dim != ds.video_dim() || config.text_input_dim != ds.text_dim()) {
    throw ShapeError("encoder input dims do not match the dataset features");
  }
  config.num_scales = config.head == nn::HeadKind::anchor ? anchors.num_scales() : 1;
  config.validate();
  return config;
}

BatchGradient batch_gradient(const nn::GroundingModel& model, const AnchorSet& anchors, const data::Batch& batch,
                             const TrainConfig& config, long step) {
  const std::size_t n = batch.samples.size();
  if (n == 0) throw InvalidArgument("batch_gradient: empty batch");
  std::vector<ItemResult> items(n);
  const int workers = worker_count(config, n);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      items[i] = item_gradient(model, anchors, batch.samples[i], config, dropout_seed(config.seed, step, i));
    }
  };
  if (workers == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) / static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, static_cast<std::size_t>(w) * chunk);
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          run(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BatchGradient out;
  out.grad = model.params().zeros_like();
  double align = 0.0, box = 0.0;
  int positives = 0;
  for (const auto& item : items) {
    out.grad.add_scaled(item.grad, 1.0);
    align += item.objective.loss.align;
    box += item.objective.loss.box;
    positives += item.objective.loss.num_positives;
    if (item.objective.forced_positive) ++out.forced_positives;
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.grad.scale(inv);
  out.loss = total_loss(align * inv, box * inv, config.mu);
  out.loss.num_positives = positives;
  return out;
}

eval::MetricReport validate_model(const nn::GroundingModel& model, const data::Dataset& val,
                                  const AnchorConfig& anchors, const inference::InferenceOptions& options) {
  const auto preds = inference::predict_dataset(model, val, anchors, options);
  return eval::evaluate(preds, val.annotations.flatten());
}

nlohmann::json checkpoint_metadata(const TrainSetup& setup, int epoch) {
  return {{"anchors", anchor_config_to_json(setup.anchors)},
          {"inference", inference_options_to_json(setup.inference)},
          {"train", train_config_to_json(setup.train)},
          {"epoch", epoch}};
}

TrainResult train(const data::Dataset& train_data, const data::Dataset& val_data, const TrainSetup& setup,
                  const std::optional<std::filesystem::path>& out_dir, std::ostream* progress) {
  const TrainConfig& config = setup.train;
  config.validate();
  setup.anchors.validate();
  if (train_data.annotations.num_queries() == 0) throw InvalidArgument("train: training data has no queries");
  if (val_data.annotations.num_queries() == 0) throw InvalidArgument("train: validation data has no queries");
  train_data.validate();
  val_data.validate();

  TrainSetup resolved = setup;
  resolved.encoder = resolve_encoder_config(setup.encoder, train_data, setup.anchors);
  if (val_data.video_dim() != train_data.video_dim() || val_data.text_dim() != train_data.text_dim()) {
    throw ShapeError("train: validation feature dims differ from training data");
  }

  AnchorSet anchors;
  if (resolved.encoder.head == nn::HeadKind::anchor) {
    anchors = build_lattice(setup.anchors);
  } else {
    anchors.config = setup.anchors;
  }

  std::filesystem::path metrics_path, steps_path;
  if (out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir->string() + ": " + ec.message());
    metrics_path = *out_dir / kMetricsLog;
    steps_path = *out_dir / kStepLog;
    std::ofstream(metrics_path, std::ios::trunc);
    std::ofstream(steps_path, std::ios::trunc);
  }

  TrainResult result{nn::GroundingModel(resolved.encoder, config.seed), {}, {}, 0, -1.0};
  nn::GroundingModel& model = result.model;
  OptimizerState state = OptimizerState::for_parameters(model.params());
  const int T = setup.anchors.num_frames;

  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto batches = data::make_batches(train_data, config.batch_size, T, config.seed, epoch);
    data::Batch batch;
    double align_sum = 0.0, box_sum = 0.0;
    int epoch_steps = 0;
    while (batches.next(batch)) {
      ++step;
      auto bg = batch_gradient(model, anchors, batch, config, step);
      const double lr = lr_at(step, config);
      const auto info = adam_step(model.params(), std::move(bg.grad), state, lr, config);
      StepRecord rec{step, epoch, lr, bg.loss.align, bg.loss.box, bg.loss.total, info.grad_norm, bg.forced_positives};
      if (out_dir) append_line(steps_path, rec.to_json());
      result.steps.push_back(rec);
      align_sum += bg.loss.align;
      box_sum += bg.loss.box;
      ++epoch_steps;
    }

    EpochRecord er;
    er.epoch = epoch;
    er.loss_align = align_sum / epoch_steps;
    er.loss_box = box_sum / epoch_steps;
    er.val = validate_model(model, val_data, setup.anchors, setup.inference);
    const double score = er.val.recall_at(1, 0.5);
    const bool improved = score > result.best_score;
    if (improved) {
      result.best_score = score;
      result.best_epoch = epoch;
    }
    if (out_dir) {
      append_line(metrics_path, er.to_json());
      const auto meta = checkpoint_metadata(resolved, epoch);
      nn::save_checkpoint(*out_dir / kLastCheckpoint, model, meta);
      if (improved) nn::save_checkpoint(*out_dir / kBestCheckpoint, model, meta);
    }
    if (progress) *progress << er.to_json().dump() << std::endl;
    result.epochs.push_back(std::move(er));
  }
  return result;
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"base_lr", c.base_lr},
          {"warmup_steps", c.warmup_steps},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"mu", c.mu},
          {"positive_threshold", c.positive_threshold},
          {"grad_clip_norm", c.grad_clip_norm},
          {"force_positive", c.force_positive},
          {"box_units", std::string(to_string(c.box_units))},
          {"smooth_l1_beta", c.smooth_l1_beta},
          {"seed", c.seed},
          {"threads", c.threads}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  const std::string s = "train";
  check_keys(j,
             {"epochs", "batch_size", "base_lr", "warmup_steps", "adam_beta1", "adam_beta2", "adam_eps", "mu",
              "positive_threshold", "grad_clip_norm", "force_positive", "box_units", "smooth_l1_beta", "seed",
              "threads"},
             s);
  TrainConfig c;
  read_field(j, "epochs", c.epochs, s);
  read_field(j, "batch_size", c.batch_size, s);
  read_field(j, "base_lr", c.base_lr, s);
  read_field(j, "warmup_steps", c.warmup_steps, s);
  read_field(j, "adam_beta1", c.adam_beta1, s);
  read_field(j, "adam_beta2", c.adam_beta2, s);
  read_field(j, "adam_eps", c.adam_eps, s);
  read_field(j, "mu", c.mu, s);
  read_field(j, "positive_threshold", c.positive_threshold, s);
  read_field(j, "grad_clip_norm", c.grad_clip_norm, s);
  read_field(j, "force_positive", c.force_positive, s);
  std::string units(to_string(c.box_units));
  read_field(j, "box_units", units, s);
  c.box_units = box_units_from_string(units);
  read_field(j, "smooth_l1_beta", c.smooth_l1_beta, s);
  read_field(j, "seed", c.seed, s);
  read_field(j, "threads", c.threads, s);
  c.validate();
  return c;
}

nlohmann::json anchor_config_to_json(const AnchorConfig& c) {
  return {{"scales", c.scales}, {"num_frames", c.num_frames}};
}

AnchorConfig anchor_config_from_json(const nlohmann::json& j) {
  const std::string s = "anchors";
  check_keys(j, {"scales", "num_frames"}, s);
  AnchorConfig c{{0.01, 0.03}, 600};
  read_field(j, "scales", c.scales, s);
  read_field(j, "num_frames", c.num_frames, s);
  c.validate();
  return c;
}

nlohmann::json inference_options_to_json(const inference::InferenceOptions& o) {
  return {{"top_k", o.top_k}, {"nms_iou", o.nms_iou}};
}

inference::InferenceOptions inference_options_from_json(const nlohmann::json& j) {
  const std::string s = "inference";
  check_keys(j, {"top_k", "nms_iou"}, s);
  inference::InferenceOptions o;
  read_field(j, "top_k", o.top_k, s);
  read_field(j, "nms_iou", o.nms_iou, s);
  if (o.top_k < 1) throw InvalidArgument("inference.top_k must be >= 1");
  if (!(o.nms_iou >= 0.0 && o.nms_iou <= 1.0)) throw InvalidArgument("inference.nms_iou must lie in [0, 1]");
  return o;
}

}  // namespace nlq::trainer
