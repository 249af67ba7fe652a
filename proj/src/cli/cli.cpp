// SPDX-License-Identifier: Apache-2.0
#include "nlq/cli/cli.hpp"

#include <charconv>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "nlq/cli/run_config.hpp"
#include "nlq/core/errors.hpp"
#include "nlq/data/synthetic.hpp"
#include "nlq/inference/predictions_io.hpp"
#include "nlq/nn/checkpoint.hpp"

namespace nlq::cli {

namespace {

namespace fs = std::filesystem;

struct GenDataArgs {
  std::string out;
  data::SyntheticSpec spec;
  int val_videos = 0;
};

struct TrainArgs {
  std::string config;
  std::string data;
  std::string val;
  std::string out;
  // Shown as defaults in --help; applied only when given.
  std::uint64_t seed = trainer::TrainConfig{}.seed;
  int epochs = trainer::TrainConfig{}.epochs;
  int threads = trainer::TrainConfig{}.threads;
};

struct PredictArgs {
  std::string ckpt;
  std::string data;
  std::string out;
  int top_k = 5;
  double nms_iou = 0.5;
  std::string mode;
};

struct RerankArgs {
  std::string preds;
  std::vector<std::string> channels;
  std::string out;
};

struct EvalArgs {
  std::string preds;
  std::string annotations;
  std::vector<int> ranks{1, 5};
  std::vector<double> ious{0.3, 0.5};
  bool strict = false;
  std::string format = "json";
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  a.spec.validate();
  if (a.val_videos < 0 || a.val_videos >= a.spec.num_videos) {
    throw InvalidArgument("--val-videos must lie in [0, num-videos)");
  }
  const auto synth = data::generate_synthetic(a.spec);
  if (a.val_videos == 0) {
    data::write_dataset(a.out, synth.dataset);
    out << "wrote " << synth.dataset.annotations.num_queries() << " queries to " << a.out << '\n';
    return kExitOk;
  }
  // Both halves come from one generation so they share the planted projection.
  const auto [train, val] = data::split_by_video(synth.dataset, a.val_videos);
  data::write_dataset(fs::path(a.out) / "train", train);
  data::write_dataset(fs::path(a.out) / "val", val);
  out << "wrote " << train.annotations.num_queries() << " train and " << val.annotations.num_queries()
      << " val queries to " << a.out << '\n';
  return kExitOk;
}

int train_cmd(const TrainArgs& a, const CLI::App& app, std::ostream& out) {
  RunConfig rc = a.config.empty() ? default_run_config() : load_run_config(a.config);
  if (!a.data.empty()) rc.train_data = a.data;
  if (!a.val.empty()) rc.val_data = a.val;
  if (app.count("--seed") > 0) rc.setup.train.seed = a.seed;
  if (app.count("--epochs") > 0) rc.setup.train.epochs = a.epochs;
  if (app.count("--threads") > 0) rc.setup.train.threads = a.threads;
  if (rc.train_data.empty() || rc.val_data.empty()) {
    throw InvalidArgument("train: training and validation data directories are required (--data/--val or config)");
  }
  rc.validate();

  const auto train_ds = data::load_dataset(rc.train_data);
  const auto val_ds = data::load_dataset(rc.val_data);
  fs::create_directories(a.out);
  {
    std::ofstream f(fs::path(a.out) / "config.json");
    f << run_config_to_json(rc).dump(2) << '\n';
  }
  const auto result = trainer::train(train_ds, val_ds, rc.setup, fs::path(a.out), &out);
  out << "best epoch " << result.best_epoch << " R@1,IoU=0.5 " << result.best_score << '\n';
  return kExitOk;
}

int predict_cmd(const PredictArgs& a, std::ostream& out) {
  const auto ckpt = nn::load_checkpoint(a.ckpt);
  const auto head = ckpt.model.config().head;
  if (!a.mode.empty() && nn::head_kind_from_string(a.mode) != head) {
    throw InvalidArgument("--mode " + a.mode + " does not match the checkpoint head (" +
                          std::string(nn::to_string(head)) + ")");
  }
  AnchorConfig anchors{{0.01, 0.03}, 600};
  if (ckpt.metadata.is_object() && ckpt.metadata.contains("anchors")) {
    anchors = trainer::anchor_config_from_json(ckpt.metadata.at("anchors"));
  }
  inference::InferenceOptions options{a.top_k, a.nms_iou};
  if (options.top_k < 1) throw InvalidArgument("--topk must be >= 1");
  const auto ds = data::load_dataset(a.data);
  const auto preds = inference::predict_dataset(ckpt.model, ds, anchors, options);
  inference::write_predictions(a.out, preds);
  out << "wrote predictions for " << preds.size() << " queries to " << a.out << '\n';
  return kExitOk;
}

inference::ChannelSource parse_channel(const std::string& arg) {
  std::string file = arg;
  double weight = 1.0;
  if (const auto colon = arg.rfind(':'); colon != std::string::npos) {
    const std::string tail = arg.substr(colon + 1);
    double w = 0.0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), w);
    if (ec == std::errc() && ptr == tail.data() + tail.size()) {
      file = arg.substr(0, colon);
      weight = w;
    }
  }
  return {inference::read_channels(file), weight};
}

int rerank_cmd(const RerankArgs& a, std::ostream& out) {
  std::vector<inference::ChannelSource> channels;
  for (const auto& c : a.channels) channels.push_back(parse_channel(c));
  const auto reranked = inference::rerank_predictions(inference::read_predictions(a.preds), channels);
  inference::write_predictions(a.out, reranked);
  out << "re-ranked " << reranked.size() << " queries into " << a.out << '\n';
  return kExitOk;
}

int eval_cmd(const EvalArgs& a, std::ostream& out) {
  if (a.format != "json" && a.format != "table") throw InvalidArgument("--format must be json or table");
  eval::EvalOptions options{a.ranks, a.ious, a.strict};
  const auto report =
      eval::evaluate(inference::read_predictions(a.preds), data::read_annotations(a.annotations).flatten(), options);
  if (a.format == "json") {
    out << report.to_json().dump(2) << '\n';
  } else {
    out << report.to_table();
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural-language query localization over video features"};
  app.name("nlq");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenDataArgs g;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic planted-signal dataset");
  gen->add_option("--out", g.out, "Output directory")->required();
  gen->add_option("--num-videos", g.spec.num_videos, "Number of videos");
  gen->add_option("--frames", g.spec.frames_per_video, "Raw feature rows per video (1 s each)");
  gen->add_option("--dim", g.spec.feature_dim, "Video feature dimension");
  gen->add_option("--text-dim", g.spec.text_dim, "Text token dimension");
  gen->add_option("--tokens", g.spec.tokens_per_query, "Tokens per query");
  gen->add_option("--queries-per-video", g.spec.queries_per_video, "Queries per video");
  gen->add_option("--noise", g.spec.noise_sigma, "Noise standard deviation");
  gen->add_option("--span-min", g.spec.span_min, "Minimum span length as a fraction of the video");
  gen->add_option("--span-max", g.spec.span_max, "Maximum span length as a fraction of the video");
  gen->add_option("--seed", g.spec.seed, "Random seed");
  gen->add_option("--val-videos", g.val_videos,
                  "If > 0, hold out this many videos and write OUT/train and OUT/val");

  TrainArgs t;
  auto* tr = app.add_subcommand("train", "Train a model and write checkpoints and logs");
  tr->add_option("--config", t.config, "Run configuration JSON");
  tr->add_option("--data", t.data, "Training dataset directory (overrides config)");
  tr->add_option("--val", t.val, "Validation dataset directory (overrides config)");
  tr->add_option("--out", t.out, "Output directory")->required();
  tr->add_option("--seed", t.seed, "Random seed (overrides config)");
  tr->add_option("--epochs", t.epochs, "Epochs (overrides config)");
  tr->add_option("--threads", t.threads, "Worker threads, 0 = all cores (overrides config)");

  PredictArgs p;
  auto* pr = app.add_subcommand("predict", "Write ranked proposals for every query of a dataset");
  pr->add_option("--ckpt", p.ckpt, "Checkpoint file")->required();
  pr->add_option("--data", p.data, "Dataset directory")->required();
  pr->add_option("--out", p.out, "Predictions JSONL")->required();
  pr->add_option("--topk", p.top_k, "Proposals kept per query");
  pr->add_option("--nms-iou", p.nms_iou, "NMS IoU threshold, 0 disables");
  pr->add_option("--mode", p.mode, "anchor or anchor_free; must match the checkpoint (default: checkpoint head)")
      ->check(CLI::IsMember({"anchor", "anchor_free"}));

  RerankArgs r;
  auto* rr = app.add_subcommand("rerank", "Add weighted channel scores to proposal confidences");
  rr->add_option("--preds", r.preds, "Predictions JSONL")->required();
  rr->add_option("--channel", r.channels, "Channel JSONL, optionally FILE:WEIGHT (default weight 1.0)")
      ->required();
  rr->add_option("--out", r.out, "Re-ranked predictions JSONL")->required();

  EvalArgs e;
  auto* ev = app.add_subcommand("eval", "Recall at rank n for temporal IoU m");
  ev->add_option("--preds", e.preds, "Predictions JSONL")->required();
  ev->add_option("--annotations", e.annotations, "Annotations JSON")->required();
  ev->add_option("--ranks", e.ranks, "Ranks n")->delimiter(',');
  ev->add_option("--ious", e.ious, "IoU thresholds m")->delimiter(',');
  ev->add_flag("--strict", e.strict, "Fail when a query has no prediction");
  ev->add_option("--format", e.format, "json or table")->check(CLI::IsMember({"json", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) return gen_data(g, out);
    if (tr->parsed()) return train_cmd(t, *tr, out);
    if (pr->parsed()) return predict_cmd(p, out);
    if (rr->parsed()) return rerank_cmd(r, out);
    if (ev->parsed()) return eval_cmd(e, out);
  } catch (const ValidationError& ve) {
    err << "error: " << ve.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace nlq::cli
