// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "json.hpp"
#include "nlq/cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nlq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = nlq::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& s) const { return (path / s).string(); }
};

std::vector<std::string> small_gen(const std::string& out) {
  return {"gen-data", "--out", out, "--num-videos", "5", "--frames", "48", "--dim", "6", "--text-dim", "4",
          "--tokens", "3", "--queries-per-video", "2", "--seed", "9"};
}

}  // namespace

TEST_CASE("help lists subcommands and defaults") {
  const auto r = run_cli({"--help"});
  CHECK(r.code == 0);
  for (const char* s : {"gen-data", "train", "predict", "rerank", "eval"}) CHECK(r.out.find(s) != std::string::npos);
  const auto p = run_cli({"predict", "--help"});
  CHECK(p.code == 0);
  CHECK(p.out.find("--topk") != std::string::npos);
  CHECK(p.out.find("5") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"eval", "--bogus"}).code == 1);
  CHECK(run_cli({"eval", "--preds", "x"}).code == 1);
  const auto r = run_cli({"eval", "--preds", "/nonexistent/p.jsonl", "--annotations", "/nonexistent/a.json"});
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("gen-data is deterministic and validates its spec") {
  TempDir tmp("nlq_cli_gen");
  REQUIRE(run_cli(small_gen(tmp / "a")).code == 0);
  REQUIRE(run_cli(small_gen(tmp / "b")).code == 0);
  const auto a = tree(tmp.path / "a");
  CHECK(a.size() > 2);
  CHECK(a == tree(tmp.path / "b"));
  auto bad = small_gen(tmp / "c");
  bad.push_back("--span-min");
  bad.push_back("0.9");
  bad.push_back("--span-max");
  bad.push_back("0.1");
  CHECK(run_cli(bad).code == 1);
}

TEST_CASE("eval reports perfect predictions as 1.0 everywhere") {
  TempDir tmp("nlq_cli_eval");
  const json ann = {{"version", "1.0"},
                    {"videos",
                     {{{"video_id", "v"},
                       {"duration_sec", 12.0},
                       {"queries",
                        {{{"query_id", "q1"}, {"text", "a"}, {"start_sec", 1.0}, {"end_sec", 4.0}},
                         {{"query_id", "q2"}, {"text", "b"}, {"start_sec", 6.5}, {"end_sec", 9.0}}}}}}}};
  std::ofstream(tmp / "ann.json") << ann.dump();
  std::ofstream preds(tmp / "p.jsonl");
  preds << json{{"query_id", "q1"}, {"video_id", "v"}, {"proposals", {{{"start_sec", 1.0}, {"end_sec", 4.0}, {"score", 0.9}}}}}.dump()
        << "\n"
        << json{{"query_id", "q2"}, {"video_id", "v"}, {"proposals", {{{"start_sec", 6.5}, {"end_sec", 9.0}, {"score", 0.8}}}}}.dump()
        << "\n";
  preds.close();
  const auto r = run_cli({"eval", "--preds", tmp / "p.jsonl", "--annotations", tmp / "ann.json"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["total_queries"] == 2);
  for (const auto& [k, v] : j["cells"].items()) CHECK(v == 1.0);
  CHECK(j["cells"].size() == 4);
  const auto t = run_cli({"eval", "--preds", tmp / "p.jsonl", "--annotations", tmp / "ann.json", "--format", "table"});
  CHECK(t.code == 0);
  CHECK(t.out.find("100.00") != std::string::npos);
}

TEST_CASE("train, predict, rerank and eval end to end") {
  TempDir tmp("nlq_cli_e2e");
  auto gen = small_gen(tmp / "d");
  gen.push_back("--val-videos");
  gen.push_back("2");
  REQUIRE(run_cli(gen).code == 0);
  const json cfg = {{"encoder", {{"hidden_dim", 8}, {"num_heads", 2}, {"intra_layers", 1}, {"cross_layers", 1}}},
                    {"train", {{"epochs", 1}, {"batch_size", 4}, {"warmup_steps", 2}}},
                    {"anchors", {{"scales", {0.1, 0.3}}, {"num_frames", 24}}}};
  std::ofstream(tmp / "cfg.json") << cfg.dump();
  const auto tr = run_cli({"train", "--config", tmp / "cfg.json", "--data", tmp / "d/train", "--val", tmp / "d/val",
                           "--out", tmp / "run"});
  REQUIRE(tr.code == 0);
  for (const char* f : {"best.nlqc", "last.nlqc", "config.json", "metrics.jsonl", "train_steps.jsonl"}) {
    CHECK(fs::exists(tmp.path / "run" / f));
  }

  const auto pr = run_cli({"predict", "--ckpt", tmp / "run/best.nlqc", "--data", tmp / "d/val", "--out", tmp / "p.jsonl",
                           "--topk", "3"});
  REQUIRE(pr.code == 0);
  std::ifstream lines(tmp / "p.jsonl");
  int n = 0;
  for (std::string line; std::getline(lines, line); ++n) CHECK(json::parse(line)["proposals"].size() <= 3);
  CHECK(n == 4);

  CHECK(run_cli({"predict", "--ckpt", tmp / "run/best.nlqc", "--data", tmp / "d/val", "--out", tmp / "q.jsonl",
                 "--mode", "anchor_free"})
            .code == 1);
  CHECK(run_cli({"predict", "--ckpt", tmp / "missing.nlqc", "--data", tmp / "d/val", "--out", tmp / "q.jsonl"}).code ==
        2);

  // A channel with one score per proposal leaves the file well formed.
  std::ifstream in(tmp / "p.jsonl");
  std::ofstream ch(tmp / "ch.jsonl");
  for (std::string line; std::getline(in, line);) {
    const auto j = json::parse(line);
    ch << json{{"query_id", j["query_id"]}, {"channel", "flat"}, {"scores", std::vector<double>(j["proposals"].size(), 0.5)}}.dump() << "\n";
  }
  ch.close();
  const auto rr = run_cli({"rerank", "--preds", tmp / "p.jsonl", "--channel", tmp / "ch.jsonl:2", "--out", tmp / "r.jsonl"});
  CHECK(rr.code == 0);
  const auto ev = run_cli({"eval", "--preds", tmp / "r.jsonl", "--annotations", tmp / "d/val/annotations.json"});
  CHECK(ev.code == 0);
  CHECK(json::parse(ev.out)["total_queries"] == 4);

  std::ofstream(tmp / "short.jsonl") << json{{"query_id", "nope"}, {"channel", "c"}, {"scores", {1.0}}}.dump() << "\n";
  CHECK(run_cli({"rerank", "--preds", tmp / "p.jsonl", "--channel", tmp / "short.jsonl", "--out", tmp / "s.jsonl"}).code ==
        1);
}
