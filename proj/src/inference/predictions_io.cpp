// SPDX-License-Identifier: Apache-2.0
#include "nlq/inference/predictions_io.hpp"

#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "nlq/core/errors.hpp"

namespace nlq::inference {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    try {
      fn(json::parse(line), where);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

}  // namespace

void write_predictions(const std::filesystem::path& path, const std::vector<QueryPrediction>& preds) {
  auto os = open_out(path);
  for (const auto& q : preds) {
    json props = json::array();
    for (const auto& p : q.proposals) {
      json jp{{"start_sec", p.start_sec}, {"end_sec", p.end_sec}, {"score", p.score}};
      if (!p.channel_scores.empty()) jp["channel_scores"] = p.channel_scores;
      props.push_back(std::move(jp));
    }
    os << json{{"query_id", q.query_id}, {"video_id", q.video_id}, {"proposals", props}}.dump() << "\n";
  }
}

std::vector<QueryPrediction> read_predictions(const std::filesystem::path& path) {
  std::vector<QueryPrediction> out;
  for_each_line(path, [&](const json& j, const std::string& where) {
    QueryPrediction q;
    q.query_id = j.at("query_id").get<std::string>();
    q.video_id = j.value("video_id", std::string());
    for (const auto& jp : j.at("proposals")) {
      ScoredSpan s;
      s.start_sec = jp.at("start_sec").get<double>();
      s.end_sec = jp.at("end_sec").get<double>();
      s.score = jp.at("score").get<double>();
      if (!(s.start_sec >= 0.0 && s.start_sec <= s.end_sec)) throw ParseError(where + ": malformed proposal span");
      if (jp.contains("channel_scores")) s.channel_scores = jp["channel_scores"].get<std::map<std::string, double>>();
      q.proposals.push_back(std::move(s));
    }
    out.push_back(std::move(q));
  });
  return out;
}

void write_channels(const std::filesystem::path& path, const std::vector<ChannelRecord>& records) {
  auto os = open_out(path);
  for (const auto& r : records) {
    os << json{{"query_id", r.query_id}, {"channel", r.channel}, {"scores", r.scores}}.dump() << "\n";
  }
}

std::vector<ChannelRecord> read_channels(const std::filesystem::path& path) {
  std::vector<ChannelRecord> out;
  for_each_line(path, [&](const json& j, const std::string&) {
    out.push_back({j.at("query_id").get<std::string>(), j.at("channel").get<std::string>(),
                   j.at("scores").get<std::vector<double>>()});
  });
  return out;
}

QueryPrediction to_query_prediction(const std::string& query_id, const std::string& video_id,
                                    const std::vector<Proposal>& proposals) {
  QueryPrediction q{query_id, video_id, {}};
  for (const auto& p : proposals) {
    q.proposals.push_back({p.span_sec.start, p.span_sec.end, p.score, p.channel_scores});
  }
  return q;
}

std::vector<QueryPrediction> rerank_predictions(const std::vector<QueryPrediction>& preds,
                                                const std::vector<ChannelSource>& channels) {
  // (channel name, query_id) -> scores, per source
  std::vector<std::map<std::pair<std::string, std::string>, const ChannelRecord*>> index(channels.size());
  std::vector<std::set<std::string>> names(channels.size());
  for (std::size_t c = 0; c < channels.size(); ++c) {
    for (const auto& r : channels[c].records) {
      if (!index[c].emplace(std::make_pair(r.channel, r.query_id), &r).second) {
        throw AlignmentError("channel '" + r.channel + "' lists query '" + r.query_id + "' twice");
      }
      names[c].insert(r.channel);
    }
  }

  std::vector<QueryPrediction> out;
  out.reserve(preds.size());
  for (const auto& q : preds) {
    std::vector<Proposal> props;
    for (std::size_t i = 0; i < q.proposals.size(); ++i) {
      const auto& s = q.proposals[i];
      Proposal p;
      p.span_sec = {s.start_sec, s.end_sec, Units::seconds};
      p.confidence = s.score;
      p.score = s.score;
      p.source.flat_index = i;
      props.push_back(std::move(p));
    }
    std::vector<RerankChannel> active;
    for (std::size_t c = 0; c < channels.size(); ++c) {
      for (const auto& name : names[c]) {
        auto it = index[c].find({name, q.query_id});
        if (it == index[c].end()) {
          throw AlignmentError("channel '" + name + "' has no scores for query '" + q.query_id + "'");
        }
        active.push_back({name, channels[c].weight, it->second->scores});
      }
    }
    out.push_back(to_query_prediction(q.query_id, q.video_id, rerank(std::move(props), active)));
  }
  return out;
}

}  // namespace nlq::inference
