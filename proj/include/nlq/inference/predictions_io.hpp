// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nlq/inference/proposals.hpp"

namespace nlq::inference {

struct ScoredSpan {
  double start_sec = 0.0;
  double end_sec = 0.0;
  double score = 0.0;
  std::map<std::string, double> channel_scores;
};

struct QueryPrediction {
  std::string query_id;
  std::string video_id;
  std::vector<ScoredSpan> proposals;  // rank order
};

// One JSON object per line:
//   {"query_id", "video_id", "proposals": [{"start_sec", "end_sec", "score"}]}
// Re-ranked files add a "channel_scores" object to each proposal.
void write_predictions(const std::filesystem::path& path, const std::vector<QueryPrediction>& preds);
std::vector<QueryPrediction> read_predictions(const std::filesystem::path& path);

// Channel file lines: {"query_id", "channel", "scores": [...]}, rank-aligned
// to a predictions file.
struct ChannelRecord {
  std::string query_id;
  std::string channel;
  std::vector<double> scores;
};

void write_channels(const std::filesystem::path& path, const std::vector<ChannelRecord>& records);
std::vector<ChannelRecord> read_channels(const std::filesystem::path& path);

struct ChannelSource {
  std::vector<ChannelRecord> records;
  double weight = 1.0;
};

QueryPrediction to_query_prediction(const std::string& query_id, const std::string& video_id,
                                    const std::vector<Proposal>& proposals);

// Applies additive score fusion to every query of a predictions file.
// Throws AlignmentError when a query lacks an entry in a channel or the
// lengths disagree.
std::vector<QueryPrediction> rerank_predictions(const std::vector<QueryPrediction>& preds,
                                                const std::vector<ChannelSource>& channels);

}  // namespace nlq::inference
