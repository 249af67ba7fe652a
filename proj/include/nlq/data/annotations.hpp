// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace nlq::data {

struct QueryAnnotation {
  std::string video_id;
  std::string query_id;
  std::string text;
  double start_sec = 0.0;
  double end_sec = 0.0;

  friend bool operator==(const QueryAnnotation&, const QueryAnnotation&) = default;
};

struct VideoAnnotations {
  std::string video_id;
  double duration_sec = 0.0;
  std::vector<QueryAnnotation> queries;

  friend bool operator==(const VideoAnnotations&, const VideoAnnotations&) = default;
};

// Document layout:
//   {"version": "1.0", "videos": [{"video_id", "duration_sec",
//     "queries": [{"query_id", "text", "start_sec", "end_sec"}]}]}
struct AnnotationSet {
  std::vector<VideoAnnotations> videos;

  std::vector<QueryAnnotation> flatten() const;
  const VideoAnnotations& video(const std::string& video_id) const;
  std::size_t num_queries() const;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

// Throws ParseError (with a JSON path) on schema violations and
// ValidationError (naming the query) when a span breaks
// 0 <= start <= end <= duration.
AnnotationSet parse_annotations(const nlohmann::json& doc);
nlohmann::json annotations_to_json(const AnnotationSet& set);

AnnotationSet read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationSet& set);

}  // namespace nlq::data
