// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/annotations.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "nlq/core/errors.hpp"

namespace nlq::data {

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(path + "." + key + ": not finite");
  return d;
}

const json& get_array(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected an array");
  return v;
}

}  // namespace

std::vector<QueryAnnotation> AnnotationSet::flatten() const {
  std::vector<QueryAnnotation> out;
  for (const auto& v : videos) out.insert(out.end(), v.queries.begin(), v.queries.end());
  return out;
}

const VideoAnnotations& AnnotationSet::video(const std::string& video_id) const {
  for (const auto& v : videos) {
    if (v.video_id == video_id) return v;
  }
  throw InputError("unknown video_id '" + video_id + "'");
}

std::size_t AnnotationSet::num_queries() const {
  std::size_t n = 0;
  for (const auto& v : videos) n += v.queries.size();
  return n;
}

AnnotationSet parse_annotations(const json& doc) {
  const std::string root = "$";
  if (get_string(doc, "version", root) != "1.0") throw ParseError("$.version: unsupported version");
  const json& videos = get_array(doc, "videos", root);

  AnnotationSet set;
  std::set<std::string> video_ids, query_ids;
  for (std::size_t vi = 0; vi < videos.size(); ++vi) {
    const std::string vpath = "$.videos[" + std::to_string(vi) + "]";
    VideoAnnotations video;
    video.video_id = get_string(videos[vi], "video_id", vpath);
    video.duration_sec = get_number(videos[vi], "duration_sec", vpath);
    if (!(video.duration_sec > 0.0)) throw ValidationError(vpath + ".duration_sec: must be positive");
    if (!video_ids.insert(video.video_id).second) {
      throw ValidationError("duplicate video_id '" + video.video_id + "'");
    }
    const json& queries = get_array(videos[vi], "queries", vpath);
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
      const std::string qpath = vpath + ".queries[" + std::to_string(qi) + "]";
      QueryAnnotation q;
      q.video_id = video.video_id;
      q.query_id = get_string(queries[qi], "query_id", qpath);
      q.text = queries[qi].contains("text") ? get_string(queries[qi], "text", qpath) : std::string();
      q.start_sec = get_number(queries[qi], "start_sec", qpath);
      q.end_sec = get_number(queries[qi], "end_sec", qpath);
      if (!(q.start_sec >= 0.0 && q.start_sec <= q.end_sec && q.end_sec <= video.duration_sec)) {
        throw ValidationError("query '" + q.query_id + "': span [" + std::to_string(q.start_sec) + ", " +
                              std::to_string(q.end_sec) + "] violates 0 <= start <= end <= duration");
      }
      if (!query_ids.insert(q.query_id).second) throw ValidationError("duplicate query_id '" + q.query_id + "'");
      video.queries.push_back(std::move(q));
    }
    set.videos.push_back(std::move(video));
  }
  return set;
}

json annotations_to_json(const AnnotationSet& set) {
  json doc;
  doc["version"] = "1.0";
  doc["videos"] = json::array();
  for (const auto& v : set.videos) {
    json jv{{"video_id", v.video_id}, {"duration_sec", v.duration_sec}, {"queries", json::array()}};
    for (const auto& q : v.queries) {
      jv["queries"].push_back(
          {{"query_id", q.query_id}, {"text", q.text}, {"start_sec", q.start_sec}, {"end_sec", q.end_sec}});
    }
    doc["videos"].push_back(std::move(jv));
  }
  return doc;
}

AnnotationSet read_annotations(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open annotations: " + path.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_annotations(doc);
}

void write_annotations(const std::filesystem::path& path, const AnnotationSet& set) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write annotations: " + path.string());
  os << annotations_to_json(set).dump(1) << "\n";
}

}  // namespace nlq::data
