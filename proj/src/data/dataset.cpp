// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/dataset.hpp"

#include "nlq/core/errors.hpp"

namespace nlq::data {

namespace fs = std::filesystem;

void Dataset::validate() const {
  int vdim = -1;
  int tdim = -1;
  for (const auto& v : annotations.videos) {
    auto it = video_features.find(v.video_id);
    if (it == video_features.end()) throw InputError("dataset: no features for video '" + v.video_id + "'");
    const Matrix& m = it->second;
    if (m.rows() < 1) throw InputError("dataset: video '" + v.video_id + "' has no feature rows");
    if (vdim >= 0 && m.cols() != vdim) throw ShapeError("dataset: video feature dims disagree at '" + v.video_id + "'");
    vdim = static_cast<int>(m.cols());
    if (!m.allFinite()) throw InputError("dataset: non-finite features in video '" + v.video_id + "'");
    for (const auto& q : v.queries) {
      auto qt = text_features.find(q.query_id);
      if (qt == text_features.end()) throw InputError("dataset: no token embeddings for query '" + q.query_id + "'");
      const Matrix& t = qt->second;
      if (t.rows() < 1) throw InputError("dataset: query '" + q.query_id + "' has no tokens");
      if (tdim >= 0 && t.cols() != tdim) throw ShapeError("dataset: text dims disagree at '" + q.query_id + "'");
      tdim = static_cast<int>(t.cols());
      if (!t.allFinite()) throw InputError("dataset: non-finite embeddings for query '" + q.query_id + "'");
    }
  }
}

int Dataset::video_dim() const {
  if (video_features.empty()) throw InputError("dataset: no video features");
  return static_cast<int>(video_features.begin()->second.cols());
}

int Dataset::text_dim() const {
  if (text_features.empty()) throw InputError("dataset: no text features");
  return static_cast<int>(text_features.begin()->second.cols());
}

void write_dataset(const fs::path& dir, const Dataset& ds) {
  fs::create_directories(dir);
  write_annotations(dir / "annotations.json", ds.annotations);
  write_features(dir / "video_features", ds.video_features);
  write_features(dir / "text_features", ds.text_features);
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory not found: " + dir.string());
  Dataset ds;
  ds.annotations = read_annotations(dir / "annotations.json");
  ds.video_features = read_features(dir / "video_features");
  ds.text_features = read_features(dir / "text_features");
  ds.validate();
  return ds;
}

std::pair<Dataset, Dataset> split_by_video(const Dataset& ds, int val_videos) {
  const int n = static_cast<int>(ds.annotations.videos.size());
  if (val_videos < 0 || val_videos >= n) throw InvalidArgument("split_by_video: bad validation count");
  std::pair<Dataset, Dataset> out;
  for (int i = 0; i < n; ++i) {
    Dataset& dst = i < n - val_videos ? out.first : out.second;
    const auto& v = ds.annotations.videos[i];
    dst.annotations.videos.push_back(v);
    dst.video_features.emplace(v.video_id, ds.video_features.at(v.video_id));
    for (const auto& q : v.queries) dst.text_features.emplace(q.query_id, ds.text_features.at(q.query_id));
  }
  return out;
}

}  // namespace nlq::data
