// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/batching.hpp"

#include <algorithm>
#include <random>

#include "nlq/core/errors.hpp"
#include "nlq/data/sampling.hpp"

namespace nlq::data {

std::vector<QueryRef> query_refs(const Dataset& ds) {
  std::vector<QueryRef> refs;
  const auto& videos = ds.annotations.videos;
  for (int v = 0; v < static_cast<int>(videos.size()); ++v) {
    for (int q = 0; q < static_cast<int>(videos[v].queries.size()); ++q) refs.push_back({v, q});
  }
  return refs;
}

Sample make_sample(const Dataset& ds, const QueryRef& ref, int target_T) {
  const auto& video = ds.annotations.videos.at(ref.video);
  const auto& query = video.queries.at(ref.query);
  auto sampled = sample_frames(ds.video_features.at(video.video_id), target_T, video.duration_sec);

  Sample s;
  s.video_id = video.video_id;
  s.query_id = query.query_id;
  s.video = std::move(sampled.frames);
  s.video_mask.assign(target_T, 1);
  s.text = ds.text_features.at(query.query_id);
  s.text_length = static_cast<int>(s.text.rows());
  s.text_mask.assign(s.text_length, 1);
  s.grid = sampled.grid;
  s.gt_sec = TimeSpan::checked(query.start_sec, query.end_sec, Units::seconds);
  s.gt_index = sec_to_index(s.gt_sec, s.grid);
  return s;
}

BatchIterator::BatchIterator(const Dataset& ds, int batch_size, int target_T, std::uint64_t shuffle_seed,
                             int epoch)
    : ds_(&ds), batch_size_(batch_size), target_T_(target_T), order_(query_refs(ds)) {
  if (batch_size < 1) throw InvalidArgument("make_batches: batch_size must be >= 1");
  if (order_.empty()) throw InvalidArgument("make_batches: empty dataset");
  std::mt19937_64 rng(shuffle_seed + static_cast<std::uint64_t>(epoch));
  std::shuffle(order_.begin(), order_.end(), rng);
}

std::size_t BatchIterator::num_batches() const {
  return (order_.size() + static_cast<std::size_t>(batch_size_) - 1) / static_cast<std::size_t>(batch_size_);
}

bool BatchIterator::next(Batch& batch) {
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), cursor_ + static_cast<std::size_t>(batch_size_));
  batch.samples.clear();
  int max_len = 0;
  for (std::size_t i = cursor_; i < end; ++i) {
    batch.samples.push_back(make_sample(*ds_, order_[i], target_T_));
    max_len = std::max(max_len, batch.samples.back().text_length);
  }
  for (auto& s : batch.samples) {
    if (s.text_length == max_len) continue;
    Matrix padded = Matrix::Zero(max_len, s.text.cols());
    padded.topRows(s.text_length) = s.text;
    s.text = std::move(padded);
    s.text_mask.resize(max_len, 0);
  }
  cursor_ = end;
  return true;
}

BatchIterator make_batches(const Dataset& ds, int batch_size, int target_T, std::uint64_t shuffle_seed, int epoch) {
  return BatchIterator(ds, batch_size, target_T, shuffle_seed, epoch);
}

}  // namespace nlq::data
