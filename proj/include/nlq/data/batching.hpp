// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlq/core/matrix.hpp"
#include "nlq/core/span.hpp"
#include "nlq/data/dataset.hpp"

namespace nlq::data {

struct Sample {
  std::string video_id;
  std::string query_id;
  Matrix video;  // target_T x Dv
  std::vector<std::uint8_t> video_mask;
  Matrix text;   // padded L x Dt
  std::vector<std::uint8_t> text_mask;
  int text_length = 0;
  TimeSpan gt_sec;
  TimeSpan gt_index;
  FrameGrid grid{2, 1.0};
};

struct Batch {
  std::vector<Sample> samples;
};

// Query references in annotation order: (video index, query index).
struct QueryRef {
  int video = 0;
  int query = 0;
};

std::vector<QueryRef> query_refs(const Dataset& ds);

// Single unpadded sample for a query.
Sample make_sample(const Dataset& ds, const QueryRef& ref, int target_T);

// Deterministic mini-batches for one epoch: queries are shuffled with
// seed (shuffle_seed + epoch), text is padded to the batch maximum length.
class BatchIterator {
 public:
  BatchIterator(const Dataset& ds, int batch_size, int target_T, std::uint64_t shuffle_seed, int epoch);

  bool next(Batch& batch);
  std::size_t num_batches() const;
  const std::vector<QueryRef>& order() const { return order_; }

 private:
  const Dataset* ds_;
  int batch_size_;
  int target_T_;
  std::vector<QueryRef> order_;
  std::size_t cursor_ = 0;
};

BatchIterator make_batches(const Dataset& ds, int batch_size, int target_T, std::uint64_t shuffle_seed,
                           int epoch = 0);

}  // namespace nlq::data
