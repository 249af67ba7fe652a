// SPDX-License-Identifier: Apache-2.0
#include "nlq/data/sampling.hpp"

#include "nlq/core/errors.hpp"

namespace nlq::data {

std::vector<int> key_frame_rows(int raw_rows, int target_T) {
  if (raw_rows < 1) throw InvalidArgument("sample_frames: no raw feature rows");
  if (target_T < 2) throw InvalidArgument("sample_frames: target_T must be >= 2");
  std::vector<int> rows(target_T);
  for (int i = 0; i < target_T; ++i) {
    rows[i] = static_cast<int>(static_cast<long long>(i) * raw_rows / target_T);
  }
  return rows;
}

SampledFrames sample_frames(const Matrix& features, int target_T, double duration_sec) {
  const auto rows = key_frame_rows(static_cast<int>(features.rows()), target_T);
  Matrix out(target_T, features.cols());
  for (int i = 0; i < target_T; ++i) out.row(i) = features.row(rows[i]);
  return {std::move(out), FrameGrid(target_T, duration_sec)};
}

}  // namespace nlq::data
