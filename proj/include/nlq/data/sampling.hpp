// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "nlq/core/matrix.hpp"
#include "nlq/core/span.hpp"

namespace nlq::data {

struct SampledFrames {
  Matrix frames;  // target_T x D
  FrameGrid grid;
};

// Source row of each of the target_T key frames: floor(i * raw / target_T).
std::vector<int> key_frame_rows(int raw_rows, int target_T);

// Uniform striding over the raw feature rows; rows repeat when the video has
// fewer raw rows than target_T.
SampledFrames sample_frames(const Matrix& features, int target_T, double duration_sec);

}  // namespace nlq::data
