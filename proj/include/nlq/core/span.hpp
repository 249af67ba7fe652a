// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

namespace nlq {

enum class Units { seconds, index };

std::string_view to_string(Units u);

// Closed interval [start, end] in seconds or in continuous frame-index units.
// Raw (pre-clamp) spans may have a negative start; validated spans satisfy
// 0 <= start <= end.
struct TimeSpan {
  double start = 0.0;
  double end = 0.0;
  Units units = Units::seconds;

  // Throws InvalidArgument unless 0 <= start <= end and both are finite.
  static TimeSpan checked(double start, double end, Units units);

  double length() const { return end - start; }
  double center() const { return 0.5 * (start + end); }
  bool valid() const;

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

// Sampled timeline of one video: num_frames key frames spread over
// duration_sec seconds.
class FrameGrid {
 public:
  FrameGrid(int num_frames, double duration_sec);

  int num_frames() const { return num_frames_; }
  double duration_sec() const { return duration_sec_; }

 private:
  int num_frames_;
  double duration_sec_;
};

// Temporal IoU. Zero-length unions yield 0.
double iou(const TimeSpan& a, const TimeSpan& b);

TimeSpan sec_to_index(const TimeSpan& span, const FrameGrid& grid);
TimeSpan index_to_sec(const TimeSpan& span, const FrameGrid& grid);

// Clamps both endpoints into [lo, hi]. Accepts raw spans with start < lo.
TimeSpan clamp_span(const TimeSpan& span, double lo, double hi);

}  // namespace nlq
