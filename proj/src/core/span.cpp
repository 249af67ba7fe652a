// SPDX-License-Identifier: Apache-2.0
#include "nlq/core/span.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlq/core/errors.hpp"

namespace nlq {

namespace {

std::string describe(const TimeSpan& s) {
  std::ostringstream os;
  os << "[" << s.start << ", " << s.end << "] (" << to_string(s.units) << ")";
  return os.str();
}

void require_ordered(const TimeSpan& s, const char* what) {
  if (!(std::isfinite(s.start) && std::isfinite(s.end)) || s.end < s.start) {
    throw InvalidArgument(std::string(what) + ": malformed span " + describe(s));
  }
}

}  // namespace

std::string_view to_string(Units u) {
  return u == Units::seconds ? "seconds" : "index";
}

TimeSpan TimeSpan::checked(double start, double end, Units units) {
  TimeSpan s{start, end, units};
  if (!s.valid()) throw InvalidArgument("invalid span " + describe(s));
  return s;
}

bool TimeSpan::valid() const {
  return std::isfinite(start) && std::isfinite(end) && start >= 0.0 && start <= end;
}

FrameGrid::FrameGrid(int num_frames, double duration_sec)
    : num_frames_(num_frames), duration_sec_(duration_sec) {
  if (num_frames < 2) throw InvalidArgument("FrameGrid: num_frames must be >= 2");
  if (!(duration_sec > 0.0) || !std::isfinite(duration_sec)) {
    throw InvalidArgument("FrameGrid: duration_sec must be positive");
  }
}

double iou(const TimeSpan& a, const TimeSpan& b) {
  if (a.units != b.units) throw InvalidArgument("iou: unit mismatch");
  require_ordered(a, "iou");
  require_ordered(b, "iou");
  const double inter = std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
  const double uni = (a.end - a.start) + (b.end - b.start) - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

TimeSpan sec_to_index(const TimeSpan& span, const FrameGrid& grid) {
  if (span.units != Units::seconds) throw InvalidArgument("sec_to_index: span is not in seconds");
  require_ordered(span, "sec_to_index");
  if (span.start < 0.0 || span.end > grid.duration_sec()) {
    throw OutOfRange("sec_to_index: span " + describe(span) + " outside video of " +
                     std::to_string(grid.duration_sec()) + " s");
  }
  const double T = grid.num_frames();
  const double scale = T / grid.duration_sec();
  return {std::clamp(span.start * scale, 0.0, T), std::clamp(span.end * scale, 0.0, T), Units::index};
}

TimeSpan index_to_sec(const TimeSpan& span, const FrameGrid& grid) {
  if (span.units != Units::index) throw InvalidArgument("index_to_sec: span is not in index units");
  require_ordered(span, "index_to_sec");
  const double T = grid.num_frames();
  if (span.start < 0.0 || span.end > T) {
    throw OutOfRange("index_to_sec: span " + describe(span) + " outside [0, " +
                     std::to_string(grid.num_frames()) + "]");
  }
  const double D = grid.duration_sec();
  return {std::clamp(span.start / T * D, 0.0, D), std::clamp(span.end / T * D, 0.0, D),
          Units::seconds};
}

TimeSpan clamp_span(const TimeSpan& span, double lo, double hi) {
  if (lo > hi) throw InvalidArgument("clamp_span: lo > hi");
  const double s = std::clamp(span.start, lo, hi);
  const double e = std::clamp(span.end, lo, hi);
  return {std::min(s, e), std::max(s, e), span.units};
}

}  // namespace nlq
