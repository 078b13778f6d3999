// SPDX-License-Identifier: Apache-2.0
#include "qdc/timeline.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace qdc {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Reconfig: return "reconfig";
    case EventKind::EprGen: return "epr_gen";
    case EventKind::Swap: return "swap";
    case EventKind::Distill: return "distill";
    case EventKind::Comm: return "comm";
    case EventKind::BufferRelease: return "buffer_release";
  }
  return "?";
}

std::string_view to_string(PairCategory category) {
  switch (category) {
    case PairCategory::None: return "none";
    case PairCategory::Cross: return "cross";
    case PairCategory::InRack: return "in_rack";
    case PairCategory::DistillInput: return "distill_input";
  }
  return "?";
}

double makespan(const Timeline& timeline) {
  double end = 0.0;
  for (const auto& ev : timeline) end = std::max(end, ev.end());
  return end;
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
  if (v.empty()) return "-";
  return fmt::format("{}", fmt::join(v, ","));
}

}  // namespace

void write_trace(const Timeline& timeline, std::ostream& out) {
  for (const auto& ev : timeline)
    out << fmt::format("{} {} {:.6f} {:.6f} {} {} {}\n", ev.id, to_string(ev.kind), ev.start,
                       ev.duration, join(ev.demands), join(ev.qpus), join(ev.path));
}

}  // namespace qdc
