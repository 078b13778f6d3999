// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "qdc/topology.hpp"

namespace qdc {

enum class EventKind { Reconfig, EprGen, Swap, Distill, Comm, BufferRelease };
enum class PairCategory { None, Cross, InRack, DistillInput };

std::string_view to_string(EventKind kind);
std::string_view to_string(PairCategory category);

struct SimEvent {
  int id = 0;
  EventKind kind = EventKind::Reconfig;
  double start = 0.0;
  double duration = 0.0;
  std::vector<int> demands;
  std::vector<NodeId> qpus;
  std::vector<NodeId> path;
  int channel = -1;
  NodeId bsm_tor = -1;
  // EprGen: the pair produced. Comm / Distill: pairs consumed. Swap: pairs merged.
  std::vector<int> pairs;
  PairCategory category = PairCategory::None;
  double fidelity = 0.0;
  bool success = true;
  bool completes = false;  // Distill round that finishes a distillation

  double end() const { return start + duration; }
  bool operator==(const SimEvent&) const = default;
};

using Timeline = std::vector<SimEvent>;

double makespan(const Timeline& timeline);

/// `event_id kind start_ms duration_ms demand_ids qpu_ids path`, lists
/// comma-separated, `-` when empty.
void write_trace(const Timeline& timeline, std::ostream& out);

}  // namespace qdc
