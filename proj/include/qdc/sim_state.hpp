// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <random>
#include <set>
#include <vector>

#include "qdc/demand_dag.hpp"
#include "qdc/models.hpp"
#include "qdc/resources.hpp"
#include "qdc/timeline.hpp"
#include "qdc/topology.hpp"
#include "qdc/workload.hpp"

namespace qdc {

enum class Strategy { Flexible, MediumConservative, MostConservative, BaselineJIT };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct SchedulerConfig {
  int lookahead = 10;
  int threshold = 0;  // <= 0: comm_total of each QPU
  Strategy strategy = Strategy::Flexible;
  int distill_k = 2;
  bool split_enabled = true;
  bool reservation = true;
  bool auto_retry = true;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

enum class DemandStatus {
  Pending,    // not scheduled
  Scheduled,  // generating on a channel
  Generated,  // split member stored, waiting for its merge
  Absorbed,   // split parent, waiting for its swap
  Ready,      // program pair available to its communication
  Consumed,
};

struct DemandRecord {
  EprDemand demand;
  DemandStatus status = DemandStatus::Pending;
  bool cross_rack = false;
  int group = -1;
  int channel = -1;
  double gen_start = 0.0;
  double gen_end = 0.0;
  double fidelity = 0.0;

  bool operator==(const DemandRecord&) const = default;
};

/// One reconfigured optical channel. In-rack channels under the flexible
/// strategy take further members back to back (in-rack collection).
struct Channel {
  int id = -1;
  NodeId a = -1;
  NodeId b = -1;
  PathReservation path;
  NodeId bsm_tor = -1;
  bool appendable = false;
  bool open = true;
  bool appended_this_tick = false;
  std::vector<int> members;
  double opened_at = 0.0;
  double tail_end = 0.0;
  int in_progress = 0;

  bool operator==(const Channel&) const = default;
};

struct SplitGroup {
  SplitPlan plan;
  int parent = -1;
  int cross_member = -1;
  int main_member = -1;  // token for the group's in-rack storage
  std::vector<int> members;
  SplitProgress progress;
  bool storage_claimed = false;
  bool cross_ready = false;
  int held_pair = -1;
  double held_fidelity = 0.0;
  int rounds = 0;
  int expected_arrivals = 0;
  bool transient_released = false;
  bool swapped = false;

  bool consolidated(int k) const { return held_pair >= 0 && rounds >= k - 1; }
  bool operator==(const SplitGroup&) const = default;
};

struct Completion {
  double time = 0.0;
  long seq = 0;
  int demand = -1;
  auto operator<=>(const Completion&) const = default;
};

/// Everything a run mutates. Copyable, so a copy is a snapshot; the timeline
/// lives outside and is cut back to `timeline_len` on restore.
struct SimState {
  double now = 0.0;
  Strategy strategy = Strategy::Flexible;
  std::vector<DemandRecord> records;
  DemandDag pending;      // scheduling order
  DemandDag consumption;  // program demands not yet consumed
  std::vector<QpuState> qpus;
  Occupancy occupancy;
  std::vector<int> bsm_in_use;
  std::vector<Channel> channels;
  std::vector<int> open_channels;  // ascending ids
  std::vector<SplitGroup> groups;
  std::set<Completion> completions;
  long next_seq = 0;
  int program_total = 0;
  int program_consumed = 0;
  int splits = 0;
  int root_cursor = 0;  // no program demand below this id is unconsumed
  std::size_t timeline_len = 0;
  std::mt19937_64 rng;

  bool operator==(const SimState&) const = default;
};

/// Read-only inputs plus the trace sink.
struct SimContext {
  const NetworkTopology& topology;
  const SchedulerConfig& config;
  const LatencyModel& latency;
  const FidelityModel& fidelity;
  Timeline& timeline;
  std::function<void(const SimState&)> before_split;  // snapshot hook
};

SimState make_initial_state(const NetworkTopology& topology, const std::vector<EprDemand>& demands,
                            const SchedulerConfig& config, const LatencyModel& latency);

/// Appends an event, assigning its id, and keeps `timeline_len` in step.
void emit(SimState& state, SimContext& ctx, SimEvent event);

ResourceView resource_view(const SimState& state, const SimContext& ctx,
                           const std::vector<OpenBatch>& batches);
std::vector<OpenBatch> open_batches(const SimState& state);

}  // namespace qdc
