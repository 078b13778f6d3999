// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdc/metrics.hpp"
#include "qdc/sim_state.hpp"

namespace qdc {

enum class RunStatus { Completed, Stalled };

std::string_view to_string(RunStatus status);

struct SimResult {
  RunStatus status = RunStatus::Completed;
  Timeline timeline;
  MetricsReport metrics;
  double makespan = 0.0;
  int stalls = 0;
  int downgrades = 0;
  int splits = 0;
  Strategy final_strategy = Strategy::Flexible;
  std::string stall_dump;  // wait-for state at the last stall
};

/// A restorable copy of the engine state.
using Snapshot = SimState;

/// Nothing in flight and program demands left: no event can ever fire.
bool detect_stall(const SimState& state);

/// Human-readable wait-for state: unfinished demands and per-QPU resources.
std::string wait_for_dump(const SimState& state, const NetworkTopology& topology);

/// Event-driven run over one demand list. The scheduler runs at every event
/// boundary; on a stall the engine rolls back to the last pre-split snapshot
/// and continues with a more conservative strategy.
class Engine {
 public:
  /// Throws ConfigError for demands the topology can never serve.
  Engine(const NetworkTopology& topology, std::vector<EprDemand> demands, SchedulerConfig config,
         LatencyModel latency, FidelityModel fidelity);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Runs to completion, or to a stall when auto-retry is off. Throws
  /// SimulationError if even the most conservative strategy stalls.
  SimResult run();

  /// Schedules at the current instant, then advances to the next event
  /// boundary. Returns false once nothing is left to advance to.
  bool step();

  bool done() const;
  /// Only meaningful once the current instant has been scheduled.
  bool stalled() const { return settled_ && detect_stall(state_); }

  Snapshot snapshot() const { return state_; }
  void restore(const Snapshot& snapshot);

  const SimState& state() const { return state_; }
  const Timeline& timeline() const { return timeline_; }
  const SchedulerConfig& config() const { return config_; }
  int downgrades() const { return downgrades_; }
  int stalls() const { return stalls_; }

 private:
  void settle();
  void advance();
  void complete(int demand);
  void arrive(SplitGroup& group, int demand);
  void add_distill_copies(int group, int count);
  void try_swap(SplitGroup& group);
  void consume_ready();
  void consume(int demand);
  void check_invariants() const;
  bool recover();

  const NetworkTopology& topology_;
  std::vector<EprDemand> demands_;
  SchedulerConfig config_;
  LatencyModel latency_;
  FidelityModel fidelity_;
  Timeline timeline_;
  SimContext ctx_;
  SimState state_;
  Snapshot initial_;
  std::optional<Snapshot> latest_;
  bool settled_ = false;
  bool restarted_ = false;
  int downgrades_ = 0;
  int stalls_ = 0;
  std::string last_dump_;
};

SimResult simulate(const NetworkTopology& topology, const std::vector<EprDemand>& demands,
                   const SchedulerConfig& config, const LatencyModel& latency,
                   const FidelityModel& fidelity);

}  // namespace qdc
