// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "qdc/sim_state.hpp"

namespace qdc {

struct ScheduleAction {
  enum class Kind { Reconfig, Generate, Split };
  Kind kind = Kind::Generate;
  int demand = -1;
  int channel = -1;
  double start = 0.0;
  double duration = 0.0;
};

/// One scheduler invocation at `state.now` under `state.strategy`.
std::vector<ScheduleAction> schedule_tick(SimState& state, SimContext& ctx);

/// The flexible two-round scheduler: regular passes, then splits.
std::vector<ScheduleAction> flexible_tick(SimState& state, SimContext& ctx);
std::vector<ScheduleAction> medium_conservative_tick(SimState& state, SimContext& ctx);
std::vector<ScheduleAction> most_conservative_tick(SimState& state, SimContext& ctx);
/// Medium-conservative order, one reconfiguration per generation, and a
/// generation only when it is the next one its QPU pair will consume.
std::vector<ScheduleAction> baseline_jit_tick(SimState& state, SimContext& ctx);

/// Open appendable channel between the demand's QPUs, if any.
std::optional<int> try_collect(const EprDemand& demand, const SimState& state);

/// The k - 1 distillation copies of an in-rack member, ids from `first_id`.
std::vector<EprDemand> insert_distillation(const EprDemand& in_rack_member, int k, int first_id);

/// A demand is generatable iff every earlier unfinished demand sharing a QPU
/// with it is generatable and not already in flight. Ids in list order.
std::vector<int> medium_conservative_front(const std::vector<EprDemand>& demands,
                                           const std::vector<bool>& completed,
                                           const std::vector<bool>& in_flight);

/// Lowest-id incomplete demand.
std::optional<int> most_conservative_next(const std::vector<EprDemand>& demands,
                                          const std::vector<bool>& completed);

/// Closes open channels with nothing in progress that took no member during
/// the last tick, returning whether any closed.
bool close_idle_channels(SimState& state, SimContext& ctx);

}  // namespace qdc
