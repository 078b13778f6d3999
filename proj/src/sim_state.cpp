// SPDX-License-Identifier: Apache-2.0
#include "qdc/sim_state.hpp"

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::Flexible: return "flexible";
    case Strategy::MediumConservative: return "medium_conservative";
    case Strategy::MostConservative: return "most_conservative";
    case Strategy::BaselineJIT: return "baseline_jit";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "flexible") return Strategy::Flexible;
  if (text == "medium_conservative") return Strategy::MediumConservative;
  if (text == "most_conservative") return Strategy::MostConservative;
  if (text == "baseline_jit" || text == "baseline") return Strategy::BaselineJIT;
  throw ConfigError(fmt::format("unknown strategy '{}'", text));
}

void SchedulerConfig::validate() const {
  if (lookahead < 1) throw ConfigError(fmt::format("lookahead must be >= 1 (got {})", lookahead));
  if (distill_k < 1) throw ConfigError(fmt::format("distill_k must be >= 1 (got {})", distill_k));
  if (threshold < 0) throw ConfigError(fmt::format("threshold must be >= 0 (got {})", threshold));
}

SimState make_initial_state(const NetworkTopology& topology, const std::vector<EprDemand>& demands,
                            const SchedulerConfig& config, const LatencyModel& latency) {
  SimState s;
  s.strategy = config.strategy;
  s.records.reserve(demands.size());
  for (const auto& d : demands) {
    DemandRecord r;
    r.demand = d;
    r.cross_rack = !same_rack(topology, d.qpu_a, d.qpu_b);
    s.records.push_back(r);
  }
  s.pending = build_dag(demands);
  s.consumption = s.pending;
  s.qpus.resize(topology.node_count());
  for (NodeId q : topology.qpus())
    s.qpus[static_cast<std::size_t>(q)] = make_qpu_state(topology.qpu_spec(q));
  s.occupancy = Occupancy(topology);
  s.bsm_in_use.assign(topology.node_count(), 0);
  s.program_total = static_cast<int>(demands.size());
  s.rng.seed(latency.seed);
  return s;
}

void emit(SimState& state, SimContext& ctx, SimEvent event) {
  event.id = static_cast<int>(ctx.timeline.size());
  ctx.timeline.push_back(std::move(event));
  state.timeline_len = ctx.timeline.size();
}

std::vector<OpenBatch> open_batches(const SimState& state) {
  std::vector<OpenBatch> out;
  for (int id : state.open_channels) {
    const Channel& c = state.channels[static_cast<std::size_t>(id)];
    if (c.appendable) out.push_back({c.id, c.a, c.b});
  }
  return out;
}

ResourceView resource_view(const SimState& state, const SimContext& ctx,
                           const std::vector<OpenBatch>& batches) {
  return ResourceView{ctx.topology, state.qpus, state.bsm_in_use, state.occupancy, batches};
}

}  // namespace qdc
