// SPDX-License-Identifier: Apache-2.0
#include "qdc/engine.hpp"

#include <map>
#include <set>

#include <fmt/format.h>

#include "qdc/errors.hpp"
#include "qdc/scheduler.hpp"

namespace qdc {

namespace {

using Status = DemandStatus;

// Completions closer than this are treated as simultaneous.
constexpr double kTimeEps = 1e-9;

std::size_t ix(int i) { return static_cast<std::size_t>(i); }

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Pending: return "pending";
    case Status::Scheduled: return "scheduled";
    case Status::Generated: return "generated";
    case Status::Absorbed: return "split";
    case Status::Ready: return "ready";
    case Status::Consumed: return "consumed";
  }
  return "?";
}

// Rejects inputs that no strategy could ever finish.
void check_servable(const NetworkTopology& topology, const std::vector<EprDemand>& demands) {
  validate_demands(demands, topology);
  std::map<NodeId, int> capacity;
  for (NodeId q : topology.qpus()) capacity[q] = topology.qpu_spec(q).buffer_qubits;
  std::set<std::pair<NodeId, NodeId>> routed;
  const Occupancy empty(topology);
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const EprDemand& d = demands[i];
    if (d.id != static_cast<int>(i))
      throw ConfigError(fmt::format("demand at position {} has id {}", i, d.id));
    for (NodeId q : {d.qpu_a, d.qpu_b}) {
      if (topology.qpu_spec(q).comm_qubits < 1)
        throw ConfigError(fmt::format("demand {} needs QPU {} which has no communication qubit",
                                      d.id, topology.node(q).name));
      if (capacity[q] < 1)
        throw ConfigError(fmt::format("demand {} finds no buffer qubit on QPU {}", d.id,
                                      topology.node(q).name));
    }
    if (topology.bsm_count(topology.tor_of(d.qpu_a)) + topology.bsm_count(topology.tor_of(d.qpu_b)) <
        1)
      throw ConfigError(fmt::format("demand {} has no BSM on either rack", d.id));
    const auto key = std::minmax(d.qpu_a, d.qpu_b);
    if (routed.insert(key).second && !find_available_path(topology, empty, d.qpu_a, d.qpu_b))
      throw ConfigError(fmt::format("demand {} has no route between its QPUs", d.id));
    if (d.protocol == Protocol::Tp) {
      ++capacity[d.tp_source];
      --capacity[d.tp_dest];
    }
  }
}

}  // namespace

std::string_view to_string(RunStatus status) {
  return status == RunStatus::Completed ? "completed" : "stalled";
}

bool detect_stall(const SimState& state) {
  return state.completions.empty() && state.program_consumed < state.program_total;
}

std::string wait_for_dump(const SimState& state, const NetworkTopology& topology) {
  std::string out = fmt::format("t={} strategy={} consumed={}/{}\n", state.now,
                                to_string(state.strategy), state.program_consumed,
                                state.program_total);
  for (int id = 0; id < state.program_total; ++id) {
    const DemandRecord& r = state.records[ix(id)];
    if (r.status == Status::Consumed) continue;
    out += fmt::format("  demand {} ({},{}) {}", id, topology.node(r.demand.qpu_a).name,
                       topology.node(r.demand.qpu_b).name, status_name(r.status));
    if (r.group >= 0) {
      const SplitGroup& g = state.groups[ix(r.group)];
      out += fmt::format(" via {}:", topology.node(g.plan.proxy).name);
      for (int m : g.members)
        out += fmt::format(" {}={}", m, status_name(state.records[ix(m)].status));
    }
    if (state.pending.contains(id) && !state.pending.predecessors(id).empty())
      out += fmt::format(" waits-for {}", fmt::join(state.pending.predecessors(id), ","));
    out += "\n";
  }
  for (NodeId q : topology.qpus()) {
    const QpuState& s = state.qpus[ix(q)];
    out += fmt::format("  qpu {} buffer {}/{} projected {} reserved {} comm {}/{}\n",
                       topology.node(q).name, s.buffer_in_use, s.buffer_capacity,
                       projected_buffer(s), s.reserved_buffer, s.comm_in_use, s.comm_total);
  }
  return out;
}

Engine::Engine(const NetworkTopology& topology, std::vector<EprDemand> demands,
               SchedulerConfig config, LatencyModel latency, FidelityModel fidelity)
    : topology_(topology),
      demands_(std::move(demands)),
      config_(config),
      latency_(latency),
      fidelity_(fidelity),
      ctx_{topology_, config_, latency_, fidelity_, timeline_, {}} {
  config_.validate();
  latency_.validate();
  fidelity_.validate();
  if (config_.distill_k >= 2) distill_werner(fidelity_.f_in_rack, config_.distill_k);
  check_servable(topology_, demands_);
  ctx_.before_split = [this](const SimState& s) { latest_ = s; };
  state_ = make_initial_state(topology_, demands_, config_, latency_);
  initial_ = state_;
}

bool Engine::done() const {
  return state_.program_consumed == state_.program_total && state_.completions.empty();
}

void Engine::restore(const Snapshot& snapshot) {
  state_ = snapshot;
  timeline_.resize(state_.timeline_len);
  settled_ = false;
}

bool Engine::step() {
  if (!settled_) {
    settle();
    settled_ = true;
  }
  if (done()) return false;
  if (state_.completions.empty()) {
    ++stalls_;
    last_dump_ = wait_for_dump(state_, topology_);
    if (!config_.auto_retry) return false;
    if (!recover())
      throw SimulationError("no progress under the most conservative strategy\n" + last_dump_);
    return true;
  }
  advance();
  settled_ = false;
  return true;
}

SimResult Engine::run() {
  while (step()) {
  }
  SimResult r;
  r.status = done() ? RunStatus::Completed : RunStatus::Stalled;
  r.timeline = timeline_;
  r.makespan = makespan(timeline_);
  r.metrics = compute_metrics(timeline_, latency_, fidelity_);
  r.stalls = stalls_;
  r.downgrades = downgrades_;
  r.splits = state_.splits;
  r.final_strategy = state_.strategy;
  r.stall_dump = last_dump_;
  return r;
}

bool Engine::recover() {
  const Strategy current = state_.strategy;
  if (current == Strategy::MostConservative) {
    // Work generated ahead of time can pin buffers that the strict order
    // needs; starting over from nothing cannot.
    if (restarted_) return false;
    restarted_ = true;
    restore(initial_);
    state_.strategy = Strategy::MostConservative;
    return true;
  }
  const Strategy next = current == Strategy::Flexible ? Strategy::MediumConservative
                                                      : Strategy::MostConservative;
  restore(latest_ ? *latest_ : initial_);
  state_.strategy = next;
  ++downgrades_;
  return true;
}

void Engine::settle() {
  consume_ready();
  do {
    schedule_tick(state_, ctx_);
  } while (close_idle_channels(state_, ctx_));
  check_invariants();
}

void Engine::advance() {
  const double t = state_.completions.begin()->time;
  state_.now = t;
  while (!state_.completions.empty() && state_.completions.begin()->time <= t + kTimeEps) {
    const Completion c = *state_.completions.begin();
    state_.completions.erase(state_.completions.begin());
    complete(c.demand);
  }
  check_invariants();
}

void Engine::complete(int demand) {
  DemandRecord& rec = state_.records[ix(demand)];
  Channel& ch = state_.channels[ix(rec.channel)];
  if (ch.in_progress < 1) throw InvariantError(fmt::format("channel {} underflow", ch.id));
  --ch.in_progress;
  switch (rec.demand.origin) {
    case OriginKind::Program: rec.status = Status::Ready; return;
    case OriginKind::PostSplitCross: {
      rec.status = Status::Generated;
      SplitGroup& g = state_.groups[ix(rec.group)];
      g.cross_ready = true;
      try_swap(g);
      return;
    }
    case OriginKind::PostSplitInRack:
    case OriginKind::DistillCopy: arrive(state_.groups[ix(rec.group)], demand); return;
  }
}

void Engine::arrive(SplitGroup& g, int demand) {
  DemandRecord& rec = state_.records[ix(demand)];
  rec.status = Status::Generated;
  --g.expected_arrivals;
  const int k = g.plan.distill_copies + 1;
  if (g.held_pair < 0) {
    g.held_pair = demand;
    g.held_fidelity = rec.fidelity;
  } else {
    const DistillResult round = werner_round(g.held_fidelity, rec.fidelity);
    bool ok = true;
    if (latency_.stochastic) ok = std::bernoulli_distribution(round.success_probability)(state_.rng);
    SimEvent ev;
    ev.kind = EventKind::Distill;
    ev.start = state_.now;
    ev.demands = {g.parent};
    ev.qpus = {g.plan.busy, g.plan.proxy};
    ev.success = ok;
    if (ok) {
      ++g.rounds;
      g.held_fidelity = round.fidelity;
      rec.status = Status::Consumed;
      ev.pairs = {demand};
      ev.fidelity = round.fidelity;
      ev.completes = g.rounds == k - 1;
    } else {
      // Both pairs are lost; start over with fresh copies.
      state_.records[ix(g.held_pair)].status = Status::Consumed;
      rec.status = Status::Consumed;
      ev.pairs = {demand, g.held_pair};
      g.held_pair = -1;
      g.held_fidelity = 0.0;
      g.rounds = 0;
    }
    emit(state_, ctx_, std::move(ev));
    if (!ok) {
      const int group = static_cast<int>(&g - state_.groups.data());
      add_distill_copies(group, k - g.expected_arrivals);
      return;
    }
  }
  if (k >= 2 && g.consolidated(k) && !g.transient_released) {
    state_.qpus[ix(g.plan.busy)].drop(g.main_member, PairRole::Transit);
    state_.qpus[ix(g.plan.proxy)].drop(g.main_member, PairRole::Transit);
    g.transient_released = true;
    SimEvent ev;
    ev.kind = EventKind::BufferRelease;
    ev.start = state_.now;
    ev.demands = {g.parent};
    ev.qpus = {g.plan.busy, g.plan.proxy};
    emit(state_, ctx_, std::move(ev));
  }
  try_swap(g);
}

void Engine::add_distill_copies(int group, int count) {
  if (count <= 0) return;
  const int first = static_cast<int>(state_.records.size());
  const EprDemand main = state_.records[ix(state_.groups[ix(group)].main_member)].demand;
  for (const EprDemand& c : insert_distillation(main, count + 1, first)) {
    DemandRecord r;
    r.demand = c;
    r.group = group;
    state_.records.push_back(r);
    state_.groups[ix(group)].members.push_back(c.id);
    state_.pending.add_node(c.id, {});
  }
  state_.groups[ix(group)].expected_arrivals += count;
}

void Engine::try_swap(SplitGroup& g) {
  const int k = g.plan.distill_copies + 1;
  if (g.swapped || !g.cross_ready || !g.consolidated(k)) return;
  QpuState& proxy = state_.qpus[ix(g.plan.proxy)];
  proxy.drop(g.cross_member, PairRole::Transit);
  proxy.drop(g.main_member, PairRole::Transit);
  g.swapped = true;
  const double f_cross = state_.records[ix(g.cross_member)].fidelity;
  DemandRecord& parent = state_.records[ix(g.parent)];
  parent.fidelity = swap_fidelity(f_cross, g.held_fidelity);
  parent.status = Status::Ready;

  SimEvent ev;
  ev.kind = EventKind::Swap;
  ev.start = state_.now;
  ev.demands = {g.parent};
  ev.qpus = {g.plan.busy, g.plan.proxy, g.plan.far};
  ev.pairs = {g.cross_member, g.held_pair};
  ev.fidelity = parent.fidelity;
  emit(state_, ctx_, std::move(ev));
}

void Engine::consume_ready() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (int id : state_.consumption.front_layer()) {
      if (state_.records[ix(id)].status != Status::Ready) continue;
      consume(id);
      changed = true;
    }
  }
}

void Engine::consume(int demand) {
  DemandRecord& rec = state_.records[ix(demand)];
  const EprDemand& d = rec.demand;
  std::vector<std::pair<NodeId, int>> slots;  // (qpu, token)
  std::vector<int> pairs;
  if (rec.group < 0) {
    slots = {{d.qpu_a, demand}, {d.qpu_b, demand}};
    pairs = {demand};
  } else {
    const SplitGroup& g = state_.groups[ix(rec.group)];
    slots = {{g.plan.far, g.cross_member}, {g.plan.busy, g.main_member}};
    pairs = {g.cross_member, g.held_pair};
    state_.records[ix(g.cross_member)].status = Status::Consumed;
    state_.records[ix(g.held_pair)].status = Status::Consumed;
  }
  for (const auto& [q, token] : slots) {
    const PairRole role = role_at(d, q);
    QpuState& s = state_.qpus[ix(q)];
    s.drop(token, role);
    if (role == PairRole::TpSource) ++s.buffer_capacity;
    if (role == PairRole::TpDest) --s.buffer_capacity;
  }
  SimEvent ev;
  ev.kind = EventKind::Comm;
  ev.start = state_.now;
  ev.demands = {demand};
  ev.qpus = {d.qpu_a, d.qpu_b};
  ev.pairs = std::move(pairs);
  ev.fidelity = rec.fidelity;
  emit(state_, ctx_, std::move(ev));
  rec.status = Status::Consumed;
  state_.consumption.remove_scheduled(demand);
  ++state_.program_consumed;
}

void Engine::check_invariants() const {
  const bool reserving = state_.strategy == Strategy::Flexible && config_.reservation;
  for (NodeId q : topology_.qpus()) {
    const QpuState& s = state_.qpus[ix(q)];
    const auto& name = topology_.node(q).name;
    if (s.buffer_in_use < 0 || s.buffer_in_use > s.buffer_capacity)
      throw InvariantError(fmt::format("t={}: buffer {}/{} on {}", state_.now, s.buffer_in_use,
                                       s.buffer_capacity, name));
    if (s.comm_in_use < 0 || s.comm_in_use > s.comm_total)
      throw InvariantError(fmt::format("t={}: comm {}/{} on {}", state_.now, s.comm_in_use,
                                       s.comm_total, name));
    if (s.reserved_buffer < 0)
      throw InvariantError(fmt::format("t={}: negative reservation on {}", state_.now, name));
    if (reserving && s.reserved_buffer > projected_buffer(s))
      throw InvariantError(fmt::format("t={}: reserved {} exceeds projected {} on {}", state_.now,
                                       s.reserved_buffer, projected_buffer(s), name));
  }
  for (const Rack& rack : topology_.racks()) {
    const int used = state_.bsm_in_use[ix(rack.tor)];
    if (used < 0 || used > topology_.bsm_count(rack.tor))
      throw InvariantError(fmt::format("t={}: {} BSMs in use on {}", state_.now, used,
                                       topology_.node(rack.tor).name));
  }
}

SimResult simulate(const NetworkTopology& topology, const std::vector<EprDemand>& demands,
                   const SchedulerConfig& config, const LatencyModel& latency,
                   const FidelityModel& fidelity) {
  Engine engine(topology, demands, config, latency, fidelity);
  return engine.run();
}

}  // namespace qdc
