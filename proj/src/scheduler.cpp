// SPDX-License-Identifier: Apache-2.0
#include "qdc/scheduler.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

namespace {

using Status = DemandStatus;

std::size_t ix(int i) { return static_cast<std::size_t>(i); }

struct Request {
  PairRequest req;
  std::vector<std::pair<int, SlotClaim>> holds;  // (token, slot)
};

struct Tick {
  SimState& s;
  SimContext& ctx;
  std::vector<ScheduleAction> actions;
};

int group_k(const SplitGroup& g) { return g.plan.distill_copies + 1; }

int root_of(const SimState& s, int id) {
  const auto& d = s.records[ix(id)].demand;
  return d.origin == OriginKind::Program ? id : d.parent;
}

bool urgent(const SimState& s, int id) { return s.consumption.in_front(root_of(s, id)); }

void finish_claims(Request& r) {
  r.req.claims.clear();
  for (const auto& [token, claim] : r.holds) r.req.claims.push_back(claim);
}

Request cross_request(const EprDemand& parent, const SplitPlan& plan, int token, bool front,
                      bool reserved) {
  Request out;
  PairRequest& r = out.req;
  r.demand = token;
  r.a = plan.proxy;
  r.role_a = PairRole::Transit;
  r.b = plan.far;
  r.role_b = role_at(parent, plan.far);
  r.in_front = front;
  if (reserved) r.own_reservation = plan.m;
  out.holds = {{token, {plan.far, r.role_b}}, {token, {plan.proxy, PairRole::Transit}}};
  finish_claims(out);
  return out;
}

Request build_request(const SimState& s, int id) {
  const DemandRecord& rec = s.records[ix(id)];
  const EprDemand& d = rec.demand;
  const bool front = urgent(s, id);
  if (d.origin == OriginKind::Program) {
    Request out;
    out.req = program_request(d, front);
    out.holds = {{id, out.req.claims[0]}, {id, out.req.claims[1]}};
    return out;
  }
  const SplitGroup& g = s.groups[ix(rec.group)];
  const EprDemand& parent = s.records[ix(g.parent)].demand;
  const SplitPlan& plan = g.plan;
  if (d.origin == OriginKind::PostSplitCross)
    return cross_request(parent, plan, id, front, g.progress.reserved);

  Request out;
  PairRequest& r = out.req;
  r.demand = id;
  r.a = plan.busy;
  r.b = plan.proxy;
  r.role_a = d.origin == OriginKind::PostSplitInRack ? role_at(parent, plan.busy) : PairRole::Transit;
  r.role_b = PairRole::Transit;
  r.in_front = front;
  if (g.progress.reserved) r.own_reservation = plan.m;
  if (!g.storage_claimed) {
    // The first in-rack arrival of a group takes the group's storage; later
    // copies reuse it one after another.
    const int token = g.main_member;
    out.holds.push_back({token, {plan.busy, role_at(parent, plan.busy)}});
    out.holds.push_back({token, {plan.proxy, PairRole::Transit}});
    if (group_k(g) >= 2) {
      out.holds.push_back({token, {plan.busy, PairRole::Transit}});
      out.holds.push_back({token, {plan.proxy, PairRole::Transit}});
    }
  }
  finish_claims(out);
  return out;
}

double generation_time(SimState& s, const LatencyModel& lat, bool cross) {
  const double mean = cross ? lat.t_cross_rack : lat.t_in_rack;
  if (!lat.stochastic) return mean;
  std::geometric_distribution<long> failures(lat.tau0 / mean);
  return static_cast<double>(failures(s.rng) + 1) * lat.tau0;
}

PairCategory category_of(const SimState& s, int id) {
  const DemandRecord& rec = s.records[ix(id)];
  if (rec.cross_rack) return PairCategory::Cross;
  if (rec.group >= 0 && rec.demand.origin != OriginKind::Program &&
      group_k(s.groups[ix(rec.group)]) >= 2)
    return PairCategory::DistillInput;
  return PairCategory::InRack;
}

int open_channel(Tick& t, NodeId a, NodeId b, PathReservation path, NodeId tor, int first) {
  SimState& s = t.s;
  Channel c;
  c.id = static_cast<int>(s.channels.size());
  c.a = a;
  c.b = b;
  path.id = c.id;
  path.requires_reconfig = true;
  c.path = std::move(path);
  c.bsm_tor = tor;
  c.appendable = s.strategy == Strategy::Flexible && same_rack(t.ctx.topology, a, b);
  c.opened_at = s.now;
  c.tail_end = s.now + t.ctx.latency.t_reconfig;
  s.occupancy.occupy(c.path);
  ++s.bsm_in_use[ix(tor)];
  ++s.qpus[ix(a)].comm_in_use;
  ++s.qpus[ix(b)].comm_in_use;

  SimEvent ev;
  ev.kind = EventKind::Reconfig;
  ev.start = s.now;
  ev.duration = t.ctx.latency.t_reconfig;
  ev.demands = {first};
  ev.qpus = {a, b};
  ev.path = c.path.nodes;
  ev.channel = c.id;
  ev.bsm_tor = tor;
  emit(s, t.ctx, std::move(ev));
  t.actions.push_back({ScheduleAction::Kind::Reconfig, first, c.id, s.now,
                       t.ctx.latency.t_reconfig});
  s.open_channels.push_back(c.id);
  s.channels.push_back(std::move(c));
  return s.channels.back().id;
}

void append(Tick& t, int channel, int id) {
  SimState& s = t.s;
  Channel& c = s.channels[ix(channel)];
  DemandRecord& rec = s.records[ix(id)];
  const double start = std::max(s.now, c.tail_end);
  const double dur = generation_time(s, t.ctx.latency, rec.cross_rack);
  c.tail_end = start + dur;
  ++c.in_progress;
  c.members.push_back(id);
  c.appended_this_tick = true;
  rec.channel = channel;
  rec.gen_start = start;
  rec.gen_end = start + dur;
  rec.fidelity = rec.cross_rack ? t.ctx.fidelity.f_cross_rack : t.ctx.fidelity.f_in_rack;
  s.completions.insert({rec.gen_end, s.next_seq++, id});

  SimEvent ev;
  ev.kind = EventKind::EprGen;
  ev.start = start;
  ev.duration = dur;
  ev.demands = {id};
  ev.qpus = {rec.demand.qpu_a, rec.demand.qpu_b};
  ev.path = c.path.nodes;
  ev.channel = channel;
  ev.bsm_tor = c.bsm_tor;
  ev.pairs = {id};
  ev.category = category_of(s, id);
  ev.fidelity = rec.fidelity;
  emit(s, t.ctx, std::move(ev));
  t.actions.push_back({ScheduleAction::Kind::Generate, id, channel, start, dur});
}

void commit(Tick& t, int id, const Decision& dec, const Request& rq) {
  SimState& s = t.s;
  const int channel = dec.kind == DecisionKind::Schedulable
                          ? open_channel(t, rq.req.a, rq.req.b, *dec.path, dec.bsm_tor, id)
                          : dec.batch;
  append(t, channel, id);
  for (const auto& [token, claim] : rq.holds) s.qpus[ix(claim.qpu)].hold(token, claim.role);
  DemandRecord& rec = s.records[ix(id)];
  rec.status = Status::Scheduled;
  if (s.pending.contains(id)) {
    if (s.strategy == Strategy::Flexible)
      s.pending.remove_scheduled(id);
    else
      s.pending.erase(id);
  }
  if (rec.demand.origin != OriginKind::Program) {
    SplitGroup& g = s.groups[ix(rec.group)];
    if (rec.demand.origin != OriginKind::PostSplitCross && !rq.holds.empty())
      g.storage_claimed = true;
    settle_split_member(s.qpus, g.plan, g.progress, t.ctx.config.reservation);
  }
}

bool try_schedule(Tick& t, int id, const ConditionParams& params) {
  const Request rq = build_request(t.s, id);
  const auto batches = open_batches(t.s);
  const Decision dec = check_conditions(rq.req, resource_view(t.s, t.ctx, batches), params);
  if (dec.kind == DecisionKind::Blocked) return false;
  commit(t, id, dec, rq);
  return true;
}

ConditionParams flexible_params(const SimContext& ctx) {
  ConditionParams p;
  p.mode = ctx.config.split_enabled ? ConditionMode::Modified : ConditionMode::Basic;
  p.threshold = ctx.config.threshold;
  p.allow_combine = true;
  p.reservation = ctx.config.reservation;
  return p;
}

ConditionParams conservative_params(const SimContext& ctx) {
  ConditionParams p;
  p.mode = ConditionMode::ResourcesOnly;
  p.threshold = ctx.config.threshold;
  p.allow_combine = false;
  p.reservation = ctx.config.reservation;
  return p;
}

// Replaces `id` by its post-split members; returns (cross, in-rack...).
std::vector<int> apply_split(Tick& t, int id, const SplitPlan& plan) {
  SimState& s = t.s;
  const int k = plan.distill_copies + 1;
  const int first = static_cast<int>(s.records.size());
  const int group = static_cast<int>(s.groups.size());

  EprDemand cross = make_cat(first, plan.proxy, plan.far);
  cross.origin = OriginKind::PostSplitCross;
  cross.parent = id;
  EprDemand in_rack = make_cat(first + 1, plan.busy, plan.proxy);
  in_rack.origin = OriginKind::PostSplitInRack;
  in_rack.parent = id;
  std::vector<EprDemand> members{cross, in_rack};
  for (auto& copy : insert_distillation(in_rack, k, first + 2)) members.push_back(copy);

  SplitGroup g;
  g.plan = plan;
  g.parent = id;
  g.cross_member = first;
  g.main_member = first + 1;
  g.progress.total = static_cast<int>(members.size());
  g.expected_arrivals = k;
  for (const auto& m : members) {
    DemandRecord r;
    r.demand = m;
    r.cross_rack = m.origin == OriginKind::PostSplitCross;
    r.group = group;
    s.records.push_back(r);
    g.members.push_back(m.id);
  }
  s.groups.push_back(g);
  DemandRecord& parent = s.records[ix(id)];
  parent.status = Status::Absorbed;
  parent.group = group;
  s.pending.apply_split(id, s.groups.back().members);
  ++s.splits;
  t.actions.push_back({ScheduleAction::Kind::Split, id, -1, s.now, 0.0});
  return s.groups.back().members;
}

bool round_two(Tick& t, std::vector<int>& sub, const ConditionParams& params) {
  SimState& s = t.s;
  const int k = t.ctx.config.distill_k;
  bool snapshotted = false;
  bool any = false;
  const std::size_t n = sub.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int id = sub[i];
    if (!s.pending.contains(id) || !s.pending.in_front(id)) continue;
    const DemandRecord& rec = s.records[ix(id)];
    if (rec.demand.origin != OriginKind::Program || !rec.cross_rack) continue;

    const auto batches = open_batches(s);
    const ResourceView view = resource_view(s, t.ctx, batches);
    const Request rq = build_request(s, id);
    const Decision dec = check_conditions(rq.req, view, params);
    if (dec.kind != DecisionKind::Blocked) continue;
    if (dec.reason != BlockReason::Comm && dec.reason != BlockReason::Channel) continue;
    if (dec.busy_a == dec.busy_b) continue;
    const NodeId busy = dec.busy_a ? rec.demand.qpu_a : rec.demand.qpu_b;
    const auto plan = check_split_conditions(rec.demand, busy, view, k, t.ctx.config.reservation);
    if (!plan) continue;

    const int cross_id = static_cast<int>(s.records.size());
    const Request crq = cross_request(rec.demand, *plan, cross_id, urgent(s, id), false);
    ConditionParams cross_params = params;
    cross_params.allow_combine = false;
    const Decision cdec = check_conditions(crq.req, view, cross_params);
    if (cdec.kind != DecisionKind::Schedulable) continue;

    if (!snapshotted && t.ctx.before_split) {
      t.ctx.before_split(s);
      snapshotted = true;
    }
    const std::vector<int> members = apply_split(t, id, *plan);
    commit(t, members[0], cdec, crq);
    for (std::size_t m = 1; m < members.size(); ++m) {
      try_schedule(t, members[m], params);
      sub.push_back(members[m]);
    }
    any = true;
  }
  return any;
}

// Pending items of the medium-conservative front, in (root id, id) order.
std::vector<int> conservative_items(SimState& s, const SimContext& ctx, bool jit) {
  while (s.root_cursor < s.program_total &&
         s.records[ix(s.root_cursor)].status == Status::Consumed)
    ++s.root_cursor;
  const std::size_t nq = ctx.topology.qpus().size();
  std::vector<char> blocked(ctx.topology.node_count(), 0);
  std::size_t blocked_count = 0;
  auto mark = [&](NodeId q) {
    if (!blocked[ix(q)]) {
      blocked[ix(q)] = 1;
      ++blocked_count;
    }
  };
  auto free_pair = [&](const EprDemand& d) {
    return !blocked[ix(d.qpu_a)] && !blocked[ix(d.qpu_b)];
  };
  std::set<std::pair<NodeId, NodeId>> seen_pairs;
  std::vector<int> items;
  for (int r = s.root_cursor; r < s.program_total && blocked_count < nq; ++r) {
    const DemandRecord& rec = s.records[ix(r)];
    if (rec.status == Status::Consumed) continue;
    const EprDemand& d = rec.demand;
    const bool first_on_pair =
        seen_pairs.insert({std::min(d.qpu_a, d.qpu_b), std::max(d.qpu_a, d.qpu_b)}).second;
    if (rec.group < 0) {
      if (rec.status != Status::Pending) {
        mark(d.qpu_a);
        mark(d.qpu_b);
      } else if (free_pair(d)) {
        if (!jit || first_on_pair) items.push_back(r);
      } else {
        mark(d.qpu_a);
        mark(d.qpu_b);
      }
      continue;
    }
    const SplitGroup& g = s.groups[ix(rec.group)];
    for (int m : g.members) {
      const DemandRecord& mr = s.records[ix(m)];
      if (mr.status == Status::Pending && free_pair(mr.demand)) items.push_back(m);
    }
    for (int m : g.members) {
      const DemandRecord& mr = s.records[ix(m)];
      if (mr.status == Status::Consumed) continue;
      mark(mr.demand.qpu_a);
      mark(mr.demand.qpu_b);
    }
    mark(d.qpu_a);
    mark(d.qpu_b);
  }
  return items;
}

void reset_tick_flags(SimState& s) {
  for (int id : s.open_channels) s.channels[ix(id)].appended_this_tick = false;
}

}  // namespace

std::vector<ScheduleAction> flexible_tick(SimState& state, SimContext& ctx) {
  Tick t{state, ctx, {}};
  const ConditionParams params = flexible_params(ctx);
  std::vector<int> sub = state.pending.lookahead_subgraph(ctx.config.lookahead);
  while (true) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < sub.size(); ++i) {
        const int id = sub[i];
        if (!state.pending.contains(id) || !state.pending.in_front(id)) continue;
        if (try_schedule(t, id, params)) progress = true;
      }
    }
    if (!ctx.config.split_enabled) break;
    if (!round_two(t, sub, params)) break;
  }
  return t.actions;
}

std::vector<ScheduleAction> medium_conservative_tick(SimState& state, SimContext& ctx) {
  Tick t{state, ctx, {}};
  const ConditionParams params = conservative_params(ctx);
  for (int id : conservative_items(state, ctx, false)) try_schedule(t, id, params);
  return t.actions;
}

std::vector<ScheduleAction> baseline_jit_tick(SimState& state, SimContext& ctx) {
  Tick t{state, ctx, {}};
  const ConditionParams params = conservative_params(ctx);
  for (int id : conservative_items(state, ctx, true)) try_schedule(t, id, params);
  return t.actions;
}

std::vector<ScheduleAction> most_conservative_tick(SimState& state, SimContext& ctx) {
  Tick t{state, ctx, {}};
  if (!state.open_channels.empty()) return {};
  while (state.root_cursor < state.program_total &&
         state.records[ix(state.root_cursor)].status == Status::Consumed)
    ++state.root_cursor;
  if (state.root_cursor >= state.program_total) return {};
  const ConditionParams params = conservative_params(ctx);
  const DemandRecord& rec = state.records[ix(state.root_cursor)];
  if (rec.group < 0) {
    if (rec.status == Status::Pending) try_schedule(t, state.root_cursor, params);
    return t.actions;
  }
  for (int m : state.groups[ix(rec.group)].members) {
    if (state.records[ix(m)].status != Status::Pending) continue;
    try_schedule(t, m, params);
    break;
  }
  return t.actions;
}

std::vector<ScheduleAction> schedule_tick(SimState& state, SimContext& ctx) {
  reset_tick_flags(state);
  switch (state.strategy) {
    case Strategy::Flexible: return flexible_tick(state, ctx);
    case Strategy::MediumConservative: return medium_conservative_tick(state, ctx);
    case Strategy::MostConservative: return most_conservative_tick(state, ctx);
    case Strategy::BaselineJIT: return baseline_jit_tick(state, ctx);
  }
  return {};
}

std::optional<int> try_collect(const EprDemand& demand, const SimState& state) {
  for (int id : state.open_channels) {
    const Channel& c = state.channels[ix(id)];
    if (!c.appendable) continue;
    if ((c.a == demand.qpu_a && c.b == demand.qpu_b) || (c.a == demand.qpu_b && c.b == demand.qpu_a))
      return c.id;
  }
  return std::nullopt;
}

std::vector<EprDemand> insert_distillation(const EprDemand& in_rack_member, int k, int first_id) {
  std::vector<EprDemand> copies;
  for (int i = 0; i + 1 < k; ++i) {
    EprDemand c = make_cat(first_id + i, in_rack_member.qpu_a, in_rack_member.qpu_b);
    c.origin = OriginKind::DistillCopy;
    c.parent = in_rack_member.parent;
    copies.push_back(c);
  }
  return copies;
}

std::vector<int> medium_conservative_front(const std::vector<EprDemand>& demands,
                                           const std::vector<bool>& completed,
                                           const std::vector<bool>& in_flight) {
  std::set<NodeId> blocked;
  std::vector<int> out;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (completed[i]) continue;
    const EprDemand& d = demands[i];
    const bool free = !blocked.count(d.qpu_a) && !blocked.count(d.qpu_b);
    if (in_flight[i] || !free) {
      blocked.insert(d.qpu_a);
      blocked.insert(d.qpu_b);
      continue;
    }
    out.push_back(static_cast<int>(i));
  }
  return out;
}

std::optional<int> most_conservative_next(const std::vector<EprDemand>& demands,
                                          const std::vector<bool>& completed) {
  for (std::size_t i = 0; i < demands.size(); ++i)
    if (!completed[i]) return static_cast<int>(i);
  return std::nullopt;
}

bool close_idle_channels(SimState& state, SimContext& ctx) {
  (void)ctx;
  bool any = false;
  std::vector<int> still_open;
  for (int id : state.open_channels) {
    Channel& c = state.channels[ix(id)];
    if (c.in_progress > 0 || c.appended_this_tick) {
      still_open.push_back(id);
      continue;
    }
    state.occupancy.release(c.path);
    --state.bsm_in_use[ix(c.bsm_tor)];
    --state.qpus[ix(c.a)].comm_in_use;
    --state.qpus[ix(c.b)].comm_in_use;
    c.open = false;
    any = true;
  }
  state.open_channels = std::move(still_open);
  return any;
}

}  // namespace qdc
