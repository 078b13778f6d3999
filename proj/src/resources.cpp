// SPDX-License-Identifier: Apache-2.0
#include "qdc/resources.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

std::string_view to_string(PairRole role) {
  switch (role) {
    case PairRole::Cat: return "cat";
    case PairRole::TpSource: return "tp_source";
    case PairRole::TpDest: return "tp_dest";
    case PairRole::Transit: return "transit";
  }
  return "?";
}

int role_gain(PairRole role) {
  switch (role) {
    case PairRole::Cat: return 1;
    case PairRole::TpSource: return 2;
    case PairRole::TpDest: return 0;
    case PairRole::Transit: return 1;
  }
  return 0;
}

std::string_view to_string(BlockReason reason) {
  switch (reason) {
    case BlockReason::None: return "none";
    case BlockReason::Comm: return "comm";
    case BlockReason::Bsm: return "bsm";
    case BlockReason::Channel: return "channel";
    case BlockReason::BufferThreshold: return "buffer-threshold";
    case BlockReason::Storage: return "storage";
  }
  return "?";
}

void QpuState::hold(int pair, PairRole role) {
  if (free_buffer() < 1)
    throw InvariantError(fmt::format("no free buffer slot for pair {}", pair));
  ++buffer_in_use;
  scheduled_pairs.push_back({pair, role});
}

void QpuState::drop(int pair, PairRole role) {
  auto it = std::find(scheduled_pairs.begin(), scheduled_pairs.end(), HeldPair{pair, role});
  if (it == scheduled_pairs.end())
    throw InvariantError(fmt::format("pair {} ({}) is not held", pair, to_string(role)));
  scheduled_pairs.erase(it);
  --buffer_in_use;
}

QpuState make_qpu_state(const QpuSpec& spec) {
  QpuState s;
  s.buffer_capacity = spec.buffer_qubits;
  s.comm_total = spec.comm_qubits;
  return s;
}

int projected_buffer(const QpuState& state) {
  int total = state.free_buffer();
  for (const auto& held : state.scheduled_pairs) total += role_gain(held.role);
  return total;
}

bool basic_buffer_condition(int free_buffer, int avail_comm, int threshold, bool in_front) {
  return free_buffer + avail_comm >= threshold * (in_front ? 0 : 1);
}

bool modified_buffer_condition(PairRole role, int projected_minus_reserved, int avail_comm,
                               int threshold, bool in_front) {
  const int rhs = threshold * (in_front ? 0 : 1);
  if (role == PairRole::TpDest) return projected_minus_reserved + avail_comm - 1 >= rhs;
  return projected_minus_reserved + avail_comm > rhs;
}

PairRole role_at(const EprDemand& demand, NodeId qpu) {
  if (demand.protocol == Protocol::Cat) return PairRole::Cat;
  if (qpu == demand.tp_source) return PairRole::TpSource;
  if (qpu == demand.tp_dest) return PairRole::TpDest;
  throw InvariantError(fmt::format("QPU {} is not an endpoint of demand {}", qpu, demand.id));
}

PairRequest program_request(const EprDemand& demand, bool in_front) {
  PairRequest r;
  r.demand = demand.id;
  r.a = demand.qpu_a;
  r.b = demand.qpu_b;
  r.role_a = role_at(demand, demand.qpu_a);
  r.role_b = role_at(demand, demand.qpu_b);
  r.in_front = in_front;
  r.claims = {{r.a, r.role_a}, {r.b, r.role_b}};
  return r;
}

NodeId choose_bsm_tor(const ResourceView& view, NodeId a, NodeId b) {
  const NodeId ta = view.topology.tor_of(a);
  const NodeId tb = view.topology.tor_of(b);
  auto free_at = [&](NodeId tor) {
    return view.topology.bsm_count(tor) - view.bsm_in_use[static_cast<std::size_t>(tor)];
  };
  const int fa = free_at(ta);
  const int fb = ta == tb ? fa : free_at(tb);
  if (fa <= 0 && fb <= 0) return -1;
  return fb > fa ? tb : ta;
}

namespace {

bool endpoint_busy(const ResourceView& view, NodeId q) {
  if (view.qpus[static_cast<std::size_t>(q)].avail_comm() < 1) return true;
  const auto uplink = view.topology.edge_between(q, view.topology.tor_of(q));
  return !uplink || view.occupancy.free_slots(*uplink) < 1;
}

int own_share(const PairRequest& r, NodeId q) {
  int total = 0;
  for (const auto& [node, m] : r.own_reservation)
    if (node == q) total += m;
  return total;
}

Decision blocked(Decision d, BlockReason reason) {
  d.kind = DecisionKind::Blocked;
  d.reason = reason;
  d.path.reset();
  d.bsm_tor = -1;
  d.batch = -1;
  return d;
}

}  // namespace

Decision check_conditions(const PairRequest& request, const ResourceView& view,
                          const ConditionParams& params) {
  const NodeId a = request.a;
  const NodeId b = request.b;
  const QpuState& sa = view.qpus[static_cast<std::size_t>(a)];
  const QpuState& sb = view.qpus[static_cast<std::size_t>(b)];
  Decision d;
  d.busy_a = endpoint_busy(view, a);
  d.busy_b = endpoint_busy(view, b);
  const bool in_rack = same_rack(view.topology, a, b);

  BlockReason fail = BlockReason::None;
  if (sa.avail_comm() < 1 || sb.avail_comm() < 1) {
    fail = BlockReason::Comm;
  } else if (const NodeId tor = choose_bsm_tor(view, a, b); tor < 0) {
    fail = BlockReason::Bsm;
  } else if (auto path = find_available_path(view.topology, view.occupancy, a, b); !path) {
    fail = BlockReason::Channel;
  } else {
    d.kind = DecisionKind::Schedulable;
    d.path = std::move(path);
    d.bsm_tor = tor;
  }

  if (fail != BlockReason::None) {
    if (params.allow_combine && in_rack) {
      for (const auto& batch : view.open_batches)
        if ((batch.a == a && batch.b == b) || (batch.a == b && batch.b == a)) {
          d.batch = batch.id;
          break;
        }
    }
    if (d.batch < 0) return blocked(d, fail);
    d.kind = DecisionKind::Combinable;
  }

  const std::pair<NodeId, PairRole> ends[2] = {{a, request.role_a}, {b, request.role_b}};
  if (params.mode != ConditionMode::ResourcesOnly) {
    for (const auto& [q, role] : ends) {
      const QpuState& s = view.qpus[static_cast<std::size_t>(q)];
      const int threshold = params.threshold > 0 ? params.threshold : s.comm_total;
      bool ok;
      if (params.mode == ConditionMode::Basic) {
        ok = basic_buffer_condition(s.free_buffer(), s.avail_comm(), threshold, request.in_front);
      } else {
        const int reserved = s.reserved_buffer - own_share(request, q);
        ok = modified_buffer_condition(role, projected_buffer(s) - reserved, s.avail_comm(),
                                       threshold, request.in_front);
      }
      if (!ok) return blocked(d, BlockReason::BufferThreshold);
    }
  }

  std::map<NodeId, std::pair<int, int>> per_qpu;  // claims, TP-destination claims
  for (const auto& c : request.claims) {
    auto& [count, dest] = per_qpu[c.qpu];
    ++count;
    if (c.role == PairRole::TpDest) ++dest;
  }
  for (const auto& [q, counts] : per_qpu) {
    const QpuState& s = view.qpus[static_cast<std::size_t>(q)];
    if (counts.first > s.free_buffer()) return blocked(d, BlockReason::Storage);
    if (params.reservation && params.mode == ConditionMode::Modified) {
      const int reserved = s.reserved_buffer - own_share(request, q);
      if (projected_buffer(s) - counts.second - reserved < 0)
        return blocked(d, BlockReason::Storage);
    }
  }
  return d;
}

Decision check_basic_conditions(const EprDemand& demand, const ResourceView& view, int threshold,
                                bool in_front) {
  return check_conditions(program_request(demand, in_front), view,
                          {ConditionMode::Basic, threshold, true, true});
}

Decision check_modified_conditions(const EprDemand& demand, const ResourceView& view, int threshold,
                                   bool in_front) {
  return check_conditions(program_request(demand, in_front), view,
                          {ConditionMode::Modified, threshold, true, true});
}

int SplitPlan::m_at(NodeId qpu) const {
  for (const auto& [q, count] : m)
    if (q == qpu) return count;
  return 0;
}

std::vector<std::pair<NodeId, int>> split_requirements(NodeId busy, NodeId proxy, NodeId far,
                                                       int distill_k) {
  // With distillation the busy side also stores the copy being pumped, and the
  // proxy stores the cross half, the held in-rack half and that copy.
  const bool distill = distill_k >= 2;
  return {{busy, distill ? 2 : 1}, {proxy, distill ? 3 : 2}, {far, 1}};
}

std::optional<SplitPlan> check_split_conditions(const EprDemand& demand, NodeId busy,
                                                const ResourceView& view, int distill_k,
                                                bool reservation) {
  const auto& topo = view.topology;
  if (!demand.involves(busy))
    throw InvariantError(fmt::format("QPU {} is not an endpoint of demand {}", busy, demand.id));
  if (same_rack(topo, demand.qpu_a, demand.qpu_b))
    throw InvariantError(fmt::format("demand {} is in-rack and cannot be split", demand.id));
  const NodeId far = busy == demand.qpu_a ? demand.qpu_b : demand.qpu_a;
  const Rack& rack = topo.racks()[static_cast<std::size_t>(topo.rack_of(busy))];

  std::vector<NodeId> candidates;
  for (NodeId q : rack.qpus) {
    if (q == busy) continue;
    if (endpoint_busy(view, q)) continue;
    candidates.push_back(q);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](NodeId x, NodeId y) {
    const int cx = view.qpus[static_cast<std::size_t>(x)].avail_comm();
    const int cy = view.qpus[static_cast<std::size_t>(y)].avail_comm();
    return cx != cy ? cx > cy : x < y;
  });
  for (NodeId proxy : candidates) {
    auto m = split_requirements(busy, proxy, far, distill_k);
    bool ok = true;
    for (const auto& [q, need] : m) {
      const QpuState& s = view.qpus[static_cast<std::size_t>(q)];
      const int reserved = reservation ? s.reserved_buffer : 0;
      // A teleport destination loses the slot it stores into.
      const int dest = (q != proxy && role_at(demand, q) == PairRole::TpDest) ? 1 : 0;
      if (projected_buffer(s) - reserved - dest < need) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    SplitPlan plan;
    plan.original = demand.id;
    plan.busy = busy;
    plan.proxy = proxy;
    plan.far = far;
    plan.distill_copies = std::max(0, distill_k - 1);
    plan.m = std::move(m);
    return plan;
  }
  return std::nullopt;
}

void reserve_split(std::vector<QpuState>& qpus, const SplitPlan& plan) {
  for (const auto& [q, m] : plan.m) qpus[static_cast<std::size_t>(q)].reserved_buffer += m;
}

void release_split(std::vector<QpuState>& qpus, const SplitPlan& plan) {
  for (const auto& [q, m] : plan.m) {
    auto& s = qpus[static_cast<std::size_t>(q)];
    if (s.reserved_buffer < m)
      throw InvariantError(fmt::format("reserved buffer underflow on QPU {} (split of {})", q,
                                       plan.original));
  }
  for (const auto& [q, m] : plan.m) qpus[static_cast<std::size_t>(q)].reserved_buffer -= m;
}

void settle_split_member(std::vector<QpuState>& qpus, const SplitPlan& plan,
                         SplitProgress& progress, bool reservation) {
  if (progress.scheduled >= progress.total) return;
  if (progress.scheduled == 0 && reservation) {
    reserve_split(qpus, plan);
    progress.reserved = true;
  }
  ++progress.scheduled;
  if (progress.scheduled == progress.total && progress.reserved) {
    release_split(qpus, plan);
    progress.reserved = false;
  }
}

}  // namespace qdc
