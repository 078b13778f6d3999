// SPDX-License-Identifier: Apache-2.0
#include "qdc/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Qpu: return "qpu";
    case NodeKind::Tor: return "tor";
    case NodeKind::Aggregation: return "agg";
    case NodeKind::Core: return "core";
  }
  return "?";
}

std::string_view to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Clos: return "clos";
    case TopologyKind::SpineLeaf: return "spine_leaf";
    case TopologyKind::FatTree: return "fat_tree";
  }
  return "?";
}

TopologyKind parse_topology_kind(std::string_view text) {
  if (text == "clos") return TopologyKind::Clos;
  if (text == "spine_leaf") return TopologyKind::SpineLeaf;
  if (text == "fat_tree") return TopologyKind::FatTree;
  throw ConfigError(fmt::format("unknown topology kind '{}'", text));
}

NodeId NetworkTopology::add_node(NodeKind kind, std::string name) {
  const NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(Node{id, kind, std::move(name)});
  adjacency_.emplace_back();
  rack_index_.push_back(-1);
  bsm_.push_back(0);
  spec_.push_back(QpuSpec{});
  if (kind == NodeKind::Qpu) qpus_.push_back(id);
  return id;
}

void NetworkTopology::check_node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw ConfigError(fmt::format("unknown node id {}", id));
}

int NetworkTopology::add_edge(NodeId a, NodeId b, int weight) {
  check_node(a);
  check_node(b);
  if (a == b) throw ConfigError(fmt::format("self-loop on node {}", a));
  if (weight < 1) throw ConfigError(fmt::format("edge {}-{} has weight {} < 1", a, b, weight));
  if (edge_between(a, b)) throw ConfigError(fmt::format("duplicate edge {}-{}", a, b));
  const int index = static_cast<int>(edges_.size());
  edges_.push_back(Edge{a, b, weight});
  auto insert_sorted = [&](NodeId from, NodeId to) {
    auto& list = adjacency_[static_cast<std::size_t>(from)];
    auto pos = std::lower_bound(list.begin(), list.end(), std::make_pair(to, index));
    list.insert(pos, {to, index});
  };
  insert_sorted(a, b);
  insert_sorted(b, a);
  return index;
}

void NetworkTopology::add_rack(NodeId tor, std::vector<NodeId> qpus) {
  check_node(tor);
  if (nodes_[static_cast<std::size_t>(tor)].kind != NodeKind::Tor)
    throw ConfigError(fmt::format("rack switch {} is not a ToR", tor));
  for (const auto& rack : racks_)
    if (rack.tor == tor) throw ConfigError(fmt::format("ToR {} heads two racks", tor));
  const int index = static_cast<int>(racks_.size());
  for (NodeId q : qpus) {
    check_node(q);
    if (!is_qpu(q)) throw ConfigError(fmt::format("rack member {} is not a QPU", q));
    if (rack_index_[static_cast<std::size_t>(q)] != -1)
      throw ConfigError(fmt::format("QPU {} belongs to two racks", q));
    rack_index_[static_cast<std::size_t>(q)] = index;
  }
  racks_.push_back(Rack{tor, std::move(qpus)});
}

void NetworkTopology::set_bsm_count(NodeId tor, int count) {
  check_node(tor);
  if (count < 0) throw ConfigError(fmt::format("negative BSM count on {}", tor));
  bsm_[static_cast<std::size_t>(tor)] = count;
}

void NetworkTopology::set_qpu_spec(NodeId qpu, const QpuSpec& spec) {
  check_node(qpu);
  if (spec.data_qubits < 0 || spec.buffer_qubits < 0 || spec.comm_qubits < 0)
    throw ConfigError(fmt::format("negative qubit count on QPU {}", qpu));
  spec_[static_cast<std::size_t>(qpu)] = spec;
}

bool NetworkTopology::is_qpu(NodeId id) const {
  return id >= 0 && static_cast<std::size_t>(id) < nodes_.size() &&
         nodes_[static_cast<std::size_t>(id)].kind == NodeKind::Qpu;
}

const Node& NetworkTopology::node(NodeId id) const {
  check_node(id);
  return nodes_[static_cast<std::size_t>(id)];
}

NodeId NetworkTopology::find_node(std::string_view name) const {
  for (const auto& n : nodes_)
    if (n.name == name) return n.id;
  return -1;
}

int NetworkTopology::rack_of(NodeId qpu) const {
  if (!is_qpu(qpu)) throw ConfigError(fmt::format("node {} is not a QPU", qpu));
  return rack_index_[static_cast<std::size_t>(qpu)];
}

NodeId NetworkTopology::tor_of(NodeId qpu) const {
  const int rack = rack_of(qpu);
  if (rack < 0) throw ConfigError(fmt::format("QPU {} has no rack", qpu));
  return racks_[static_cast<std::size_t>(rack)].tor;
}

int NetworkTopology::bsm_count(NodeId tor) const {
  check_node(tor);
  return bsm_[static_cast<std::size_t>(tor)];
}

const QpuSpec& NetworkTopology::qpu_spec(NodeId qpu) const {
  if (!is_qpu(qpu)) throw ConfigError(fmt::format("node {} is not a QPU", qpu));
  return spec_[static_cast<std::size_t>(qpu)];
}

int NetworkTopology::total_data_qubits() const {
  int total = 0;
  for (NodeId q : qpus_) total += spec_[static_cast<std::size_t>(q)].data_qubits;
  return total;
}

const std::vector<std::pair<NodeId, int>>& NetworkTopology::neighbors(NodeId id) const {
  check_node(id);
  return adjacency_[static_cast<std::size_t>(id)];
}

std::optional<int> NetworkTopology::edge_between(NodeId a, NodeId b) const {
  if (a < 0 || static_cast<std::size_t>(a) >= adjacency_.size()) return std::nullopt;
  for (const auto& [n, e] : adjacency_[static_cast<std::size_t>(a)])
    if (n == b) return e;
  return std::nullopt;
}

void NetworkTopology::validate() const {
  if (qpus_.empty()) throw ConfigError("topology has no QPUs");
  if (racks_.empty()) throw ConfigError("topology has no racks");
  for (NodeId q : qpus_) {
    if (rack_index_[static_cast<std::size_t>(q)] < 0)
      throw ConfigError(fmt::format("QPU '{}' belongs to no rack", node(q).name));
    const NodeId tor = tor_of(q);
    if (!edge_between(q, tor))
      throw ConfigError(fmt::format("QPU '{}' is not linked to its ToR", node(q).name));
  }
  for (const auto& e : edges_)
    if (e.weight < 1) throw ConfigError("edge weight below 1");
  // connectivity
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<NodeId> queue{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!queue.empty()) {
    const NodeId cur = queue.front();
    queue.pop_front();
    for (const auto& [n, e] : adjacency_[static_cast<std::size_t>(cur)]) {
      if (!seen[static_cast<std::size_t>(n)]) {
        seen[static_cast<std::size_t>(n)] = true;
        ++count;
        queue.push_back(n);
      }
    }
  }
  if (count != nodes_.size()) throw ConfigError("topology graph is not connected");
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

NetworkTopology build_topology(TopologyKind kind, int num_racks, int qpus_per_rack,
                               const QpuSpec& qpu_spec, int edge_weight, int bsms_per_tor) {
  if (num_racks < 1) throw ConfigError(fmt::format("num_racks must be >= 1 (got {})", num_racks));
  if (qpus_per_rack < 1)
    throw ConfigError(fmt::format("qpus_per_rack must be >= 1 (got {})", qpus_per_rack));
  if (edge_weight < 1)
    throw ConfigError(fmt::format("edge_weight must be >= 1 (got {})", edge_weight));
  if (bsms_per_tor < 0)
    throw ConfigError(fmt::format("bsms_per_tor must be >= 0 (got {})", bsms_per_tor));

  NetworkTopology topo;
  std::vector<std::vector<NodeId>> rack_qpus(static_cast<std::size_t>(num_racks));
  for (int r = 0; r < num_racks; ++r) {
    for (int j = 0; j < qpus_per_rack; ++j) {
      const NodeId q = topo.add_node(NodeKind::Qpu, fmt::format("q{}.{}", r, j));
      topo.set_qpu_spec(q, qpu_spec);
      rack_qpus[static_cast<std::size_t>(r)].push_back(q);
    }
  }
  std::vector<NodeId> tors;
  for (int r = 0; r < num_racks; ++r) {
    const NodeId tor = topo.add_node(NodeKind::Tor, fmt::format("tor{}", r));
    tors.push_back(tor);
    for (NodeId q : rack_qpus[static_cast<std::size_t>(r)]) topo.add_edge(q, tor, edge_weight);
    topo.add_rack(tor, rack_qpus[static_cast<std::size_t>(r)]);
    topo.set_bsm_count(tor, bsms_per_tor);
  }

  if (num_racks > 1) {
    switch (kind) {
      case TopologyKind::Clos: {
        std::vector<NodeId> cores;
        for (int i = 0; i < qpus_per_rack; ++i)
          cores.push_back(topo.add_node(NodeKind::Core, fmt::format("core{}", i)));
        for (NodeId tor : tors)
          for (NodeId c : cores) topo.add_edge(tor, c, edge_weight);
        break;
      }
      case TopologyKind::SpineLeaf: {
        std::vector<NodeId> spines;
        for (int i = 0; i < ceil_div(qpus_per_rack, 2); ++i)
          spines.push_back(topo.add_node(NodeKind::Core, fmt::format("spine{}", i)));
        for (NodeId tor : tors)
          for (NodeId s : spines) topo.add_edge(tor, s, edge_weight);
        break;
      }
      case TopologyKind::FatTree: {
        const int pods = ceil_div(num_racks, 2);
        const int aggs_per_pod = std::max(2, ceil_div(qpus_per_rack, 2));
        std::vector<std::vector<NodeId>> pod_aggs(static_cast<std::size_t>(pods));
        for (int p = 0; p < pods; ++p)
          for (int i = 0; i < aggs_per_pod; ++i)
            pod_aggs[static_cast<std::size_t>(p)].push_back(
                topo.add_node(NodeKind::Aggregation, fmt::format("agg{}.{}", p, i)));
        for (int r = 0; r < num_racks; ++r)
          for (NodeId agg : pod_aggs[static_cast<std::size_t>(r / 2)])
            topo.add_edge(tors[static_cast<std::size_t>(r)], agg, edge_weight);
        // a single pod is already connected through its aggregation layer
        if (pods > 1) {
          std::vector<NodeId> cores;
          for (int i = 0; i < aggs_per_pod * aggs_per_pod; ++i)
            cores.push_back(topo.add_node(NodeKind::Core, fmt::format("core{}", i)));
          for (int p = 0; p < pods; ++p)
            for (int i = 0; i < aggs_per_pod; ++i)
              for (int c = i * aggs_per_pod; c < (i + 1) * aggs_per_pod; ++c)
                topo.add_edge(pod_aggs[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)],
                              cores[static_cast<std::size_t>(c)], edge_weight);
        }
        break;
      }
    }
  }
  topo.validate();
  return topo;
}

bool same_rack(const NetworkTopology& topology, NodeId a, NodeId b) {
  if (!topology.is_qpu(a) || !topology.is_qpu(b))
    throw ConfigError(fmt::format("same_rack({}, {}): both ids must be QPUs", a, b));
  if (a == b) throw ConfigError(fmt::format("same_rack({}, {}): self-pair", a, b));
  return topology.rack_of(a) == topology.rack_of(b);
}

NetworkTopology parse_topology(std::istream& in) {
  NetworkTopology topo;
  std::string line;
  int line_no = 0;
  std::optional<QpuSpec> global_spec;
  auto lookup = [&](const std::string& name) {
    const NodeId id = topo.find_node(name);
    if (id < 0) throw ParseError(fmt::format("unknown node '{}'", name), line_no);
    return id;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string keyword;
    if (!(fields >> keyword)) continue;
    try {
      if (keyword == "node") {
        std::string name, kind;
        if (!(fields >> name >> kind)) throw ParseError("expected 'node <name> <kind>'", line_no);
        if (topo.find_node(name) >= 0)
          throw ParseError(fmt::format("duplicate node '{}'", name), line_no);
        NodeKind k;
        if (kind == "qpu") k = NodeKind::Qpu;
        else if (kind == "tor") k = NodeKind::Tor;
        else if (kind == "agg") k = NodeKind::Aggregation;
        else if (kind == "core") k = NodeKind::Core;
        else throw ParseError(fmt::format("unknown node kind '{}'", kind), line_no);
        topo.add_node(k, name);
      } else if (keyword == "edge") {
        std::string a, b;
        int w = 0;
        if (!(fields >> a >> b >> w)) throw ParseError("expected 'edge <a> <b> <weight>'", line_no);
        topo.add_edge(lookup(a), lookup(b), w);
      } else if (keyword == "rack") {
        std::string tor, q;
        if (!(fields >> tor)) throw ParseError("expected 'rack <tor> <qpu>...'", line_no);
        std::vector<NodeId> members;
        while (fields >> q) members.push_back(lookup(q));
        topo.add_rack(lookup(tor), std::move(members));
      } else if (keyword == "bsm") {
        std::string tor;
        int count = 0;
        if (!(fields >> tor >> count)) throw ParseError("expected 'bsm <tor> <count>'", line_no);
        topo.set_bsm_count(lookup(tor), count);
      } else if (keyword == "spec") {
        QpuSpec spec;
        if (!(fields >> spec.data_qubits >> spec.buffer_qubits >> spec.comm_qubits))
          throw ParseError("expected 'spec <data> <buffer> <comm>'", line_no);
        global_spec = spec;
      } else {
        throw ParseError(fmt::format("unknown record '{}'", keyword), line_no);
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (global_spec)
    for (NodeId q : topo.qpus()) topo.set_qpu_spec(q, *global_spec);
  topo.validate();
  return topo;
}

NetworkTopology parse_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open topology file '{}'", path));
  return parse_topology(in);
}

Occupancy::Occupancy(const NetworkTopology& topology)
    : used_(topology.edges().size(), 0) {
  capacity_.reserve(topology.edges().size());
  for (const auto& e : topology.edges()) capacity_.push_back(e.weight);
}

int Occupancy::free_slots(int edge) const {
  const auto i = static_cast<std::size_t>(edge);
  return capacity_.at(i) - used_.at(i);
}

void Occupancy::occupy(const PathReservation& reservation) {
  if (active_.count(reservation.id))
    throw InvariantError(fmt::format("reservation {} is already active", reservation.id));
  for (int e : reservation.edges)
    if (free_slots(e) <= 0)
      throw InvariantError(fmt::format("edge {} has no free slot for reservation {}", e,
                                       reservation.id));
  for (int e : reservation.edges) ++used_[static_cast<std::size_t>(e)];
  active_.emplace(reservation.id, reservation.edges);
}

void Occupancy::release(const PathReservation& reservation) {
  auto it = active_.find(reservation.id);
  if (it == active_.end())
    throw InvariantError(fmt::format("reservation {} is not active", reservation.id));
  for (int e : it->second) --used_[static_cast<std::size_t>(e)];
  active_.erase(it);
}

std::optional<PathReservation> find_available_path(const NetworkTopology& topology,
                                                   const Occupancy& occupancy, NodeId qpu_a,
                                                   NodeId qpu_b) {
  if (!topology.is_qpu(qpu_a) || !topology.is_qpu(qpu_b) || qpu_a == qpu_b)
    throw InvariantError(fmt::format("path request {}-{} needs two distinct QPUs", qpu_a, qpu_b));
  const NodeId tor_a = topology.tor_of(qpu_a);
  const NodeId tor_b = topology.tor_of(qpu_b);
  auto allowed = [&](NodeId n) {
    if (n == qpu_a || n == qpu_b) return true;
    switch (topology.node(n).kind) {
      case NodeKind::Qpu: return false;
      case NodeKind::Tor: return n == tor_a || n == tor_b;
      default: return true;
    }
  };

  // Distances to qpu_b over the residual graph; then walk greedily from qpu_a
  // taking the smallest neighbor id that steps one hop closer.
  constexpr int kUnreached = -1;
  std::vector<int> dist(topology.node_count(), kUnreached);
  std::deque<NodeId> queue{qpu_b};
  dist[static_cast<std::size_t>(qpu_b)] = 0;
  while (!queue.empty()) {
    const NodeId cur = queue.front();
    queue.pop_front();
    if (cur == qpu_a) break;
    if (cur != qpu_b && topology.is_qpu(cur)) continue;
    for (const auto& [n, e] : topology.neighbors(cur)) {
      if (dist[static_cast<std::size_t>(n)] != kUnreached || !allowed(n)) continue;
      if (occupancy.free_slots(e) <= 0) continue;
      dist[static_cast<std::size_t>(n)] = dist[static_cast<std::size_t>(cur)] + 1;
      queue.push_back(n);
    }
  }
  if (dist[static_cast<std::size_t>(qpu_a)] == kUnreached) return std::nullopt;

  PathReservation path;
  path.nodes.push_back(qpu_a);
  NodeId cur = qpu_a;
  while (cur != qpu_b) {
    const int want = dist[static_cast<std::size_t>(cur)] - 1;
    bool stepped = false;
    for (const auto& [n, e] : topology.neighbors(cur)) {
      if (dist[static_cast<std::size_t>(n)] != want || occupancy.free_slots(e) <= 0) continue;
      if (!allowed(n)) continue;
      path.nodes.push_back(n);
      path.edges.push_back(e);
      cur = n;
      stepped = true;
      break;
    }
    if (!stepped) throw InvariantError("path reconstruction lost its way");
  }
  return path;
}

}  // namespace qdc
