// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qdc {

using NodeId = int;

enum class NodeKind { Qpu, Tor, Aggregation, Core };
enum class TopologyKind { Clos, SpineLeaf, FatTree };

std::string_view to_string(NodeKind kind);
std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology_kind(std::string_view text);

struct QpuSpec {
  int data_qubits = 30;
  int buffer_qubits = 10;
  int comm_qubits = 2;

  bool operator==(const QpuSpec&) const = default;
};

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::Qpu;
  std::string name;
};

/// A multiplexed optical link. `weight` is the number of channels it carries.
struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  int weight = 1;
};

struct Rack {
  NodeId tor = 0;
  std::vector<NodeId> qpus;
};

/// Racks of QPUs behind ToR switches, joined by an upper switch fabric.
/// Immutable once `validate()` has passed; occupancy lives in `Occupancy`.
class NetworkTopology {
 public:
  NodeId add_node(NodeKind kind, std::string name);
  int add_edge(NodeId a, NodeId b, int weight);
  void add_rack(NodeId tor, std::vector<NodeId> qpus);
  void set_bsm_count(NodeId tor, int count);
  void set_qpu_spec(NodeId qpu, const QpuSpec& spec);

  /// Throws ConfigError when a structural invariant does not hold.
  void validate() const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Rack>& racks() const { return racks_; }
  std::size_t node_count() const { return nodes_.size(); }

  /// QPU node ids in ascending order.
  const std::vector<NodeId>& qpus() const { return qpus_; }

  bool is_qpu(NodeId id) const;
  const Node& node(NodeId id) const;
  NodeId find_node(std::string_view name) const;  // -1 when absent
  int rack_of(NodeId qpu) const;
  NodeId tor_of(NodeId qpu) const;
  int bsm_count(NodeId tor) const;
  const QpuSpec& qpu_spec(NodeId qpu) const;
  int total_data_qubits() const;

  /// (neighbor, edge index) pairs sorted by neighbor id.
  const std::vector<std::pair<NodeId, int>>& neighbors(NodeId id) const;
  std::optional<int> edge_between(NodeId a, NodeId b) const;

 private:
  void check_node(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<Rack> racks_;
  std::vector<NodeId> qpus_;
  std::vector<std::vector<std::pair<NodeId, int>>> adjacency_;
  std::vector<int> rack_index_;  // per node, -1 for switches
  std::vector<int> bsm_;         // per node
  std::vector<QpuSpec> spec_;    // per node
};

/// Builds one of the standard data-center layouts.
///
/// Node ids are assigned QPUs first (rack-major), then ToRs, then the upper
/// tiers, so the output is a pure function of the parameters.
///  - clos: one core switch per QPU slot in a rack; every ToR links every core.
///  - spine_leaf: ceil(qpus_per_rack / 2) spines; every leaf links every spine.
///  - fat_tree: ceil(num_racks / 2) pods of two ToRs, `a` aggregation switches
///    per pod with a = max(2, ceil(qpus_per_rack / 2)), and a*a cores; the
///    i-th aggregation switch of each pod links cores [i*a, (i+1)*a).
NetworkTopology build_topology(TopologyKind kind, int num_racks, int qpus_per_rack,
                               const QpuSpec& qpu_spec, int edge_weight, int bsms_per_tor);

bool same_rack(const NetworkTopology& topology, NodeId a, NodeId b);

/// Structured topology text:
///   node <name> qpu|tor|agg|core
///   edge <name> <name> <weight>
///   rack <tor-name> <qpu-name>...
///   bsm <tor-name> <count>
///   spec <data> <buffer> <comm>          (applies to every QPU)
/// Lines starting with '#' are comments.
NetworkTopology parse_topology(std::istream& in);
NetworkTopology parse_topology_file(const std::string& path);

/// Channel claimed by one generation (or one in-rack batch).
struct PathReservation {
  int id = -1;
  std::vector<NodeId> nodes;
  std::vector<int> edges;
  bool requires_reconfig = true;

  bool operator==(const PathReservation&) const = default;
};

/// Per-edge slot counters for active reservations.
class Occupancy {
 public:
  Occupancy() = default;
  explicit Occupancy(const NetworkTopology& topology);

  int used(int edge) const { return used_.at(static_cast<std::size_t>(edge)); }
  int free_slots(int edge) const;
  bool is_active(int reservation_id) const { return active_.count(reservation_id) > 0; }
  std::size_t active_count() const { return active_.size(); }

  /// Throws InvariantError if an edge is full or the id is already active.
  void occupy(const PathReservation& reservation);
  /// Throws InvariantError if the reservation is not active.
  void release(const PathReservation& reservation);

  bool operator==(const Occupancy&) const = default;

 private:
  std::vector<int> used_;
  std::vector<int> capacity_;
  std::map<int, std::vector<int>> active_;
};

/// Fewest-hop path whose every edge has a free slot, ties broken by the
/// lexicographically smallest node sequence. Only the two endpoint ToRs may
/// appear on the path, and QPUs only as endpoints.
std::optional<PathReservation> find_available_path(const NetworkTopology& topology,
                                                   const Occupancy& occupancy, NodeId qpu_a,
                                                   NodeId qpu_b);

}  // namespace qdc
