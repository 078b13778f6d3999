// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qdc/workload.hpp"

namespace qdc {

/// Overlap-dependency DAG over demand ids. Nodes are removed as they are
/// scheduled (or consumed); layers are longest-path depths over what is left.
class DemandDag {
 public:
  DemandDag() = default;

  bool contains(int id) const;
  bool empty() const { return alive_ == 0; }
  std::size_t size() const { return alive_; }

  const std::vector<int>& predecessors(int id) const;
  const std::vector<int>& successors(int id) const;
  std::vector<std::pair<int, int>> edges() const;
  std::vector<int> nodes() const;

  /// Sources, ascending id.
  std::vector<int> front_layer() const;
  bool in_front(int id) const { return front_.count(id) > 0; }

  /// Nodes with layer < l, ordered by (layer, id). Touches only that prefix.
  std::vector<int> lookahead_subgraph(int l) const;

  /// Longest-path depth of a live node (full recomputation).
  int layer(int id) const;

  /// Adds a node with the given (live) predecessors.
  void add_node(int id, const std::vector<int>& preds = {});
  void add_edge(int from, int to);

  /// Throws InvariantError when the node is absent or still has predecessors.
  void remove_scheduled(int id);
  /// Drops a node and its edges regardless of predecessors.
  void erase(int id);

  /// Replaces `id` by `members`: every member inherits the predecessors and
  /// every successor of `id` waits for all members.
  void apply_split(int id, const std::vector<int>& members);

  /// "u v" per line, in ascending (u, v).
  std::string dump() const;

  bool operator==(const DemandDag& other) const;

 private:
  struct NodeData {
    bool alive = false;
    std::vector<int> preds;
    std::vector<int> succs;
    bool operator==(const NodeData&) const = default;
  };
  NodeData& slot(int id);
  const NodeData& live(int id) const;

  std::vector<NodeData> nodes_;
  std::set<int> front_;
  std::size_t alive_ = 0;
};

/// Overlap DAG with transitive reduction: each demand depends on the last
/// earlier demand of each of its QPUs, minus any edge implied by the other.
DemandDag build_dag(const std::vector<EprDemand>& demands);

}  // namespace qdc
