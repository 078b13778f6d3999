// SPDX-License-Identifier: Apache-2.0
#include "qdc/demand_dag.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

namespace {

void erase_value(std::vector<int>& v, int x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) v.erase(it);
}

void insert_sorted(std::vector<int>& v, int x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

bool DemandDag::contains(int id) const {
  return id >= 0 && static_cast<std::size_t>(id) < nodes_.size() &&
         nodes_[static_cast<std::size_t>(id)].alive;
}

DemandDag::NodeData& DemandDag::slot(int id) {
  if (id < 0) throw InvariantError(fmt::format("negative demand id {}", id));
  if (static_cast<std::size_t>(id) >= nodes_.size()) nodes_.resize(static_cast<std::size_t>(id) + 1);
  return nodes_[static_cast<std::size_t>(id)];
}

const DemandDag::NodeData& DemandDag::live(int id) const {
  if (!contains(id)) throw InvariantError(fmt::format("demand {} is not in the DAG", id));
  return nodes_[static_cast<std::size_t>(id)];
}

const std::vector<int>& DemandDag::predecessors(int id) const { return live(id).preds; }
const std::vector<int>& DemandDag::successors(int id) const { return live(id).succs; }

std::vector<std::pair<int, int>> DemandDag::edges() const {
  std::vector<std::pair<int, int>> out;
  for (std::size_t u = 0; u < nodes_.size(); ++u)
    if (nodes_[u].alive)
      for (int v : nodes_[u].succs) out.emplace_back(static_cast<int>(u), v);
  return out;
}

std::vector<int> DemandDag::nodes() const {
  std::vector<int> out;
  for (std::size_t u = 0; u < nodes_.size(); ++u)
    if (nodes_[u].alive) out.push_back(static_cast<int>(u));
  return out;
}

std::vector<int> DemandDag::front_layer() const { return {front_.begin(), front_.end()}; }

std::vector<int> DemandDag::lookahead_subgraph(int l) const {
  if (l < 1) throw InvariantError(fmt::format("look-ahead depth must be >= 1 (got {})", l));
  std::vector<int> out;
  std::vector<int> current(front_.begin(), front_.end());
  std::unordered_map<int, int> remaining;
  for (int layer = 0; layer < l && !current.empty(); ++layer) {
    out.insert(out.end(), current.begin(), current.end());
    if (layer + 1 == l) break;
    std::vector<int> next;
    for (int u : current) {
      for (int v : nodes_[static_cast<std::size_t>(u)].succs) {
        auto [it, fresh] = remaining.try_emplace(
            v, static_cast<int>(nodes_[static_cast<std::size_t>(v)].preds.size()));
        (void)fresh;
        if (--it->second == 0) next.push_back(v);
      }
    }
    std::sort(next.begin(), next.end());
    current = std::move(next);
  }
  return out;
}

int DemandDag::layer(int id) const {
  live(id);
  std::map<int, int> memo;
  // Ids only grow along edges from program order, but split members break
  // that, so walk predecessors explicitly.
  std::vector<std::pair<int, bool>> stack{{id, false}};
  while (!stack.empty()) {
    auto [u, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(u)) continue;
    const auto& preds = nodes_[static_cast<std::size_t>(u)].preds;
    if (!expanded) {
      stack.emplace_back(u, true);
      for (int p : preds)
        if (!memo.count(p)) stack.emplace_back(p, false);
      continue;
    }
    int depth = 0;
    for (int p : preds) depth = std::max(depth, memo.at(p) + 1);
    memo[u] = depth;
  }
  return memo.at(id);
}

void DemandDag::add_node(int id, const std::vector<int>& preds) {
  if (contains(id)) throw InvariantError(fmt::format("demand {} already in the DAG", id));
  for (int p : preds) live(p);
  NodeData& n = slot(id);
  n = NodeData{};
  n.alive = true;
  ++alive_;
  for (int p : preds) {
    insert_sorted(n.preds, p);
    insert_sorted(nodes_[static_cast<std::size_t>(p)].succs, id);
  }
  if (n.preds.empty()) front_.insert(id);
}

void DemandDag::add_edge(int from, int to) {
  live(from);
  live(to);
  if (from == to) throw InvariantError("self edge");
  insert_sorted(nodes_[static_cast<std::size_t>(from)].succs, to);
  insert_sorted(nodes_[static_cast<std::size_t>(to)].preds, from);
  front_.erase(to);
}

void DemandDag::remove_scheduled(int id) {
  const NodeData& n = live(id);
  if (!n.preds.empty())
    throw InvariantError(fmt::format("demand {} removed with {} unscheduled predecessors", id,
                                     n.preds.size()));
  const std::vector<int> succs = n.succs;
  for (int v : succs) {
    auto& vp = nodes_[static_cast<std::size_t>(v)].preds;
    erase_value(vp, id);
    if (vp.empty()) front_.insert(v);
  }
  nodes_[static_cast<std::size_t>(id)] = NodeData{};
  front_.erase(id);
  --alive_;
}

void DemandDag::erase(int id) {
  const NodeData original = live(id);
  for (int p : original.preds) erase_value(nodes_[static_cast<std::size_t>(p)].succs, id);
  for (int v : original.succs) {
    auto& vp = nodes_[static_cast<std::size_t>(v)].preds;
    erase_value(vp, id);
    if (vp.empty()) front_.insert(v);
  }
  nodes_[static_cast<std::size_t>(id)] = NodeData{};
  front_.erase(id);
  --alive_;
}

void DemandDag::apply_split(int id, const std::vector<int>& members) {
  const NodeData original = live(id);
  if (members.empty()) throw InvariantError("split without members");
  for (int p : original.preds) erase_value(nodes_[static_cast<std::size_t>(p)].succs, id);
  for (int s : original.succs) erase_value(nodes_[static_cast<std::size_t>(s)].preds, id);
  nodes_[static_cast<std::size_t>(id)] = NodeData{};
  front_.erase(id);
  --alive_;
  for (int m : members) {
    add_node(m, original.preds);
    for (int s : original.succs) add_edge(m, s);
  }
}

std::string DemandDag::dump() const {
  std::string out;
  for (const auto& [u, v] : edges()) out += fmt::format("{} {}\n", u, v);
  return out;
}

bool DemandDag::operator==(const DemandDag& other) const {
  if (alive_ != other.alive_ || front_ != other.front_) return false;
  const std::size_t n = std::max(nodes_.size(), other.nodes_.size());
  static const NodeData kEmpty{};
  for (std::size_t i = 0; i < n; ++i) {
    const NodeData& a = i < nodes_.size() ? nodes_[i] : kEmpty;
    const NodeData& b = i < other.nodes_.size() ? other.nodes_[i] : kEmpty;
    if (!(a == b)) return false;
  }
  return true;
}

DemandDag build_dag(const std::vector<EprDemand>& demands) {
  DemandDag dag;
  std::unordered_map<NodeId, int> last_on;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const EprDemand& d = demands[i];
    if (d.id != static_cast<int>(i))
      throw InvariantError(fmt::format("demand at position {} has id {}", i, d.id));
    std::vector<int> preds;
    auto la = last_on.find(d.qpu_a);
    auto lb = last_on.find(d.qpu_b);
    if (la != last_on.end()) preds.push_back(la->second);
    if (lb != last_on.end() && (preds.empty() || preds[0] != lb->second))
      preds.push_back(lb->second);
    if (preds.size() == 2) {
      // Drop the older one if the newer already depends on it.
      const int older = std::min(preds[0], preds[1]);
      const int newer = std::max(preds[0], preds[1]);
      std::vector<int> stack{newer};
      std::vector<bool> seen(i, false);
      bool reachable = false;
      while (!stack.empty() && !reachable) {
        const int u = stack.back();
        stack.pop_back();
        for (int p : dag.predecessors(u)) {
          if (p == older) {
            reachable = true;
            break;
          }
          if (p > older && !seen[static_cast<std::size_t>(p)]) {
            seen[static_cast<std::size_t>(p)] = true;
            stack.push_back(p);
          }
        }
      }
      preds = reachable ? std::vector<int>{newer} : std::vector<int>{older, newer};
    }
    dag.add_node(d.id, preds);
    last_on[d.qpu_a] = d.id;
    last_on[d.qpu_b] = d.id;
  }
  return dag;
}

}  // namespace qdc
