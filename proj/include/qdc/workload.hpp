// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qdc/topology.hpp"

namespace qdc {

enum class Protocol { Cat, Tp };
enum class OriginKind { Program, PostSplitCross, PostSplitInRack, DistillCopy };

std::string_view to_string(Protocol protocol);
std::string_view to_string(OriginKind origin);

/// One required EPR pair. For TP demands {tp_source, tp_dest} = {qpu_a, qpu_b}.
struct EprDemand {
  int id = 0;
  NodeId qpu_a = 0;
  NodeId qpu_b = 0;
  Protocol protocol = Protocol::Cat;
  NodeId tp_source = -1;
  NodeId tp_dest = -1;
  OriginKind origin = OriginKind::Program;
  int parent = -1;

  bool involves(NodeId qpu) const { return qpu == qpu_a || qpu == qpu_b; }
  bool overlaps(const EprDemand& other) const {
    return involves(other.qpu_a) || involves(other.qpu_b);
  }
  bool operator==(const EprDemand&) const = default;
};

EprDemand make_cat(int id, NodeId a, NodeId b);
EprDemand make_tp(int id, NodeId source, NodeId dest);

/// Program qubit index -> (QPU, local slot).
struct Placement {
  std::vector<std::pair<NodeId, int>> slots;

  NodeId qpu_of(int qubit) const { return slots.at(static_cast<std::size_t>(qubit)).first; }
  std::size_t size() const { return slots.size(); }
};

/// Block placement: fill QPUs in id order (rack by rack).
Placement place_qubits(int n_qubits, const NetworkTopology& topology);

enum class BenchmarkKind { Mct, Qft, Grover, Rca };
BenchmarkKind parse_benchmark_kind(std::string_view text);
std::string_view to_string(BenchmarkKind kind);

/// A two-qubit gate. Controlled gates (CX, CP) run over Cat; SWAP does not.
struct Gate {
  int a = 0;
  int b = 0;
  bool controlled = true;

  bool operator==(const Gate&) const = default;
};

std::vector<Gate> benchmark_gates(BenchmarkKind kind, int n_qubits, int iterations);

/// Merge rule: a run of consecutive controlled gates on the same ordered qubit
/// pair, remote under the placement, becomes one Cat demand; a remote SWAP
/// becomes a TP go/return pair sent from the lower QPU id.
std::vector<EprDemand> demands_from_gates(const std::vector<Gate>& gates, const Placement& placement);

std::vector<EprDemand> generate_benchmark(BenchmarkKind kind, int n_qubits, int iterations,
                                          const Placement& placement);

/// Line records `id a b CAT` or `id a b TP src dst`; ids are reassigned by
/// file order. Throws ParseError with the offending line.
std::vector<EprDemand> parse_demands(std::istream& in);
std::vector<EprDemand> parse_demand_file(const std::string& path);
void write_demands(const std::vector<EprDemand>& demands, std::ostream& out);
void write_demand_file(const std::vector<EprDemand>& demands, const std::string& path);

/// Throws ConfigError when a demand references a non-QPU node.
void validate_demands(const std::vector<EprDemand>& demands, const NetworkTopology& topology);

}  // namespace qdc
