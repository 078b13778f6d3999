// SPDX-License-Identifier: Apache-2.0
#include "qdc/workload.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::Cat ? "CAT" : "TP";
}

std::string_view to_string(OriginKind origin) {
  switch (origin) {
    case OriginKind::Program: return "program";
    case OriginKind::PostSplitCross: return "split_cross";
    case OriginKind::PostSplitInRack: return "split_in_rack";
    case OriginKind::DistillCopy: return "distill_copy";
  }
  return "?";
}

EprDemand make_cat(int id, NodeId a, NodeId b) {
  EprDemand d;
  d.id = id;
  d.qpu_a = a;
  d.qpu_b = b;
  return d;
}

EprDemand make_tp(int id, NodeId source, NodeId dest) {
  EprDemand d;
  d.id = id;
  d.qpu_a = std::min(source, dest);
  d.qpu_b = std::max(source, dest);
  d.protocol = Protocol::Tp;
  d.tp_source = source;
  d.tp_dest = dest;
  return d;
}

Placement place_qubits(int n_qubits, const NetworkTopology& topology) {
  if (n_qubits < 0) throw ConfigError("qubit count must be nonnegative");
  const int capacity = topology.total_data_qubits();
  if (n_qubits > capacity)
    throw ConfigError(
        fmt::format("{} program qubits exceed the {} data qubits available", n_qubits, capacity));
  Placement placement;
  // QPU ids are handed out rack-major by the generators, so id order is
  // also rack order.
  for (NodeId q : topology.qpus()) {
    const int slots = topology.qpu_spec(q).data_qubits;
    for (int s = 0; s < slots && static_cast<int>(placement.size()) < n_qubits; ++s)
      placement.slots.emplace_back(q, s);
  }
  return placement;
}

BenchmarkKind parse_benchmark_kind(std::string_view text) {
  if (text == "mct") return BenchmarkKind::Mct;
  if (text == "qft") return BenchmarkKind::Qft;
  if (text == "grover") return BenchmarkKind::Grover;
  if (text == "rca") return BenchmarkKind::Rca;
  throw ConfigError(fmt::format("unknown benchmark '{}'", text));
}

std::string_view to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::Mct: return "mct";
    case BenchmarkKind::Qft: return "qft";
    case BenchmarkKind::Grover: return "grover";
    case BenchmarkKind::Rca: return "rca";
  }
  return "?";
}

namespace {

void cx(std::vector<Gate>& out, int control, int target) { out.push_back({control, target, true}); }

// Standard 6-CNOT Toffoli with controls a, b and target c.
void toffoli(std::vector<Gate>& out, int a, int b, int c) {
  cx(out, b, c);
  cx(out, a, c);
  cx(out, b, c);
  cx(out, a, c);
  cx(out, a, b);
  cx(out, a, b);
}

void mct_ladder(std::vector<Gate>& out, int n) {
  if (n == 2) {
    cx(out, 0, 1);
    return;
  }
  for (int i = 0; i + 2 < n; ++i) toffoli(out, i, i + 1, i + 2);
}

void maj(std::vector<Gate>& out, int x, int y, int z) {
  cx(out, z, y);
  cx(out, z, x);
  toffoli(out, x, y, z);
}

void uma(std::vector<Gate>& out, int x, int y, int z) {
  toffoli(out, x, y, z);
  cx(out, z, x);
  cx(out, x, y);
}

}  // namespace

std::vector<Gate> benchmark_gates(BenchmarkKind kind, int n_qubits, int iterations) {
  if (n_qubits < 2) throw ConfigError(fmt::format("benchmarks need >= 2 qubits (got {})", n_qubits));
  if (iterations < 1)
    throw ConfigError(fmt::format("iterations must be >= 1 (got {})", iterations));
  std::vector<Gate> gates;
  switch (kind) {
    case BenchmarkKind::Mct:
      mct_ladder(gates, n_qubits);
      break;
    case BenchmarkKind::Qft:
      for (int i = 0; i < n_qubits; ++i)
        for (int j = i + 1; j < n_qubits; ++j) gates.push_back({i, j, true});
      for (int i = 0; i < n_qubits / 2; ++i) gates.push_back({i, n_qubits - 1 - i, false});
      break;
    case BenchmarkKind::Grover:
      for (int it = 0; it < iterations; ++it) {
        mct_ladder(gates, n_qubits);  // oracle
        mct_ladder(gates, n_qubits);  // diffusion
      }
      break;
    case BenchmarkKind::Rca: {
      std::vector<int> starts;
      for (int i = 0; i + 2 < n_qubits; i += 2) starts.push_back(i);
      if (starts.empty()) {
        for (int it = 0; it < iterations; ++it) cx(gates, 0, 1);
        break;
      }
      for (int it = 0; it < iterations; ++it) {
        for (int i : starts) maj(gates, i, i + 1, i + 2);
        for (auto r = starts.rbegin(); r != starts.rend(); ++r) uma(gates, *r, *r + 1, *r + 2);
      }
      break;
    }
  }
  return gates;
}

std::vector<EprDemand> demands_from_gates(const std::vector<Gate>& gates,
                                          const Placement& placement) {
  std::vector<EprDemand> out;
  const Gate* open_run = nullptr;  // last gate of the current Cat run
  for (const Gate& g : gates) {
    const NodeId qa = placement.qpu_of(g.a);
    const NodeId qb = placement.qpu_of(g.b);
    if (qa == qb) {
      open_run = nullptr;
      continue;
    }
    const int next = static_cast<int>(out.size());
    if (g.controlled) {
      if (open_run && open_run->a == g.a && open_run->b == g.b) continue;
      out.push_back(make_cat(next, qa, qb));
      open_run = &g;
    } else {
      const NodeId low = std::min(qa, qb);
      const NodeId high = std::max(qa, qb);
      out.push_back(make_tp(next, low, high));
      out.push_back(make_tp(next + 1, high, low));
      open_run = nullptr;
    }
  }
  return out;
}

std::vector<EprDemand> generate_benchmark(BenchmarkKind kind, int n_qubits, int iterations,
                                          const Placement& placement) {
  if (static_cast<int>(placement.size()) < n_qubits)
    throw ConfigError(fmt::format("placement covers {} qubits, benchmark needs {}",
                                  placement.size(), n_qubits));
  return demands_from_gates(benchmark_gates(kind, n_qubits, iterations), placement);
}

std::vector<EprDemand> parse_demands(std::istream& in) {
  std::vector<EprDemand> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long id = 0;
    if (!(fields >> id)) {
      std::string rest;
      std::istringstream probe(line);
      if (probe >> rest) throw ParseError("expected a numeric demand id", line_no);
      continue;
    }
    NodeId a = 0, b = 0;
    std::string proto;
    if (!(fields >> a >> b >> proto)) throw ParseError("expected 'id a b CAT|TP ...'", line_no);
    if (a == b) throw ParseError(fmt::format("demand pairs QPU {} with itself", a), line_no);
    if (a < 0 || b < 0) throw ParseError("negative QPU id", line_no);
    const int next = static_cast<int>(out.size());
    if (proto == "CAT") {
      out.push_back(make_cat(next, a, b));
    } else if (proto == "TP") {
      NodeId src = 0, dst = 0;
      if (!(fields >> src >> dst)) throw ParseError("TP record needs 'src dst'", line_no);
      if (!((src == a && dst == b) || (src == b && dst == a)))
        throw ParseError("TP endpoints must match the pair", line_no);
      EprDemand d = make_tp(next, src, dst);
      d.qpu_a = a;
      d.qpu_b = b;
      out.push_back(d);
    } else {
      throw ParseError(fmt::format("unknown protocol '{}'", proto), line_no);
    }
    std::string extra;
    if (fields >> extra) throw ParseError(fmt::format("trailing field '{}'", extra), line_no);
  }
  return out;
}

std::vector<EprDemand> parse_demand_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open demand file '{}'", path));
  return parse_demands(in);
}

void write_demands(const std::vector<EprDemand>& demands, std::ostream& out) {
  for (const auto& d : demands) {
    if (d.protocol == Protocol::Cat)
      out << fmt::format("{} {} {} CAT\n", d.id, d.qpu_a, d.qpu_b);
    else
      out << fmt::format("{} {} {} TP {} {}\n", d.id, d.qpu_a, d.qpu_b, d.tp_source, d.tp_dest);
  }
}

void write_demand_file(const std::vector<EprDemand>& demands, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write demand file '{}'", path));
  write_demands(demands, out);
}

void validate_demands(const std::vector<EprDemand>& demands, const NetworkTopology& topology) {
  for (const auto& d : demands) {
    if (!topology.is_qpu(d.qpu_a) || !topology.is_qpu(d.qpu_b))
      throw ConfigError(fmt::format("demand {} references a node that is not a QPU", d.id));
    if (d.qpu_a == d.qpu_b) throw ConfigError(fmt::format("demand {} is a self-pair", d.id));
    if (d.protocol == Protocol::Tp &&
        !((d.tp_source == d.qpu_a && d.tp_dest == d.qpu_b) ||
          (d.tp_source == d.qpu_b && d.tp_dest == d.qpu_a)))
      throw ConfigError(fmt::format("demand {} has inconsistent TP endpoints", d.id));
  }
}

}  // namespace qdc
