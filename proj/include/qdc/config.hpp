// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdc/models.hpp"
#include "qdc/sim_state.hpp"
#include "qdc/topology.hpp"
#include "qdc/workload.hpp"

namespace qdc {

struct TopologySettings {
  TopologyKind kind = TopologyKind::Clos;
  int racks = 2;
  int qpus_per_rack = 2;
  QpuSpec qpu;
  int edge_weight = 1;
  int bsms_per_tor = -1;  // < 0: two per QPU in the rack
  std::string file;       // structured topology file, overrides the generator
};

struct WorkloadSettings {
  std::optional<BenchmarkKind> benchmark;
  int qubits = 0;
  int iterations = 1;
  std::string demand_file;
};

/// One experiment: sectioned `key = value` text with `[topology]`,
/// `[workload]`, `[scheduler]`, `[model]` and `[output]`. Durations take an
/// optional unit (`ms`, `us`, `s`); bare numbers are milliseconds.
struct ExperimentConfig {
  std::string name = "experiment";
  TopologySettings topology;
  WorkloadSettings workload;
  SchedulerConfig scheduler;
  LatencyModel latency;
  FidelityModel fidelity;
  std::string output_dir = "out";
};

/// Relative file paths resolve against `base_dir`. Throws ConfigError naming
/// the section and key at fault.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
/// Also applies the QDCSIM_SEED environment override.
ExperimentConfig load_config(const std::string& path);

/// Parses `12.5ms`, `10 us`, `0.002 s` or `3` into milliseconds.
double parse_duration_ms(const std::string& text);

NetworkTopology make_topology(const ExperimentConfig& config);
std::vector<EprDemand> make_workload(const ExperimentConfig& config, const NetworkTopology& topology);

const std::vector<std::string>& sweep_axes();
/// `a,b,c` or an inclusive integer range `lo..hi`.
std::vector<std::string> parse_sweep_values(const std::string& text);
/// Throws ConfigError for an unknown axis, a bad value, or an axis the config
/// does not use (e.g. buffer_size with a topology file).
void apply_axis(ExperimentConfig& config, const std::string& axis, const std::string& value);

}  // namespace qdc
