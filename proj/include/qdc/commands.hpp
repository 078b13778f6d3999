// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qdc/config.hpp"
#include "qdc/engine.hpp"

namespace qdc {

SimResult run_experiment(const ExperimentConfig& config);

struct Comparison {
  SimResult baseline;
  SimResult ours;
  double improvement = 1.0;
  double epr_overhead = 0.0;
  double additional_wait = 0.0;
};

/// Baseline and the configured strategy on one shared demand list.
Comparison compare_experiment(const ExperimentConfig& config);

struct SweepRow {
  std::string value;
  Comparison comparison;
};

/// One comparison per value, run concurrently; rows keep the input order.
std::vector<SweepRow> sweep_experiment(const ExperimentConfig& config, const std::string& axis,
                                       const std::vector<std::string>& values);

/// Each step at most `tolerance` above the previous, and the last no higher
/// than the first.
bool nonincreasing_then_flat(const std::vector<double>& series, double tolerance = 0.01);

void write_run_csv(std::ostream& out, const std::string& name, const SimResult& result);
void write_compare_csv(std::ostream& out, const std::string& name, const Comparison& c);
void write_sweep_csv(std::ostream& out, const std::string& name, const std::string& axis,
                     const std::vector<SweepRow>& rows);

/// The `qdcsim` commands; they write into `out_dir` (the config's output
/// directory when empty) and return a process exit status.
int cmd_run(const std::string& config_path, const std::string& out_dir, bool dump_dag,
            std::ostream& log);
int cmd_compare(const std::string& config_path, const std::string& out_dir, std::ostream& log);
int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& out_dir, std::ostream& log);

}  // namespace qdc
