// SPDX-License-Identifier: Apache-2.0
#include "qdc/commands.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

fs::path output_dir(const ExperimentConfig& config, const std::string& override_dir) {
  fs::path dir = override_dir.empty() ? fs::path(config.output_dir) : fs::path(override_dir);
  fs::create_directories(dir);
  return dir;
}

void write_trace_file(const fs::path& path, const Timeline& timeline) {
  auto out = open_output(path);
  write_trace(timeline, out);
}

std::string number(double v) { return fmt::format("{:.6f}", v); }

constexpr const char* kRunHeader =
    "config,strategy,status,makespan_ms,normalized_latency,weighted_epr,avg_wait,reconfigs,"
    "cross_pairs,in_rack_pairs,distill_inputs,distilled_pairs,swaps,splits,downgrades\n";

std::string run_columns(const std::string& name, const SimResult& r) {
  const MetricsReport& m = r.metrics;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", name,
                     to_string(r.final_strategy), to_string(r.status), number(r.makespan),
                     number(m.normalized_latency), number(m.weighted_epr), number(m.avg_wait),
                     m.reconfigs, m.cross_pairs, m.in_rack_pairs, m.distill_inputs,
                     m.distilled_pairs, m.swaps, r.splits, r.downgrades);
}

constexpr const char* kCompareColumns =
    "baseline_latency,ours_latency,improvement_factor,baseline_epr,ours_epr,epr_overhead,"
    "baseline_wait,ours_wait,additional_wait,ours_strategy,ours_status,splits,downgrades";

std::string compare_columns(const Comparison& c) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}",
                     number(c.baseline.metrics.normalized_latency),
                     number(c.ours.metrics.normalized_latency), number(c.improvement),
                     number(c.baseline.metrics.weighted_epr), number(c.ours.metrics.weighted_epr),
                     number(c.epr_overhead), number(c.baseline.metrics.avg_wait),
                     number(c.ours.metrics.avg_wait), number(c.additional_wait),
                     to_string(c.ours.final_strategy), to_string(c.ours.status), c.ours.splits,
                     c.ours.downgrades);
}

Comparison compare_on(const ExperimentConfig& config, const NetworkTopology& topology,
                      const std::vector<EprDemand>& demands) {
  SchedulerConfig base = config.scheduler;
  base.strategy = Strategy::BaselineJIT;
  Comparison c;
  c.baseline = simulate(topology, demands, base, config.latency, config.fidelity);
  c.ours = simulate(topology, demands, config.scheduler, config.latency, config.fidelity);
  c.improvement = improvement_factor(c.baseline.metrics, c.ours.metrics);
  c.epr_overhead = epr_overhead(c.baseline.metrics, c.ours.metrics);
  c.additional_wait = additional_wait(c.baseline.metrics, c.ours.metrics);
  return c;
}

}  // namespace

SimResult run_experiment(const ExperimentConfig& config) {
  const NetworkTopology topology = make_topology(config);
  const auto demands = make_workload(config, topology);
  return simulate(topology, demands, config.scheduler, config.latency, config.fidelity);
}

Comparison compare_experiment(const ExperimentConfig& config) {
  const NetworkTopology topology = make_topology(config);
  const auto demands = make_workload(config, topology);
  return compare_on(config, topology, demands);
}

std::vector<SweepRow> sweep_experiment(const ExperimentConfig& config, const std::string& axis,
                                       const std::vector<std::string>& values) {
  std::vector<ExperimentConfig> configs;
  for (const auto& v : values) {
    ExperimentConfig c = config;
    apply_axis(c, axis, v);
    configs.push_back(std::move(c));
  }
  std::vector<std::future<Comparison>> jobs;
  for (const auto& c : configs)
    jobs.push_back(std::async(std::launch::async, [&c] { return compare_experiment(c); }));
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({values[i], jobs[i].get()});
  return rows;
}

bool nonincreasing_then_flat(const std::vector<double>& series, double tolerance) {
  if (series.empty()) return true;
  for (std::size_t i = 1; i < series.size(); ++i)
    if (series[i] > series[i - 1] * (1.0 + tolerance)) return false;
  return series.back() <= series.front();
}

void write_run_csv(std::ostream& out, const std::string& name, const SimResult& result) {
  out << kRunHeader << run_columns(name, result) << '\n';
}

void write_compare_csv(std::ostream& out, const std::string& name, const Comparison& c) {
  out << "config," << kCompareColumns << '\n' << name << ',' << compare_columns(c) << '\n';
}

void write_sweep_csv(std::ostream& out, const std::string& name, const std::string& axis,
                     const std::vector<SweepRow>& rows) {
  out << "config,axis,value," << kCompareColumns << '\n';
  for (const auto& row : rows)
    out << name << ',' << axis << ',' << row.value << ',' << compare_columns(row.comparison)
        << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool dump_dag,
            std::ostream& log) {
  const ExperimentConfig config = load_config(config_path);
  const NetworkTopology topology = make_topology(config);
  const auto demands = make_workload(config, topology);
  const fs::path dir = output_dir(config, out_dir);
  if (dump_dag) {
    auto out = open_output(dir / "dag.txt");
    out << build_dag(demands).dump();
  }
  const SimResult r = simulate(topology, demands, config.scheduler, config.latency, config.fidelity);
  {
    auto out = open_output(dir / "metrics.csv");
    write_run_csv(out, config.name, r);
  }
  write_trace_file(dir / "trace.txt", r.timeline);
  log << fmt::format("{}: {} demands, {} in {:.3f} ms ({:.3f} reconfig units), {} splits, {} downgrades\n",
                     config.name, demands.size(), to_string(r.status), r.makespan,
                     r.metrics.normalized_latency, r.splits, r.downgrades);
  if (r.status != RunStatus::Completed) {
    log << r.stall_dump;
    return 2;
  }
  return 0;
}

int cmd_compare(const std::string& config_path, const std::string& out_dir, std::ostream& log) {
  const ExperimentConfig config = load_config(config_path);
  const Comparison c = compare_experiment(config);
  const fs::path dir = output_dir(config, out_dir);
  {
    auto out = open_output(dir / "metrics.csv");
    write_compare_csv(out, config.name, c);
  }
  write_trace_file(dir / "trace.txt", c.ours.timeline);
  write_trace_file(dir / "trace_baseline.txt", c.baseline.timeline);
  log << fmt::format("{}: baseline {:.3f}, {} {:.3f}, improvement {:.3f}x, EPR overhead {:.2f}%\n",
                     config.name, c.baseline.metrics.normalized_latency,
                     to_string(c.ours.final_strategy), c.ours.metrics.normalized_latency,
                     c.improvement, 100.0 * c.epr_overhead);
  return c.baseline.status == RunStatus::Completed && c.ours.status == RunStatus::Completed ? 0 : 2;
}

int cmd_sweep(const std::string& config_path, const std::string& axis, const std::string& values,
              const std::string& out_dir, std::ostream& log) {
  const ExperimentConfig config = load_config(config_path);
  const auto rows = sweep_experiment(config, axis, parse_sweep_values(values));
  const fs::path dir = output_dir(config, out_dir);
  {
    auto out = open_output(dir / "metrics.csv");
    write_sweep_csv(out, config.name, axis, rows);
  }
  std::vector<double> latency;
  bool ok = true;
  for (const auto& row : rows) {
    latency.push_back(row.comparison.ours.metrics.normalized_latency);
    ok = ok && row.comparison.ours.status == RunStatus::Completed &&
         row.comparison.baseline.status == RunStatus::Completed;
    log << fmt::format("{} = {}: ours {:.3f}, baseline {:.3f}, improvement {:.3f}x\n", axis,
                       row.value, row.comparison.ours.metrics.normalized_latency,
                       row.comparison.baseline.metrics.normalized_latency, row.comparison.improvement);
  }
  log << fmt::format("latency trend over {}: {}\n", axis,
                     nonincreasing_then_flat(latency) ? "nonincreasing then flat" : "not monotone");
  return ok ? 0 : 2;
}

}  // namespace qdc
