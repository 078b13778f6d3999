// SPDX-License-Identifier: Apache-2.0
// qdcsim: run, compare and sweep EPR scheduling experiments.
#include <iostream>

#include <CLI11.hpp>

#include "qdc/commands.hpp"
#include "qdc/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for EPR-pair scheduling in quantum data centers"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  bool dump_dag = false;
  auto* run = app.add_subcommand("run", "Simulate one configuration");
  run->add_option("--config", config, "Experiment config file")->required();
  run->add_option("--out", out, "Output directory (default: the config's [output] dir)");
  run->add_flag("--dump-dag", dump_dag, "Also write the dependency DAG as an edge list");

  auto* compare = app.add_subcommand("compare", "Baseline against the configured strategy");
  compare->add_option("--config", config, "Experiment config file")->required();
  compare->add_option("--out", out, "Output directory");

  std::string axis;
  std::string values;
  auto* sweep = app.add_subcommand("sweep", "Compare over a range of one parameter");
  sweep->add_option("--config", config, "Experiment config file")->required();
  sweep->add_option("--axis", axis, "Parameter to vary")
      ->required()
      ->check(CLI::IsMember(qdc::sweep_axes()));
  sweep->add_option("--values", values, "Comma list or inclusive range lo..hi")->required();
  sweep->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return qdc::cmd_run(config, out, dump_dag, std::cout);
    if (compare->parsed()) return qdc::cmd_compare(config, out, std::cout);
    return qdc::cmd_sweep(config, axis, values, out, std::cout);
  } catch (const qdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const qdc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const qdc::SimulationError& e) {
    std::cerr << "simulation failed: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}
