// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdc/commands.hpp"
#include "qdc/errors.hpp"

using namespace qdc;

namespace {

const std::string kDir = QDC_CONFIG_DIR;

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, kDir);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
[topology]
racks = 2
qpus_per_rack = 2
[workload]
benchmark = qft
qubits = 8
)";

}  // namespace

TEST_CASE("durations") {
  CHECK(parse_duration_ms("12.5ms") == 12.5);
  CHECK(parse_duration_ms("10 us") == doctest::Approx(0.01));
  CHECK(parse_duration_ms("0.002 s") == doctest::Approx(2.0));
  CHECK(parse_duration_ms("3") == 3.0);
  CHECK_THROWS_AS(parse_duration_ms("fast"), ConfigError);
  CHECK_THROWS_AS(parse_duration_ms("3 h"), ConfigError);
}

TEST_CASE("defaults and overrides") {
  const auto c = parse(kMinimal);
  CHECK(c.topology.kind == TopologyKind::Clos);
  CHECK(c.scheduler.lookahead == 10);
  CHECK(c.scheduler.distill_k == 2);
  CHECK(c.latency.t_cross_rack == 10.0);
  CHECK(c.workload.benchmark == BenchmarkKind::Qft);

  const auto tuned = parse(std::string(kMinimal) +
                           "[scheduler]\nstrategy = baseline_jit\nlookahead = 3\n"
                           "[model]\nt_reconfig = 2000 us\nmode = stochastic\nseed = 9\n");
  CHECK(tuned.scheduler.strategy == Strategy::BaselineJIT);
  CHECK(tuned.scheduler.lookahead == 3);
  CHECK(tuned.latency.t_reconfig == doctest::Approx(2.0));
  CHECK(tuned.latency.stochastic);
  CHECK(tuned.latency.seed == 9);
}

TEST_CASE("errors name the field at fault") {
  CHECK(error_of("[workload]\nbenchmark = shor\nqubits = 4\n").find("[workload] benchmark") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[scheduler]\nlookahead = ten\n")
            .find("[scheduler] lookahead") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[scheduler]\nlookahead = 0\n")
            .find("lookahead") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[model]\nt_in_rack = -1\n").find("[model]") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "[output]\ncolour = blue\n").find("colour") !=
        std::string::npos);
  CHECK(error_of("[nonsense]\nx = 1\n").find("nonsense") != std::string::npos);
  CHECK(error_of("[workload]\nqubits = 4\n").find("benchmark") != std::string::npos);
}

TEST_CASE("malformed text is a parse error") {
  std::istringstream in("[topology\nracks = 2\n");
  CHECK_THROWS_AS(parse_config(in), ParseError);
}

TEST_CASE("config files load with relative demand files") {
  const auto c = load_config(kDir + "/fig6_motivating.ini");
  CHECK(c.name == "fig6_motivating");
  const auto topo = make_topology(c);
  CHECK(make_workload(c, topo).size() == 5);
  CHECK_THROWS_AS(load_config(kDir + "/missing.ini"), ConfigError);
}

TEST_CASE("seed override from the environment") {
  ::setenv("QDCSIM_SEED", "77", 1);
  const auto c = load_config(kDir + "/fig6_motivating.ini");
  ::unsetenv("QDCSIM_SEED");
  CHECK(c.latency.seed == 77);
}

TEST_CASE("sweep values and axes") {
  CHECK(parse_sweep_values("1..4") == std::vector<std::string>{"1", "2", "3", "4"});
  CHECK(parse_sweep_values("2, 6,10") == std::vector<std::string>{"2", "6", "10"});
  CHECK(parse_sweep_values("7") == std::vector<std::string>{"7"});
  CHECK_THROWS_AS(parse_sweep_values("3..1"), ConfigError);
  CHECK_THROWS_AS(parse_sweep_values("1,,2"), ConfigError);

  auto c = parse(kMinimal);
  apply_axis(c, "lookahead", "4");
  CHECK(c.scheduler.lookahead == 4);
  apply_axis(c, "cross_latency", "20ms");
  CHECK(c.latency.t_cross_rack == 20.0);
  apply_axis(c, "buffer_size", "6");
  CHECK(c.topology.qpu.buffer_qubits == 6);
  CHECK_THROWS_AS(apply_axis(c, "nonsense", "1"), ConfigError);
  CHECK_THROWS_AS(apply_axis(c, "lookahead", "x"), ConfigError);
  CHECK_THROWS_AS(apply_axis(c, "lookahead", "0"), ConfigError);
  c.topology.file = "some.topo";
  CHECK_THROWS_AS(apply_axis(c, "buffer_size", "4"), ConfigError);
}

TEST_CASE("trend check") {
  CHECK(nonincreasing_then_flat({10, 8, 8, 8}));
  CHECK(nonincreasing_then_flat({10, 10.05, 9}));
  CHECK_FALSE(nonincreasing_then_flat({10, 10.2, 9}));
  CHECK_FALSE(nonincreasing_then_flat({10, 10.05, 10.1}));
  CHECK(nonincreasing_then_flat({}));
}

TEST_CASE("compare on the motivating example") {
  const auto c = load_config(kDir + "/fig6_motivating.ini");
  const auto cmp = compare_experiment(c);
  CHECK(cmp.improvement == doctest::Approx(25.3 / 12.4).epsilon(1e-12));
  CHECK(cmp.baseline.final_strategy == Strategy::BaselineJIT);

  // a one-value sweep is the comparison itself
  const auto rows = sweep_experiment(c, "lookahead", {"10"});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].comparison.ours.timeline == cmp.ours.timeline);
  CHECK(rows[0].comparison.baseline.timeline == cmp.baseline.timeline);
}

TEST_CASE("empty workload compares as 1.0") {
  const auto dir = std::filesystem::temp_directory_path() / "qdc_empty_workload";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "none.demands") << "# nothing\n";
  std::istringstream in("[topology]\nracks = 1\nqpus_per_rack = 2\n[workload]\ndemand_file = none.demands\n");
  const auto c = parse_config(in, dir.string());
  CHECK(compare_experiment(c).improvement == 1.0);
}

TEST_CASE("run command writes identical files on rerun") {
  const auto dir = std::filesystem::temp_directory_path() / "qdc_run_cmd";
  std::filesystem::remove_all(dir);
  std::ostringstream log;
  REQUIRE(cmd_run(kDir + "/fig6_motivating.ini", (dir / "a").string(), true, log) == 0);
  REQUIRE(cmd_run(kDir + "/fig6_motivating.ini", (dir / "b").string(), true, log) == 0);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  for (const char* f : {"metrics.csv", "trace.txt", "dag.txt"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const auto csv = slurp(dir / "a" / "metrics.csv");
  CHECK(csv.find(",12.400000,") != std::string::npos);
}
