// SPDX-License-Identifier: Apache-2.0
// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <future>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "density_oracle.hpp"
#include "qdc/commands.hpp"
#include "qdc/errors.hpp"
#include "trace_checker.hpp"

using namespace qdc;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kExactMs = 1e-9;           // deterministic makespans
constexpr double kRateRel = 1e-12;          // closed-form latency, relative
constexpr double kOracleRel = 1e-12;        // recurrence vs density matrix
constexpr double kWeightTol = 0.005;        // metric weights
constexpr int kFuzzInstances = 1000;
constexpr double kFuzzBudgetS = 300.0;
constexpr double kMotivatingBudgetS = 1.0;
constexpr double kTrendStep = 0.01;         // lookahead sweep, per step
constexpr double kMaxOverhead = 0.30;

const std::string kConfigs = QDC_CONFIG_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

ExperimentConfig config_named(const std::string& file) { return load_config(kConfigs + "/" + file); }

SimResult run_config(const ExperimentConfig& c) {
  const auto topo = make_topology(c);
  return simulate(topo, make_workload(c, topo), c.scheduler, c.latency, c.fidelity);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------- 1
Outcome motivating_example() {
  const auto t0 = Clock::now();
  auto c = config_named("fig6_motivating.ini");
  const auto flexible = run_config(c);
  c.scheduler.split_enabled = false;
  const auto collect = run_config(c);
  c.scheduler.strategy = Strategy::BaselineJIT;
  const auto baseline = run_config(c);
  const double elapsed = seconds_since(t0);

  // in-rack segment: first in-rack reconfiguration to the last in-rack generation
  double seg_start = 1e300, seg_end = 0.0;
  std::vector<int> channels;
  for (const auto& e : collect.timeline)
    if (e.kind == EventKind::EprGen && e.category == PairCategory::InRack) {
      channels.push_back(e.channel);
      seg_end = std::max(seg_end, e.end());
    }
  for (const auto& e : collect.timeline)
    if (e.kind == EventKind::Reconfig &&
        std::find(channels.begin(), channels.end(), e.channel) != channels.end())
      seg_start = std::min(seg_start, e.start);
  const double segment = seg_end - seg_start;

  Outcome o;
  o.pass = near(baseline.makespan, 25.3, kExactMs) && near(collect.makespan, 23.3, kExactMs) &&
           near(segment, 1.3, kExactMs) && near(flexible.makespan, 12.4, kExactMs) &&
           elapsed < kMotivatingBudgetS;
  o.detail = fmt::format("baseline {:.6f} ms, collection-only {:.6f} ms (in-rack {:.6f} ms), "
                         "flexible {:.6f} ms, {:.3f} s",
                         baseline.makespan, collect.makespan, segment, flexible.makespan, elapsed);
  return o;
}

// ---------------------------------------------------------------- 2
Outcome rate_formula() {
  const double tau0 = 0.001;  // 1 us in ms
  const double in_rack = epr_mean_latency(0.05, 0.1, tau0);
  const double lossy = epr_mean_latency(0.05, 0.001, tau0);
  Outcome o;
  o.pass = std::abs(in_rack / 0.1 - 1.0) <= kRateRel && std::abs(lossy / 10.0 - 1.0) <= kRateRel;
  o.detail = fmt::format("in-rack {:.15g} ms, 100x loss {:.15g} ms", in_rack, lossy);
  return o;
}

// ---------------------------------------------------------------- 3
Outcome distillation() {
  const auto two = distill_werner(0.95, 2);
  bool ok = two.fidelity >= 0.9645 && two.fidelity <= 0.9655 && two.success_probability >= 0.935 &&
            two.success_probability <= 0.937;
  double worst = 0.0;
  for (int k : {2, 3, 4}) {
    const auto got = distill_werner(0.95, k);
    const auto want = oracle::oracle_distill(0.95, k);
    worst = std::max({worst, std::abs(got.fidelity / want.fidelity - 1.0),
                      std::abs(got.success_probability / want.success_probability - 1.0)});
  }
  ok = ok && worst <= kOracleRel;
  return {ok, fmt::format("F = {:.5f}, p = {:.5f}; worst relative gap to the density-matrix oracle "
                          "over k = 2..4: {:.2e}",
                          two.fidelity, two.success_probability, worst)};
}

// ---------------------------------------------------------------- 4
Outcome metric_weights() {
  const FidelityModel f;
  const double cross = pair_weight(PairClass::Cross, f);
  const double in_rack = pair_weight(PairClass::InRack, f);
  const double distilled = pair_weight(PairClass::Distilled, f);
  return {near(cross, 1.0, 1e-12) && near(in_rack, 0.333, kWeightTol) &&
              near(distilled, 0.233, kWeightTol),
          fmt::format("cross {:.3f}, in-rack {:.3f}, distilled {:.3f}", cross, in_rack, distilled)};
}

// ---------------------------------------------------------------- 5
Outcome deadlock_and_congestion() {
  auto b = config_named("fig7b_deadlock.ini");
  const auto with_reservation = run_config(b);
  b.scheduler.reservation = false;
  b.scheduler.auto_retry = false;
  const auto topo = make_topology(b);
  Engine e(topo, make_workload(b, topo), b.scheduler, b.latency, b.fidelity);
  const auto without = e.run();
  const bool stalled = without.status == RunStatus::Stalled && detect_stall(e.state());

  const auto c = run_config(config_named("fig7c_congestion.ini"));
  Outcome o;
  o.pass = stalled && with_reservation.status == RunStatus::Completed &&
           c.status == RunStatus::Completed && c.downgrades == 1;
  o.detail = fmt::format("double split: stall without reservation {}, {} with it; "
                         "teleport congestion: {} downgrade(s), {}",
                         stalled ? "yes" : "no", to_string(with_reservation.status), c.downgrades,
                         to_string(c.status));
  return o;
}

// ---------------------------------------------------------------- 6
struct FuzzCase {
  NetworkTopology topo;
  std::vector<EprDemand> demands;
  SchedulerConfig config;
  LatencyModel latency;
};

std::optional<FuzzCase> make_case(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const TopologyKind kinds[] = {TopologyKind::Clos, TopologyKind::SpineLeaf, TopologyKind::FatTree};
  const int racks = pick(1, 4);
  const int per_rack = pick(racks == 1 ? 2 : 1, 4);
  const QpuSpec spec{4, pick(1, 6), pick(1, 3)};
  FuzzCase fc{build_topology(kinds[pick(0, 2)], racks, per_rack, spec, pick(1, 2),
                             pick(1, 2 * per_rack)),
              {}, {}, {}};
  const auto& qpus = fc.topo.qpus();
  // teleports move buffer capacity; keep every destination above zero
  std::map<NodeId, int> capacity;
  for (NodeId q : qpus) capacity[q] = spec.buffer_qubits;
  const int n = pick(0, 40);
  for (int i = 0; i < n; ++i) {
    const NodeId a = qpus[static_cast<std::size_t>(pick(0, static_cast<int>(qpus.size()) - 1))];
    NodeId b = a;
    while (b == a) b = qpus[static_cast<std::size_t>(pick(0, static_cast<int>(qpus.size()) - 1))];
    if (chance(0.3) && capacity[b] > 1) {
      ++capacity[a];
      --capacity[b];
      fc.demands.push_back(make_tp(i, a, b));
    } else {
      fc.demands.push_back(make_cat(i, a, b));
    }
  }
  const Strategy strategies[] = {Strategy::Flexible, Strategy::Flexible, Strategy::Flexible,
                                 Strategy::MediumConservative, Strategy::BaselineJIT,
                                 Strategy::MostConservative};
  auto& s = fc.config;
  s.strategy = strategies[pick(0, 5)];
  s.lookahead = pick(1, 10);
  s.threshold = chance(0.5) ? 0 : pick(1, 4);
  s.distill_k = pick(1, 3);
  s.split_enabled = chance(0.8);
  s.reservation = chance(0.7);
  s.auto_retry = true;
  if (chance(0.2)) {
    fc.latency.stochastic = true;
    fc.latency.tau0 = 0.01;
    fc.latency.t_cross_rack = 2.0;
    fc.latency.seed = rng();
  }
  return fc;
}

struct FuzzTally {
  int runs = 0;
  int skipped = 0;  // inputs the engine rejects up front
  int compared = 0;
  int flagged = 0;  // flexible slower than the baseline
  double worst_ratio = 1.0;
  std::vector<std::string> violations;
};

void fuzz_one(std::uint64_t seed, FuzzTally& tally) {
  std::mt19937_64 rng(seed);
  std::optional<FuzzCase> fc;
  try {
    fc = make_case(rng);
  } catch (const ConfigError&) {
    ++tally.skipped;
    return;
  }
  const FidelityModel fid;
  auto report = [&](const std::string& what) {
    tally.violations.push_back(fmt::format("seed {}: {}", seed, what));
  };
  auto run = [&](const SchedulerConfig& sc) -> std::optional<SimResult> {
    try {
      return simulate(fc->topo, fc->demands, sc, fc->latency, fid);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      report(fmt::format("{} did not terminate cleanly: {}", to_string(sc.strategy), e.what()));
      return std::nullopt;
    }
  };
  auto audit = [&](const SimResult& r, const char* label) {
    if (r.status != RunStatus::Completed) report(fmt::format("{} run stalled", label));
    const auto rep = check::check_trace(fc->topo, fc->demands, r.timeline,
                                        r.status == RunStatus::Completed);
    for (const auto& v : rep.violations) report(fmt::format("{}: {}", label, v));
  };

  std::optional<SimResult> first;
  try {
    first = run(fc->config);
  } catch (const ConfigError&) {
    ++tally.skipped;
    return;
  }
  ++tally.runs;
  if (!first) return;
  audit(*first, "configured");
  const auto again = run(fc->config);
  if (again && !(again->timeline == first->timeline)) report("two runs gave different traces");

  SchedulerConfig most = fc->config;
  most.strategy = Strategy::MostConservative;
  if (const auto m = run(most)) {
    audit(*m, "most-conservative");
    if (m->stalls != 0) report("most-conservative run stalled");
  }

  if (fc->config.strategy == Strategy::Flexible && !fc->latency.stochastic) {
    SchedulerConfig base = fc->config;
    base.strategy = Strategy::BaselineJIT;
    if (const auto b = run(base)) {
      audit(*b, "baseline");
      if (first->status == RunStatus::Completed && b->status == RunStatus::Completed) {
        ++tally.compared;
        if (first->makespan > b->makespan + kExactMs) {
          ++tally.flagged;
          tally.worst_ratio = std::max(tally.worst_ratio, first->makespan / b->makespan);
        }
      }
    }
  }
}

Outcome fuzz_suite() {
  const auto t0 = Clock::now();
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<FuzzTally> tallies(workers);
  std::vector<std::future<void>> jobs;
  // Worker w takes seeds w, w + workers, ... until the shared quota is met.
  std::atomic<int> done{0};
  std::atomic<std::uint64_t> next_seed{1};
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      while (done.load() < kFuzzInstances) {
        const std::uint64_t seed = next_seed.fetch_add(1);
        const int before = tallies[w].runs;
        fuzz_one(seed, tallies[w]);
        if (tallies[w].runs > before) done.fetch_add(1);
      }
    }));
  for (auto& j : jobs) j.get();
  FuzzTally total;
  for (const auto& t : tallies) {
    total.runs += t.runs;
    total.skipped += t.skipped;
    total.compared += t.compared;
    total.flagged += t.flagged;
    total.worst_ratio = std::max(total.worst_ratio, t.worst_ratio);
    total.violations.insert(total.violations.end(), t.violations.begin(), t.violations.end());
  }
  const double elapsed = seconds_since(t0);
  for (std::size_t i = 0; i < total.violations.size() && i < 10; ++i)
    std::fprintf(stderr, "  fuzz: %s\n", total.violations[i].c_str());
  Outcome o;
  o.pass = total.runs >= kFuzzInstances && total.violations.empty() && elapsed < kFuzzBudgetS;
  o.detail = fmt::format("{} instances ({} rejected as unservable), {} violations, flexible slower "
                         "than the baseline in {} of {} (flagged, worst {:.2f}x), {:.1f} s",
                         total.runs, total.skipped, total.violations.size(), total.flagged,
                         total.compared, total.worst_ratio, elapsed);
  return o;
}

// ---------------------------------------------------------------- 7
Outcome desk_scale() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"desk_qft.ini", "desk_grover.ini", "desk_rca.ini"}) {
    const auto c = config_named(name);
    const auto topo = make_topology(c);
    const bool remote = !make_workload(c, topo).empty();
    const auto cmp = compare_experiment(c);
    const bool gain = !remote || cmp.improvement > 1.0;
    const bool overhead = cmp.epr_overhead >= 0.0 && cmp.epr_overhead < kMaxOverhead;

    std::vector<double> lat;
    for (const auto& row : sweep_experiment(c, "lookahead", parse_sweep_values("1..10")))
      lat.push_back(row.comparison.ours.metrics.normalized_latency);
    bool trend = !lat.empty() && lat.back() <= lat.front();
    for (std::size_t i = 1; i < lat.size(); ++i) trend = trend && lat[i] <= lat[i - 1] * (1.0 + kTrendStep);

    ok = ok && gain && overhead && trend && cmp.ours.status == RunStatus::Completed;
    detail += fmt::format("{}{}: {:.3f}x, overhead {:.2f}%, l=1..10 {:.1f}->{:.1f}{}",
                          detail.empty() ? "" : "; ", c.name, cmp.improvement,
                          100.0 * cmp.epr_overhead, lat.front(), lat.back(),
                          trend ? "" : " (not monotone)");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 8
Outcome batch_law() {
  struct Setting {
    double t_in_rack, t_reconfig;
    int racks, per_rack, rack;
  };
  const Setting settings[] = {{0.1, 1.0, 2, 2, 1}, {0.037, 0.5, 3, 3, 0}, {0.25, 2.3, 1, 4, 0}};
  int checked = 0;
  double worst = 0.0;
  bool ok = true;
  for (const auto& st : settings) {
    const auto topo = build_topology(TopologyKind::Clos, st.racks, st.per_rack, QpuSpec{8, 10, 2}, 1,
                                     2 * st.per_rack);
    const auto& rack = topo.racks()[static_cast<std::size_t>(st.rack)].qpus;
    for (int b = 1; b <= 8; ++b) {
      std::vector<EprDemand> ds;
      for (int i = 0; i < b; ++i) ds.push_back(make_cat(i, rack[0], rack[1]));
      LatencyModel lat;
      lat.t_in_rack = st.t_in_rack;
      lat.t_reconfig = st.t_reconfig;
      SchedulerConfig sc;
      sc.distill_k = 1;
      const auto r = simulate(topo, ds, sc, lat, FidelityModel{});
      int reconfigs = 0;
      double open = 0.0, close = 0.0;
      for (const auto& e : r.timeline) {
        if (e.kind == EventKind::Reconfig) {
          ++reconfigs;
          open = e.start;
        }
        if (e.kind == EventKind::EprGen) close = std::max(close, e.end());
      }
      const double want = st.t_reconfig + b * st.t_in_rack;
      worst = std::max(worst, std::abs((close - open) - want));
      ok = ok && reconfigs == 1 && std::abs((close - open) - want) <= kExactMs &&
           r.status == RunStatus::Completed;
      ++checked;
    }
  }
  return {ok, fmt::format("{} batches over b = 1..8, one reconfiguration each, worst gap {:.1e} ms",
                          checked, worst)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "motivating example", motivating_example},
      {2, "generation rate formula", rate_formula},
      {3, "distillation", distillation},
      {4, "metric weights", metric_weights},
      {5, "deadlock reservation and congestion downgrade", deadlock_and_congestion},
      {6, "invariant fuzz", fuzz_suite},
      {7, "desk-scale direction", desk_scale},
      {8, "in-rack batch law", batch_law},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("threw: {}", e.what())};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
