// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qdc/metrics.hpp"

using namespace qdc;

namespace {

SimEvent ev(EventKind kind, double start, double duration, std::vector<int> pairs = {},
            PairCategory category = PairCategory::None) {
  SimEvent e;
  e.kind = kind;
  e.start = start;
  e.duration = duration;
  e.pairs = std::move(pairs);
  e.category = category;
  return e;
}

}  // namespace

TEST_CASE("pair weights relative to a cross-rack pair") {
  const FidelityModel f;
  CHECK(pair_weight(PairClass::Cross, f) == 1.0);
  // (1 - 0.95) / (1 - 0.85) and (1 - 0.965) / (1 - 0.85), worked by hand
  CHECK(std::abs(pair_weight(PairClass::InRack, f) - 0.333) <= 0.005);
  CHECK(std::abs(pair_weight(PairClass::Distilled, f) - 0.233) <= 0.005);
  CHECK(pair_weight(PairClass::Distilled, f, 3) < pair_weight(PairClass::Distilled, f, 2));
}

TEST_CASE("metrics from a hand-built timeline") {
  const LatencyModel lat;  // t_reconfig 1 ms
  const FidelityModel fid;
  Timeline tl;
  tl.push_back(ev(EventKind::Reconfig, 0.0, 1.0));
  tl.push_back(ev(EventKind::EprGen, 1.0, 10.0, {0}, PairCategory::Cross));     // ends 11
  tl.push_back(ev(EventKind::Reconfig, 0.0, 1.0));
  tl.push_back(ev(EventKind::EprGen, 1.0, 0.1, {1}, PairCategory::InRack));     // ends 1.1
  tl.push_back(ev(EventKind::EprGen, 1.1, 0.1, {2}, PairCategory::InRack));     // ends 1.2
  tl.push_back(ev(EventKind::Comm, 11.0, 0.0, {0}));                            // waits 0
  tl.push_back(ev(EventKind::Comm, 2.1, 0.0, {1}));                             // waits 1.0
  tl.push_back(ev(EventKind::Comm, 3.2, 0.0, {2}));                             // waits 2.0

  const auto m = compute_metrics(tl, lat, fid);
  CHECK(m.makespan == 11.0);
  CHECK(m.normalized_latency == 11.0);
  CHECK(m.reconfigs == 2);
  CHECK(m.cross_pairs == 1);
  CHECK(m.in_rack_pairs == 2);
  CHECK(m.communications == 3);
  CHECK(m.weighted_epr == doctest::Approx(1.0 + 2.0 * 0.05 / 0.15));
  CHECK(m.avg_wait == doctest::Approx(1.0));

  LatencyModel slow = lat;
  slow.t_reconfig = 2.0;
  const auto half = compute_metrics(tl, slow, fid);
  CHECK(half.normalized_latency == 5.5);
  CHECK(half.avg_wait == doctest::Approx(0.5));
}

TEST_CASE("distillation outputs count once at their reached fidelity") {
  const FidelityModel fid;
  Timeline tl;
  tl.push_back(ev(EventKind::EprGen, 0.0, 0.1, {5}, PairCategory::DistillInput));
  tl.push_back(ev(EventKind::EprGen, 0.1, 0.1, {6}, PairCategory::DistillInput));
  SimEvent d = ev(EventKind::Distill, 0.2, 0.0, {6});
  d.fidelity = 0.965;
  d.completes = true;
  tl.push_back(d);
  SimEvent failed = ev(EventKind::Distill, 0.3, 0.0, {7});
  failed.success = false;
  tl.push_back(failed);

  const auto m = compute_metrics(tl, LatencyModel{}, fid);
  CHECK(m.distill_inputs == 2);
  CHECK(m.distilled_pairs == 1);
  CHECK(m.distill_failures == 1);
  CHECK(m.weighted_epr == doctest::Approx(0.035 / 0.15));
}

TEST_CASE("comparison helpers") {
  MetricsReport base, ours;
  base.normalized_latency = ours.normalized_latency = 7.0;
  CHECK(improvement_factor(base, ours) == 1.0);
  base.normalized_latency = 25.3;
  ours.normalized_latency = 12.4;
  CHECK(improvement_factor(base, ours) == doctest::Approx(2.04).epsilon(0.001));
  base.normalized_latency = 23.3;
  CHECK(improvement_factor(base, ours) == doctest::Approx(1.88).epsilon(0.001));
  CHECK(improvement_factor(MetricsReport{}, MetricsReport{}) == 1.0);

  base.weighted_epr = 4.0;
  ours.weighted_epr = 5.0;
  CHECK(epr_overhead(base, ours) == doctest::Approx(0.25));
  CHECK(epr_overhead(MetricsReport{}, ours) == 0.0);

  base.avg_wait = 0.5;
  ours.avg_wait = 1.25;
  CHECK(additional_wait(base, ours) == doctest::Approx(0.75));
}

TEST_CASE("trace text") {
  Timeline tl;
  SimEvent e = ev(EventKind::EprGen, 1.0, 0.1, {3}, PairCategory::InRack);
  e.demands = {3};
  e.qpus = {2, 3};
  e.path = {2, 5, 3};
  tl.push_back(e);
  tl.push_back(ev(EventKind::Swap, 11.0, 0.0));
  tl[1].id = 1;
  std::ostringstream out;
  write_trace(tl, out);
  CHECK(out.str() == "0 epr_gen 1.000000 0.100000 3 2,3 2,5,3\n1 swap 11.000000 0.000000 - - -\n");
  CHECK(makespan(tl) == doctest::Approx(11.0));
  CHECK(makespan({}) == 0.0);
}
