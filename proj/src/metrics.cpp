// SPDX-License-Identifier: Apache-2.0
#include "qdc/metrics.hpp"

#include <map>
#include <unordered_map>

namespace qdc {

namespace {

double infidelity_weight(double f, const FidelityModel& model) {
  return (1.0 - f) / (1.0 - model.f_cross_rack);
}

}  // namespace

double pair_weight(PairClass cls, const FidelityModel& fidelity, int distill_k) {
  switch (cls) {
    case PairClass::Cross: return 1.0;
    case PairClass::InRack: return infidelity_weight(fidelity.f_in_rack, fidelity);
    case PairClass::Distilled:
      return infidelity_weight(fidelity.f_distilled(distill_k), fidelity);
  }
  return 0.0;
}

MetricsReport compute_metrics(const Timeline& timeline, const LatencyModel& latency,
                              const FidelityModel& fidelity) {
  MetricsReport r;
  r.makespan = makespan(timeline);
  r.normalized_latency = r.makespan / latency.t_reconfig;

  std::unordered_map<int, double> generated_at;
  std::map<double, int> distilled_at;  // count per output fidelity
  double wait_sum = 0.0;
  int waited = 0;
  for (const auto& ev : timeline) {
    switch (ev.kind) {
      case EventKind::Reconfig: ++r.reconfigs; break;
      case EventKind::EprGen:
        for (int p : ev.pairs) generated_at[p] = ev.end();
        if (ev.category == PairCategory::Cross) {
          ++r.cross_pairs;
        } else if (ev.category == PairCategory::InRack) {
          ++r.in_rack_pairs;
        } else if (ev.category == PairCategory::DistillInput) {
          ++r.distill_inputs;
        }
        break;
      case EventKind::Distill:
        if (!ev.success) ++r.distill_failures;
        if (ev.success && ev.completes) {
          ++r.distilled_pairs;
          ++distilled_at[ev.fidelity];
        }
        [[fallthrough]];
      case EventKind::Comm:
        if (ev.kind == EventKind::Comm) ++r.communications;
        for (int p : ev.pairs) {
          auto it = generated_at.find(p);
          if (it == generated_at.end()) continue;
          wait_sum += ev.start - it->second;
          ++waited;
        }
        break;
      case EventKind::Swap: ++r.swaps; break;
      case EventKind::BufferRelease: break;
    }
  }
  // Summed per category so equal counts give bit-identical totals.
  r.weighted_epr = r.cross_pairs + r.in_rack_pairs * pair_weight(PairClass::InRack, fidelity);
  for (const auto& [f, n] : distilled_at) r.weighted_epr += n * infidelity_weight(f, fidelity);
  if (waited > 0) r.avg_wait = wait_sum / waited / latency.t_reconfig;
  return r;
}

double improvement_factor(const MetricsReport& baseline, const MetricsReport& ours) {
  if (baseline.normalized_latency <= 0.0 || ours.normalized_latency <= 0.0) return 1.0;
  return baseline.normalized_latency / ours.normalized_latency;
}

double epr_overhead(const MetricsReport& baseline, const MetricsReport& ours) {
  if (baseline.weighted_epr <= 0.0) return 0.0;
  return ours.weighted_epr / baseline.weighted_epr - 1.0;
}

double additional_wait(const MetricsReport& baseline, const MetricsReport& ours) {
  return ours.avg_wait - baseline.avg_wait;
}

}  // namespace qdc
