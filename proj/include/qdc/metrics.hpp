// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "qdc/models.hpp"
#include "qdc/timeline.hpp"

namespace qdc {

enum class PairClass { Cross, InRack, Distilled };

/// Infidelity relative to a cross-rack pair: (1 - F) / (1 - f_cross).
/// `distill_k` only matters for Distilled.
double pair_weight(PairClass cls, const FidelityModel& fidelity, int distill_k = 2);

struct MetricsReport {
  double makespan = 0.0;
  double normalized_latency = 0.0;
  double weighted_epr = 0.0;
  double avg_wait = 0.0;  // in units of t_reconfig
  int reconfigs = 0;
  int cross_pairs = 0;
  int in_rack_pairs = 0;
  int distill_inputs = 0;   // in-rack pairs generated for a distillation, held one included
  int distilled_pairs = 0;  // outputs of finished distillations
  int distill_failures = 0;
  int swaps = 0;
  int communications = 0;
};

/// Distilled outputs are weighted by the fidelity the distillation reached;
/// copies sacrificed along the way are counted in `distill_inputs` only.
MetricsReport compute_metrics(const Timeline& timeline, const LatencyModel& latency,
                              const FidelityModel& fidelity);

/// baseline / ours on normalized latency; 1.0 when either is zero.
double improvement_factor(const MetricsReport& baseline, const MetricsReport& ours);
/// Relative extra weighted EPR count of ours over the baseline.
double epr_overhead(const MetricsReport& baseline, const MetricsReport& ours);
/// ours.avg_wait - baseline.avg_wait.
double additional_wait(const MetricsReport& baseline, const MetricsReport& ours);

}  // namespace qdc
