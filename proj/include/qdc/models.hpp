// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace qdc {

/// Generation and switching latencies, all in milliseconds.
struct LatencyModel {
  double t_in_rack = 0.1;
  double t_reconfig = 1.0;
  double t_cross_rack = 10.0;

  // Stochastic mode: each attempt of period tau0 succeeds with tau0 / t_mean.
  bool stochastic = false;
  double tau0 = 0.001;
  std::uint64_t seed = 1;

  /// Throws ConfigError on non-positive durations or an attempt period longer
  /// than a mean generation time.
  void validate() const;
};

struct FidelityModel {
  double f_in_rack = 0.95;
  double f_cross_rack = 0.85;

  void validate() const;
  /// Fidelity of an in-rack pair after pumping with k - 1 fresh copies.
  double f_distilled(int k) const;
};

/// Mean time of a heralded generation: tau0 / (2 alpha eta).
double epr_mean_latency(double alpha, double eta, double tau0);

struct DistillResult {
  double fidelity = 1.0;
  double success_probability = 1.0;
};

/// One purification round on two Werner pairs of fidelities f1 and f2.
DistillResult werner_round(double f1, double f2);

/// Pumping k - 1 fresh copies of fidelity f into a held pair (k = 1 means no
/// distillation). Success probability is the product over rounds.
DistillResult distill_werner(double f, int k);

/// Fidelity after swapping two Werner pairs.
double swap_fidelity(double f1, double f2);

}  // namespace qdc
