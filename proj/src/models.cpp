// SPDX-License-Identifier: Apache-2.0
#include "qdc/models.hpp"

#include <fmt/format.h>

#include "qdc/errors.hpp"

namespace qdc {

void LatencyModel::validate() const {
  if (!(t_in_rack > 0) || !(t_reconfig > 0) || !(t_cross_rack > 0))
    throw ConfigError(fmt::format("latencies must be positive (in_rack={}, reconfig={}, cross={})",
                                  t_in_rack, t_reconfig, t_cross_rack));
  if (stochastic) {
    if (!(tau0 > 0)) throw ConfigError("tau0 must be positive");
    if (tau0 > t_in_rack || tau0 > t_cross_rack)
      throw ConfigError(fmt::format("tau0 = {} ms exceeds a mean generation latency", tau0));
  }
}

void FidelityModel::validate() const {
  auto ok = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!ok(f_in_rack) || !ok(f_cross_rack))
    throw ConfigError(fmt::format("fidelities must lie in (0, 1] (in_rack={}, cross={})", f_in_rack,
                                  f_cross_rack));
}

double FidelityModel::f_distilled(int k) const { return distill_werner(f_in_rack, k).fidelity; }

double epr_mean_latency(double alpha, double eta, double tau0) {
  const double p = 2.0 * alpha * eta;
  if (!(p > 0.0) || p > 1.0)
    throw ConfigError(fmt::format("success probability 2*alpha*eta = {} outside (0, 1]", p));
  if (!(tau0 > 0.0)) throw ConfigError("tau0 must be positive");
  return tau0 / p;
}

// Bilateral-CNOT purification of Werner states; the non-singlet weight is
// spread evenly over the three other Bell states.
DistillResult werner_round(double f1, double f2) {
  const double e1 = (1.0 - f1) / 3.0;
  const double e2 = (1.0 - f2) / 3.0;
  const double p = f1 * f2 + f1 * e2 + e1 * f2 + 5.0 * e1 * e2;
  const double f = (f1 * f2 + e1 * e2) / p;
  return {f, p};
}

DistillResult distill_werner(double f, int k) {
  if (k < 1) throw ConfigError(fmt::format("distillation copies must be >= 1 (got {})", k));
  if (!(f > 0.5) || f > 1.0)
    throw ConfigError(fmt::format("distillation needs fidelity in (0.5, 1] (got {})", f));
  DistillResult out{f, 1.0};
  for (int round = 1; round < k; ++round) {
    const auto step = werner_round(out.fidelity, f);
    out.fidelity = step.fidelity;
    out.success_probability *= step.success_probability;
  }
  return out;
}

double swap_fidelity(double f1, double f2) { return f1 * f2 + (1.0 - f1) * (1.0 - f2) / 3.0; }

}  // namespace qdc
