// SPDX-License-Identifier: Apache-2.0
// Brute-force purification oracle shared by the unit and acceptance tests.
#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "qdc/models.hpp"

namespace qdc::oracle {

// Explicit four-qubit density matrix, qubit order (A1, B1, A2, B2) from the
// most significant bit. Werner states are real, so doubles suffice.
using Rho2 = std::array<std::array<double, 4>, 4>;
using Rho4 = std::array<std::array<double, 16>, 16>;

inline Rho2 werner(double f) {
  // |phi+> = (|00> + |11>)/sqrt2
  const double phi[4] = {M_SQRT1_2, 0, 0, M_SQRT1_2};
  Rho2 r{};
  const double rest = (1.0 - f) / 3.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double proj = phi[i] * phi[j];
      r[i][j] = f * proj + rest * ((i == j ? 1.0 : 0.0) - proj);
    }
  return r;
}

inline double phi_fidelity(const Rho2& r) {
  return 0.5 * (r[0][0] + r[0][3] + r[3][0] + r[3][3]);
}

inline int bit(int index, int qubit) { return (index >> (3 - qubit)) & 1; }

// Bilateral CNOT A1->A2, B1->B2, keep the outcome where A2 and B2 agree.
inline std::pair<Rho2, double> purify(const Rho2& p1, const Rho2& p2) {
  Rho4 rho{};
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      rho[i][j] = p1[i >> 2][j >> 2] * p2[i & 3][j & 3];
  auto cnots = [](int x) {
    int a1 = bit(x, 0), b1 = bit(x, 1), a2 = bit(x, 2), b2 = bit(x, 3);
    a2 ^= a1;
    b2 ^= b1;
    return (a1 << 3) | (b1 << 2) | (a2 << 1) | b2;
  };
  Rho4 out{};
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) out[cnots(i)][cnots(j)] = rho[i][j];
  Rho2 kept{};
  double prob = 0.0;
  for (int m = 0; m < 2; ++m) {  // A2 = B2 = m
    const int low = (m << 1) | m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) kept[i][j] += out[(i << 2) | low][(j << 2) | low];
  }
  for (int i = 0; i < 4; ++i) prob += kept[i][i];
  for (auto& row : kept)
    for (double& x : row) x /= prob;
  return {kept, prob};
}

// Pump k-1 fresh copies, twirling back to Werner form after every round.
inline DistillResult oracle_distill(double f, int k) {
  double fid = f;
  double success = 1.0;
  for (int round = 1; round < k; ++round) {
    const auto [kept, prob] = purify(werner(fid), werner(f));
    fid = phi_fidelity(kept);
    success *= prob;
  }
  return {fid, success};
}


}  // namespace qdc::oracle
