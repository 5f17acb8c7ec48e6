// Copyright 2026 The lotto Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Common-lottery transform, participation decomposition and the
// elementary allocation operations (upgrade, equalize).
//
// IC expressions here are always the scaled form
//   sum_{k>i} (k-i) (a(k,i) - a(k,j)),
// i.e. the utility difference multiplied by N-1.

#include <cstddef>
#include <string>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/rational.hpp"

namespace lotto {

struct TransformResult {
  CommonLottery lottery;
  bool overflow = false;  // sum c > 1: not a valid lottery
};

/// c_k = sum_{j<=k} a(k,j) f_j / F_k. Position masses are preserved
/// exactly; the sum is guaranteed <= 1 only when 1/F is convex.
inline TransformResult ToCommonLottery(const Instance& inst, const DirectMechanism& mech) {
  const FeasibilityReport report = GetFeasibilityReport(inst, mech);
  if (!report.is_feasible) throw Error(ErrorCode::kInfeasibleInput, "mechanism is not feasible");
  TransformResult out;
  out.lottery.c.resize(inst.n());
  for (std::size_t k = 0; k < inst.n(); ++k) {
    Rational mass = 0;
    for (std::size_t j = 0; j <= k; ++j) mass += mech(k, j) * inst.f()[j];
    out.lottery.c[k] = mass / inst.cdf()[k];
  }
  out.overflow = out.lottery.Total() > 1;
  return out;
}

struct Multipliers {
  RationalVector local_up;  // index i: lambda_{i,i+1}
  RationalMatrix down;      // (i,j), j < i: lambda_{i,j}

  /// Multiplier of the scaled IC_{i,j}; zero for pairs outside the support.
  Rational At(std::size_t i, std::size_t j) const {
    if (j == i + 1) return local_up[i];
    if (j < i) return down(i, j);
    return 0;
  }
};

inline Multipliers GetMultipliers(const Instance& inst) {
  const std::size_t n = inst.n();
  Multipliers m{RationalVector(n - 1), RationalMatrix(n, n)};
  for (std::size_t i = 0; i + 1 < n; ++i) m.local_up[i] = inst.f()[i + 1] / inst.cdf()[i + 1];
  // Row N-1 has no successor; its downward constraints are redundant.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Rational second = InverseCdfSecondDifference(inst, i);
    for (std::size_t j = 0; j < i; ++j) m.down(i, j) = inst.f()[j] * second;
  }
  return m;
}

struct DecompositionReport {
  Rational common_term;
  Rational info_term;
  Rational p_theta0;
  Rational residual;
};

/// P(theta_0) = sum_k sum_{i<=k} a(k,i) f_i / F_k + sum lambda * IC.
/// The identity holds for every matrix supported on k >= i.
inline DecompositionReport VerifyDecomposition(const Instance& inst, const DirectMechanism& mech) {
  detail::CheckSize(inst, mech);
  const std::size_t n = inst.n();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = k + 1; i < n; ++i) {
      if (mech(k, i) != 0) {
        throw Error(ErrorCode::kSupportViolation,
                    "cell (" + std::to_string(k) + "," + std::to_string(i) + ") below the outside option");
      }
    }
  }
  const Multipliers lambda = GetMultipliers(inst);
  DecompositionReport report;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) report.common_term += mech(k, i) * inst.f()[i] / inst.cdf()[k];
    report.p_theta0 += mech(k, 0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Rational w = lambda.At(i, j);
      if (w != 0) report.info_term += w * detail::ScaledIcExpression(mech, i, j);
    }
  }
  report.residual = report.p_theta0 - report.common_term - report.info_term;
  return report;
}

struct MuReport {
  RationalMatrix mu;           // coefficient of a(k,i) in sum lambda * IC
  RationalMatrix closed_form;  // -f_i/F_k, plus 1 when i = 0
  bool matches = true;
};

/// Expands the weighted IC sum cell by cell and compares against the
/// closed forms.
inline MuReport MuCoefficients(const Instance& inst) {
  const std::size_t n = inst.n();
  const Multipliers lambda = GetMultipliers(inst);
  MuReport out{RationalMatrix(n, n), RationalMatrix(n, n), true};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Rational w = lambda.At(i, j);
      if (w == 0) continue;
      for (std::size_t k = i + 1; k < n; ++k) {
        const Rational term = w * static_cast<long>(k - i);
        out.mu(k, i) += term;
        out.mu(k, j) -= term;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) {
      out.closed_form(k, i) = -inst.f()[i] / inst.cdf()[k];
      if (i == 0) out.closed_form(k, i) += 1;
      if (out.mu(k, i) != out.closed_form(k, i)) out.matches = false;
    }
  }
  return out;
}

/// Replaces row k on types <= k by its f-weighted mean. Position mass of
/// row k is unchanged.
inline DirectMechanism EqualizePosition(const Instance& inst, const DirectMechanism& mech,
                                        std::size_t k) {
  detail::CheckSize(inst, mech);
  if (k >= inst.n()) throw Error(ErrorCode::kIndexOutOfRange, "position " + std::to_string(k));
  Rational mass = 0;
  for (std::size_t j = 0; j <= k; ++j) mass += mech(k, j) * inst.f()[j];
  const Rational mean = mass / inst.cdf()[k];
  DirectMechanism out = mech;
  for (std::size_t j = 0; j <= k; ++j) out(k, j) = mean;
  return out;
}

/// Moves `mass` of type i's probability from position from_k to to_k.
inline DirectMechanism AllocationUpgrade(const Instance& inst, const DirectMechanism& mech,
                                         std::size_t i, std::size_t from_k, std::size_t to_k,
                                         const Rational& mass) {
  detail::CheckSize(inst, mech);
  if (to_k >= inst.n() || !(to_k > from_k && from_k >= i)) {
    throw Error(ErrorCode::kBadIndices, "need i <= from_k < to_k < N");
  }
  if (mass < 0) throw Error(ErrorCode::kBadIndices, "negative upgrade mass");
  if (mass > mech(from_k, i)) {
    throw Error(ErrorCode::kInsufficientMass,
                "cell holds " + ToString(mech(from_k, i)) + ", asked " + ToString(mass));
  }
  DirectMechanism out = mech;
  out(from_k, i) -= mass;
  out(to_k, i) += mass;
  return out;
}

/// Fills the highest partly vacant position by upgrading odds from lower
/// positions, then moves down one position. Types are taken in ascending
/// order and, within a type, donor positions in ascending order.
inline DirectMechanism MaximalUpgrade(const Instance& inst, const DirectMechanism& mech) {
  if (!IsFeasible(inst, mech)) throw Error(ErrorCode::kInfeasibleInput, "mechanism is not feasible");
  const std::size_t n = inst.n();
  DirectMechanism out = mech;
  PositionMasses s = GetPositionMasses(inst, out);
  for (std::size_t target = n; target-- > 0;) {
    Rational deficit = inst.g()[target] - s.s[target];
    for (std::size_t i = 0; i < target && deficit > 0; ++i) {
      const Rational unit = inst.d() * inst.f()[i];
      for (std::size_t k = i; k < target && deficit > 0; ++k) {
        if (out(k, i) == 0) continue;
        const Rational move = Min(out(k, i), deficit / unit);
        out(k, i) -= move;
        out(target, i) += move;
        s.s[k] -= move * unit;
        s.s[target] += move * unit;
        deficit -= move * unit;
      }
    }
    // Every lower odd is spent; nothing further down can be upgraded.
    if (deficit > 0) break;
  }
  return out;
}

}  // namespace lotto
