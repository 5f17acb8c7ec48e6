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

// Optimal common lotteries through the budget problem
//   max V(s)  s.t.  sum_k s_k / F_k <= D,  0 <= s_k <= g_k.
// Fill and linear objectives are solved exactly by greedy; separable
// concave objectives by bisection on the budget multiplier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/rational.hpp"

namespace lotto {

struct FillLottery {
  CommonLottery lottery;  // c_k = min{q_k, 1 - Q_k}
  RationalVector q;       // q_k = g_k / (D F_k)
  std::size_t cutoff = 0;
  CommonLottery pi;  // cutoff form; equal to `lottery`
  bool all_filled = false;
};

inline FillLottery OptimalLotteryFill(const Instance& inst) {
  const std::size_t n = inst.n();
  FillLottery out;
  out.q.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.q[k] = inst.g()[k] / (inst.d() * inst.cdf()[k]);

  // tail[k] = sum_{k' >= k} q_k'
  RationalVector tail(n + 1, Rational(0));
  for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + out.q[k];

  out.lottery.c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Rational big_q = Min(1, tail[k + 1]);
    out.lottery.c[k] = Min(out.q[k], 1 - big_q);
  }

  // Largest k' with tail[k'+1] <= 1 <= tail[k'], else 0.
  for (std::size_t k = n; k-- > 0;) {
    if (tail[k + 1] <= 1 && 1 <= tail[k]) {
      out.cutoff = k;
      break;
    }
  }
  out.pi.c.assign(n, Rational(0));
  for (std::size_t k = out.cutoff; k < n; ++k) {
    out.pi.c[k] = k > out.cutoff ? out.q[k] : Min(out.q[k], 1 - tail[k + 1]);
  }
  out.all_filled = tail[0] <= 1;
  return out;
}

struct MassesResult {
  PositionMasses masses;       // exact for fill/linear, rationalized otherwise
  std::vector<double> approx;  // floating masses
  std::optional<double> lambda;
  ObjectiveValue value;
  bool convexity_warning = false;  // 1/F not convex: best common lottery only
};

namespace detail {

inline std::vector<double> ToDoubles(const RationalVector& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = ToDouble(v[i]);
  return out;
}

// Greedy budget allocation in the given position order.
inline RationalVector GreedyMasses(const Instance& inst, const std::vector<std::size_t>& order) {
  RationalVector s(inst.n(), Rational(0));
  Rational budget = inst.d();
  for (std::size_t k : order) {
    if (budget <= 0) break;
    s[k] = Min(inst.g()[k], budget * inst.cdf()[k]);
    budget -= s[k] / inst.cdf()[k];
  }
  return s;
}

struct WaterFill {
  std::vector<double> s;
  double lambda = 0;
};

// s_k(lambda) = (alpha_k rho F_k / lambda)^(1/(1-rho)), clipped to caps
// when `capped`. Positions with alpha_k = 0 stay empty.
inline WaterFill BisectWaterFill(const std::vector<double>& alpha, double rho,
                                 const std::vector<double>& cdf, const std::vector<double>& caps,
                                 double budget, bool capped) {
  const std::size_t n = alpha.size();
  const double expo = 1.0 / (1.0 - rho);
  auto masses = [&](double lambda) {
    std::vector<double> s(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      if (alpha[k] <= 0) continue;
      s[k] = std::pow(alpha[k] * rho * cdf[k] / lambda, expo);
      if (capped) s[k] = std::clamp(s[k], 0.0, caps[k]);
    }
    return s;
  };
  auto spend = [&](const std::vector<double>& s) {
    double total = 0;
    for (std::size_t k = 0; k < n; ++k) total += s[k] / cdf[k];
    return total;
  };

  WaterFill out;
  if (capped) {
    std::vector<double> full(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) full[k] = alpha[k] > 0 ? caps[k] : 0.0;
    if (spend(full) <= budget) {
      out.s = full;
      out.lambda = 0;
      return out;
    }
  }
  double lo = 1.0;
  double hi = 1.0;
  while (spend(masses(lo)) < budget) lo /= 2;
  while (spend(masses(hi)) > budget) hi *= 2;
  while (hi - lo > 1e-14 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (spend(masses(mid)) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.lambda = 0.5 * (lo + hi);
  out.s = masses(out.lambda);
  return out;
}

}  // namespace detail

inline MassesResult OptimalMasses(const Instance& inst, const Objective& obj) {
  const std::size_t n = inst.n();
  MassesResult out;
  out.convexity_warning = !GetConvexityReport(inst).is_convex;
  if (const auto* concave = std::get_if<ConcaveObjective>(&obj)) {
    if (concave->weights.size() != n) throw Error(ErrorCode::kDimensionMismatch, "weights length");
    const detail::WaterFill wf = detail::BisectWaterFill(
        detail::ToDoubles(concave->weights), ToDouble(concave->rho), detail::ToDoubles(inst.cdf()),
        detail::ToDoubles(inst.g()), ToDouble(inst.d()), true);
    out.approx = wf.s;
    out.lambda = wf.lambda;
    out.masses.s.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.masses.s[k] = Rationalize(wf.s[k]);
  } else {
    const RationalVector w = LinearWeights(obj, n);
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < n; ++k) {
      if (w[k] > 0) order.push_back(k);
    }
    // Budget price of position k is 1/F_k, so bang per buck is w_k F_k.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return w[a] * inst.cdf()[a] > w[b] * inst.cdf()[b];
    });
    out.masses.s = detail::GreedyMasses(inst, order);
    out.approx = detail::ToDoubles(out.masses.s);
  }
  out.value = std::holds_alternative<ConcaveObjective>(obj)
                  ? ObjectiveValue{std::nullopt, 0.0}
                  : EvaluateObjective(obj, out.masses);
  if (const auto* concave = std::get_if<ConcaveObjective>(&obj)) {
    double v = 0;
    for (std::size_t k = 0; k < n; ++k) {
      v += ToDouble(concave->weights[k]) * std::pow(out.approx[k], ToDouble(concave->rho));
    }
    out.value.approx = v;
  }
  return out;
}

/// Water-filling with unbounded capacities; the budget always binds.
inline MassesResult OptimalMassesFlexible(const Instance& inst, const ConcaveObjective& obj) {
  const std::size_t n = inst.n();
  if (obj.weights.size() != n) throw Error(ErrorCode::kDimensionMismatch, "weights length");
  for (const auto& w : obj.weights) {
    if (w <= 0) throw Error(ErrorCode::kPreconditionViolation, "flexible capacity needs positive weights");
  }
  const detail::WaterFill wf =
      detail::BisectWaterFill(detail::ToDoubles(obj.weights), ToDouble(obj.rho),
                              detail::ToDoubles(inst.cdf()), {}, ToDouble(inst.d()), false);
  MassesResult out;
  out.convexity_warning = !GetConvexityReport(inst).is_convex;
  out.approx = wf.s;
  out.lambda = wf.lambda;
  out.masses.s.resize(n);
  double v = 0;
  for (std::size_t k = 0; k < n; ++k) {
    out.masses.s[k] = Rationalize(wf.s[k]);
    v += ToDouble(obj.weights[k]) * std::pow(wf.s[k], ToDouble(obj.rho));
  }
  out.value = {std::nullopt, v};
  return out;
}

enum class KktCase {
  kInterior,             // 0 < s_k < g_k: V_k = lambda / F_k
  kZero,                 // s_k = 0: V_k <= lambda / F_k
  kAtCapacity,           // s_k = g_k: V_k >= lambda / F_k
  kComplementarySlack,   // slack budget with lambda > 0
};

inline const char* KktCaseName(KktCase c) {
  switch (c) {
    case KktCase::kInterior: return "interior";
    case KktCase::kZero: return "zero";
    case KktCase::kAtCapacity: return "at-capacity";
    case KktCase::kComplementarySlack: return "complementary-slackness";
  }
  return "?";
}

struct KktViolation {
  std::size_t position;
  KktCase kkt_case;
  std::string detail;
};

struct KktReport {
  bool ok = true;
  double lambda = 0;
  std::vector<KktViolation> violations;
};

/// Looks for a budget multiplier certifying s. Marginals are compared as
/// F_k V_k(s_k) against lambda with tolerance tol * max(1, lambda);
/// "s_k = 0" and "s_k = g_k" are also judged within tol.
inline KktReport KktCheck(const Instance& inst, const ConcaveObjective& obj,
                          const std::vector<double>& s, double tol,
                          std::optional<std::vector<double>> caps = std::nullopt) {
  const std::size_t n = inst.n();
  if (s.size() != n || obj.weights.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "masses and weights must have length N");
  }
  const std::vector<double> cdf = detail::ToDoubles(inst.cdf());
  const std::vector<double> cap = caps ? *caps : detail::ToDoubles(inst.g());
  const double rho = ToDouble(obj.rho);
  const double budget = ToDouble(inst.d());
  double spent = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (s[k] < -tol || s[k] > cap[k] + tol) {
      throw Error(ErrorCode::kInfeasibleMasses, "s[" + std::to_string(k) + "] outside [0, g_k]");
    }
    spent += s[k] / cdf[k];
  }
  if (spent > budget + tol) throw Error(ErrorCode::kInfeasibleMasses, "budget exceeded");

  // Scaled marginal F_k * V_k(s_k); +inf at zero with a positive weight.
  auto scaled_marginal = [&](std::size_t k) {
    const double alpha = ToDouble(obj.weights[k]);
    if (alpha == 0) return 0.0;
    if (s[k] <= 0) return std::numeric_limits<double>::infinity();
    return cdf[k] * alpha * rho * std::pow(s[k], rho - 1);
  };
  std::vector<std::size_t> interior;
  for (std::size_t k = 0; k < n; ++k) {
    if (s[k] > tol && s[k] < cap[k] - tol) interior.push_back(k);
  }

  KktReport report;
  if (!interior.empty()) {
    std::vector<double> estimates;
    for (std::size_t k : interior) estimates.push_back(scaled_marginal(k));
    std::vector<double> sorted = estimates;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    report.lambda = sorted[sorted.size() / 2];
  } else {
    // No interior position: any lambda between the zero-position bound
    // and the capacity bound works; take the smallest admissible one.
    double lower = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (s[k] <= tol && cap[k] > tol) lower = std::max(lower, scaled_marginal(k));
    }
    report.lambda = lower;
  }
  const double scale = std::max(1.0, report.lambda);
  for (std::size_t k = 0; k < n; ++k) {
    // A zero-capacity position is pinned by both bounds; any marginal works.
    if (cap[k] <= tol) continue;
    const double m = scaled_marginal(k);
    if (s[k] <= tol) {
      if (m > report.lambda + tol * scale) {
        report.violations.push_back({k, KktCase::kZero, "marginal exceeds lambda at an empty position"});
      }
    } else if (s[k] >= cap[k] - tol) {
      if (m < report.lambda - tol * scale) {
        report.violations.push_back({k, KktCase::kAtCapacity, "marginal below lambda at a full position"});
      }
    } else if (std::abs(m - report.lambda) > tol * scale) {
      report.violations.push_back({k, KktCase::kInterior, "marginal differs from lambda"});
    }
  }
  if (report.lambda > tol && spent < budget - tol) {
    report.violations.push_back({n, KktCase::kComplementarySlack, "budget slack with positive lambda"});
  }
  report.ok = report.violations.empty();
  return report;
}

}  // namespace lotto
