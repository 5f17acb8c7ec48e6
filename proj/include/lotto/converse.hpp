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

// Improving perturbation of the optimal common lottery when 1/F is not
// convex. Stage one contracts type i's odds onto position k and spreads
// correction terms over every type accepting k-1, k, k+1; this keeps all
// position masses and frees eps' = -eps f_i (1/F_{k-1} - 2/F_k + 1/F_{k+1})
// of every low type's probability. Stage two spends that slack on an
// unfilled low position k'.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/optimizer.hpp"
#include "lotto/rational.hpp"

namespace lotto {

/// Smallest interior k with a negative second difference of 1/F.
inline std::optional<std::size_t> FindViolation(const Instance& inst) {
  for (std::size_t k = 1; k + 1 < inst.n(); ++k) {
    if (InverseCdfSecondDifference(inst, k) < 0) return k;
  }
  return std::nullopt;
}

/// Largest L such that types <= L are offered a position with probability
/// one, i.e. sum_{k >= L} c_k = 1.
inline std::optional<std::size_t> FullAllocationCutoff(const CommonLottery& cl) {
  Rational tail = 0;
  for (std::size_t k = cl.c.size(); k-- > 0;) {
    tail += cl.c[k];
    if (tail == 1) return k;
  }
  return std::nullopt;
}

struct PerturbResult {
  DirectMechanism tilde;  // mass-preserving stage
  DirectMechanism hat;    // after filling position k'
  Rational epsilon_prime;
  Rational fill_gain;  // D * delta * F_{k'}
};

namespace detail {

inline void Require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorCode::kPreconditionViolation, what);
}

// Per-epsilon change of the stage-one matrix.
inline RationalMatrix PerturbationDirection(const Instance& inst, std::size_t k, std::size_t i) {
  const std::size_t n = inst.n();
  const Rational& fi = inst.f()[i];
  RationalMatrix dir(n, n);
  const Rational down_km1 = fi / inst.cdf()[k - 1];
  const Rational down_k = 2 * fi / inst.cdf()[k];
  const Rational down_kp1 = fi / inst.cdf()[k + 1];
  for (std::size_t j = 0; j <= k + 1; ++j) {
    if (j <= k - 1) dir(k - 1, j) += down_km1;
    if (j <= k) dir(k, j) -= down_k;
    dir(k + 1, j) += down_kp1;
  }
  dir(k - 1, i) -= 1;
  dir(k, i) += 2;
  dir(k + 1, i) -= 1;
  return dir;
}

}  // namespace detail

inline PerturbResult Perturb(const Instance& inst, const CommonLottery& base, std::size_t k,
                             std::size_t i, const Rational& epsilon, const Rational& delta,
                             std::size_t fill_index) {
  using detail::Require;
  const std::size_t n = inst.n();
  Require(base.c.size() == n, "lottery length must equal N");
  Require(k > 0 && k + 1 < n, "need 0 < k < N-1");
  Require(i < k, "need i < k");
  Require(epsilon >= 0, "epsilon must be nonnegative");
  Require(delta >= 0, "delta must be nonnegative");
  const DirectMechanism a = ExpandCommonLottery(inst, base);
  Require(a(k - 1, i) > 0, "a(x_{k-1};theta_i) must be positive");
  Require(a(k, i) > 0, "a(x_k;theta_i) must be positive");
  Require(a(k + 1, i) > 0, "a(x_{k+1};theta_i) must be positive");

  PerturbResult out{a, a, -epsilon * inst.f()[i] * InverseCdfSecondDifference(inst, k), 0};
  Require(delta <= out.epsilon_prime, "agent-slack: delta exceeds epsilon' = " + ToString(out.epsilon_prime));

  const RationalMatrix dir = detail::PerturbationDirection(inst, k, i);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dir(r, j) == 0) continue;
      out.tilde(r, j) += epsilon * dir(r, j);
      Require(out.tilde(r, j) >= 0 && out.tilde(r, j) <= 1,
              "cell-range: cell (" + std::to_string(r) + "," + std::to_string(j) + ") leaves [0,1]");
    }
  }
  out.hat = out.tilde;
  if (delta > 0) {
    const auto cutoff = FullAllocationCutoff(base);
    Require(cutoff.has_value(), "fill-index: no type is fully allocated by the base lottery");
    Require(fill_index <= *cutoff, "fill-index: k' must not exceed L = " + std::to_string(*cutoff));
    const PositionMasses s = GetPositionMasses(inst, a);
    Require(s.s[fill_index] < inst.g()[fill_index], "fill-index: position k' is already full");
    for (std::size_t j = 0; j <= fill_index; ++j) out.hat(fill_index, j) += delta;
  }
  const FeasibilityReport report = GetFeasibilityReport(inst, out.hat);
  for (std::size_t j = 0; j < n; ++j) {
    Require(report.agent_slack[j] >= 0, "agent-slack: type " + std::to_string(j) + " over-allocated");
  }
  for (std::size_t r = 0; r < n; ++r) {
    Require(report.position_slack[r] >= 0, "capacity: position " + std::to_string(r) + " over capacity");
  }
  Require(report.violated_ics.empty(), "ic: perturbed mechanism violates an IC constraint");
  Require(report.is_feasible, "perturbed mechanism is infeasible");
  out.fill_gain = inst.d() * delta * inst.cdf()[fill_index];
  return out;
}

/// Largest epsilon keeping every perturbed cell in [0,1], every type's
/// total probability <= 1 and, with delta = eps', the k' capacity.
inline Rational MaxPerturbationEpsilon(const Instance& inst, const CommonLottery& base,
                                       std::size_t k, std::size_t i, std::size_t fill_index) {
  const std::size_t n = inst.n();
  const DirectMechanism a = ExpandCommonLottery(inst, base);
  const RationalMatrix dir = detail::PerturbationDirection(inst, k, i);
  std::optional<Rational> best;
  auto bound = [&best](const Rational& room, const Rational& rate) {
    if (rate <= 0) return;
    const Rational b = room / rate;
    if (!best || b < *best) best = b;
  };
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      bound(1 - a(r, j), dir(r, j));
      bound(a(r, j), -dir(r, j));
    }
  }
  const Rational per_eps_prime = -inst.f()[i] * InverseCdfSecondDifference(inst, k);
  const RationalVector participation = Participation(a);
  for (std::size_t j = 0; j < n; ++j) {
    Rational rate = 0;
    for (std::size_t r = 0; r < n; ++r) rate += dir(r, j);
    if (j <= fill_index) rate += per_eps_prime;
    bound(1 - participation[j], rate);
  }
  const PositionMasses s = GetPositionMasses(inst, a);
  bound(inst.g()[fill_index] - s.s[fill_index], inst.d() * per_eps_prime * inst.cdf()[fill_index]);
  return best.value_or(Rational(1));
}

struct Improvement {
  DirectMechanism mechanism;
  Rational gain;  // objective gain over the base lottery
  Rational d;
  std::size_t k = 0;
  std::size_t i = 0;
  std::size_t fill_index = 0;
  Rational epsilon;
  Rational delta;
  CommonLottery base;
};

struct ImproveResult {
  std::optional<Improvement> improvement;
  std::string diagnostic;
};

namespace detail {

inline std::optional<Improvement> TryImproveAt(const Instance& inst, const RationalVector& w,
                                               std::string& diagnostic) {
  const FillLottery fill = OptimalLotteryFill(inst);
  if (fill.all_filled) {
    diagnostic = "full-fill feasible";
    return std::nullopt;
  }
  const auto cutoff = FullAllocationCutoff(fill.lottery);
  if (!cutoff) {
    diagnostic = "no supported window";
    return std::nullopt;
  }
  const DirectMechanism a = ExpandCommonLottery(inst, fill.lottery);
  const PositionMasses s = GetPositionMasses(inst, a);
  std::optional<std::size_t> fill_index;
  for (std::size_t r = 0; r <= *cutoff; ++r) {
    if (s.s[r] < inst.g()[r]) {
      fill_index = r;
      break;
    }
  }
  if (!fill_index) {
    diagnostic = "no supported window";
    return std::nullopt;
  }
  for (std::size_t k = 1; k + 1 < inst.n(); ++k) {
    if (InverseCdfSecondDifference(inst, k) >= 0) continue;
    for (std::size_t i = 0; i < k; ++i) {
      if (a(k - 1, i) == 0 || a(k, i) == 0 || a(k + 1, i) == 0) continue;
      const Rational eps = MaxPerturbationEpsilon(inst, fill.lottery, k, i, *fill_index) / 2;
      if (eps <= 0) continue;
      const Rational delta = -eps * inst.f()[i] * InverseCdfSecondDifference(inst, k);
      const PerturbResult p = Perturb(inst, fill.lottery, k, i, eps, delta, *fill_index);
      const Rational gain = w[*fill_index] * p.fill_gain;
      if (gain <= 0) continue;
      return Improvement{p.hat, gain, inst.d(), k, i, *fill_index, eps, delta, fill.lottery};
    }
  }
  diagnostic = "no supported window";
  return std::nullopt;
}

}  // namespace detail

/// Searches for a strictly improving perturbation of the optimal common
/// lottery. Without a pinned D, tries 32 geometrically spaced masses from
/// the cost of filling the top position to the cost of filling all of
/// them; the smallest improving D wins.
inline ImproveResult AutoImprove(const Instance& inst, const Objective& obj,
                                 std::optional<Rational> pinned_d = std::nullopt) {
  ImproveResult out;
  if (!IsLinear(obj)) {
    out.diagnostic = "objective must be fill or linear";
    return out;
  }
  const RationalVector w = LinearWeights(obj, inst.n());
  for (const auto& x : w) {
    if (x <= 0) {
      out.diagnostic = "objective is not strictly increasing";
      return out;
    }
  }
  if (!FindViolation(inst)) {
    out.diagnostic = "1/F is convex; no improvement exists";
    return out;
  }
  std::vector<Rational> grid;
  if (pinned_d) {
    grid.push_back(*pinned_d);
  } else {
    Rational lo = 0;
    Rational hi = 0;
    for (std::size_t k = 0; k < inst.n(); ++k) {
      const Rational cost = inst.g()[k] / inst.cdf()[k];
      hi += cost;
      if (cost > 0 && (k + 1 == inst.n() || lo == 0)) lo = cost;
    }
    const double lo_d = ToDouble(lo);
    const double ratio = std::pow(ToDouble(hi) / lo_d, 1.0 / 31.0);
    for (int p = 0; p < 32; ++p) {
      Rational d = Rationalize(lo_d * std::pow(ratio, p), 1'000'000);
      if (d > 0 && (grid.empty() || d > grid.back())) grid.push_back(d);
    }
  }
  bool saw_window_failure = false;
  std::string last;
  for (const auto& d : grid) {
    std::string diag;
    auto found = detail::TryImproveAt(inst.WithMass(d), w, diag);
    if (found) {
      out.improvement = std::move(found);
      out.diagnostic = "improved";
      return out;
    }
    if (diag != "full-fill feasible") saw_window_failure = true;
    last = diag;
  }
  out.diagnostic = saw_window_failure ? "no supported window" : last;
  return out;
}

}  // namespace lotto
