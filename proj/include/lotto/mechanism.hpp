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

// Direct mechanisms, common lotteries, constraint evaluation and the
// IC-structure diagnostics (monotonicity, redundant and binding ICs).

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/rational.hpp"

namespace lotto {

/// a(x_k; theta_i) stored with row = position k, column = type i.
/// Raw matrices may carry mass below the diagonal (k < i) so that the
/// checker can diagnose them; FeasibilityReport flags it.
class DirectMechanism {
 public:
  DirectMechanism() = default;
  explicit DirectMechanism(std::size_t n) : a_(n, n) {}
  explicit DirectMechanism(RationalMatrix a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "mechanism matrix must be square");
    }
  }

  std::size_t n() const noexcept { return a_.rows(); }
  Rational& operator()(std::size_t k, std::size_t i) { return a_(k, i); }
  const Rational& operator()(std::size_t k, std::size_t i) const { return a_(k, i); }
  const RationalMatrix& matrix() const noexcept { return a_; }

  friend bool operator==(const DirectMechanism& x, const DirectMechanism& y) {
    return x.a_ == y.a_;
  }

 private:
  RationalMatrix a_;
};

/// Offer probabilities c_k; 1 - sum(c) is the no-offer probability.
struct CommonLottery {
  RationalVector c;
  Rational Total() const { return Sum(c); }
  friend bool operator==(const CommonLottery&, const CommonLottery&) = default;
};

/// s_k: mass of agents accepting position k.
struct PositionMasses {
  RationalVector s;
  Rational Total() const { return Sum(s); }
  friend bool operator==(const PositionMasses&, const PositionMasses&) = default;
};

struct FillObjective {};
struct LinearObjective {
  RationalVector weights;
};
/// V(s) = sum_k w_k s_k^rho with 0 < rho < 1.
struct ConcaveObjective {
  RationalVector weights;
  Rational rho;
};
using Objective = std::variant<FillObjective, LinearObjective, ConcaveObjective>;

inline Objective MakeLinear(RationalVector weights) {
  return LinearObjective{std::move(weights)};
}

inline Objective MakeConcave(RationalVector weights, Rational rho) {
  if (rho <= 0 || rho >= 1) {
    throw Error(ErrorCode::kUnsupportedObjective, "rho must lie in (0,1)");
  }
  for (const auto& w : weights) {
    if (w < 0) throw Error(ErrorCode::kUnsupportedObjective, "concave weights must be >= 0");
  }
  return ConcaveObjective{std::move(weights), std::move(rho)};
}

inline bool IsLinear(const Objective& obj) {
  return !std::holds_alternative<ConcaveObjective>(obj);
}

/// Fill is Linear(all-ones).
inline RationalVector LinearWeights(const Objective& obj, std::size_t n) {
  if (std::holds_alternative<FillObjective>(obj)) return RationalVector(n, Rational(1));
  if (const auto* lin = std::get_if<LinearObjective>(&obj)) {
    if (lin->weights.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "objective weights length");
    }
    return lin->weights;
  }
  throw Error(ErrorCode::kUnsupportedObjective, "objective is not linear");
}

namespace detail {

inline void CheckSize(const Instance& inst, const DirectMechanism& mech) {
  if (mech.n() != inst.n()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mechanism is " + std::to_string(mech.n()) + "x" + std::to_string(mech.n()) +
                    ", instance has N=" + std::to_string(inst.n()));
  }
}

inline void CheckType(const Instance& inst, std::size_t i) {
  if (i >= inst.n()) {
    throw Error(ErrorCode::kIndexOutOfRange, "type index " + std::to_string(i));
  }
}

// Sum_{k>=i} (k - i) * (a(k,i) - a(k,j)): IC_{i,j} scaled by N-1.
inline Rational ScaledIcExpression(const DirectMechanism& mech, std::size_t i, std::size_t j) {
  Rational total = 0;
  for (std::size_t k = i + 1; k < mech.n(); ++k) {
    total += static_cast<long>(k - i) * (mech(k, i) - mech(k, j));
  }
  return total;
}

}  // namespace detail

/// LHS - RHS of IC_{i,j}: type i weakly prefers its own lottery iff >= 0.
inline Rational IcSlack(const Instance& inst, const DirectMechanism& mech, std::size_t i,
                        std::size_t j) {
  detail::CheckSize(inst, mech);
  detail::CheckType(inst, i);
  detail::CheckType(inst, j);
  if (i == j) throw Error(ErrorCode::kBadIndices, "IC pair needs i != j");
  Rational scaled = detail::ScaledIcExpression(mech, i, j);
  return scaled / static_cast<long>(inst.n() - 1);
}

inline bool IsRedundantIc(std::size_t n, std::size_t i, std::size_t j) {
  return i == n - 1 || j >= i + 2;
}

inline PositionMasses GetPositionMasses(const Instance& inst, const DirectMechanism& mech) {
  detail::CheckSize(inst, mech);
  PositionMasses masses{RationalVector(inst.n(), Rational(0))};
  for (std::size_t k = 0; k < inst.n(); ++k) {
    Rational acc = 0;
    for (std::size_t i = 0; i <= k; ++i) acc += mech(k, i) * inst.f()[i];
    masses.s[k] = inst.d() * acc;
  }
  return masses;
}

/// Total offer probability per type, over every row.
inline RationalVector Participation(const DirectMechanism& mech) {
  RationalVector p(mech.n(), Rational(0));
  for (std::size_t k = 0; k < mech.n(); ++k) {
    for (std::size_t i = 0; i < mech.n(); ++i) p[i] += mech(k, i);
  }
  return p;
}

struct MonProfile {
  RationalVector participation;
  bool non_increasing = true;
};

inline MonProfile GetMonProfile(const Instance& inst, const DirectMechanism& mech) {
  detail::CheckSize(inst, mech);
  MonProfile profile{Participation(mech), true};
  for (std::size_t i = 1; i < mech.n(); ++i) {
    if (profile.participation[i] > profile.participation[i - 1]) profile.non_increasing = false;
  }
  return profile;
}

using IcPair = std::pair<std::size_t, std::size_t>;

struct FeasibilityReport {
  RationalMatrix ic_slack;  // (i,j); diagonal unused
  RationalVector participation;
  bool mon_ok = true;
  RationalVector position_slack;
  RationalVector agent_slack;
  bool nonnegative_ok = true;
  bool ex_post_ir_ok = true;
  bool is_feasible = true;
  std::set<IcPair> binding_ics;
  std::set<IcPair> violated_ics;
  std::set<IcPair> redundant_ics;
};

inline FeasibilityReport GetFeasibilityReport(const Instance& inst,
                                              const DirectMechanism& mech) {
  detail::CheckSize(inst, mech);
  const std::size_t n = inst.n();
  FeasibilityReport report;
  report.ic_slack = RationalMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      Rational slack = IcSlack(inst, mech, i, j);
      if (IsRedundantIc(n, i, j)) report.redundant_ics.insert({i, j});
      if (slack == 0) report.binding_ics.insert({i, j});
      if (slack < 0) report.violated_ics.insert({i, j});
      report.ic_slack(i, j) = std::move(slack);
    }
  }
  const MonProfile mon = GetMonProfile(inst, mech);
  report.participation = mon.participation;
  report.mon_ok = mon.non_increasing;

  report.position_slack.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rational offered = 0;
    for (std::size_t i = 0; i < n; ++i) {
      offered += mech(k, i) * inst.f()[i];
      if (mech(k, i) < 0) report.nonnegative_ok = false;
      if (k < i && mech(k, i) != 0) report.ex_post_ir_ok = false;
    }
    report.position_slack[k] = inst.g()[k] - inst.d() * offered;
  }
  report.agent_slack.resize(n);
  for (std::size_t i = 0; i < n; ++i) report.agent_slack[i] = 1 - report.participation[i];

  report.is_feasible = report.violated_ics.empty() && report.nonnegative_ok &&
                       report.ex_post_ir_ok;
  for (const auto& v : report.position_slack) report.is_feasible = report.is_feasible && v >= 0;
  for (const auto& v : report.agent_slack) report.is_feasible = report.is_feasible && v >= 0;
  return report;
}

inline bool IsFeasible(const Instance& inst, const DirectMechanism& mech) {
  return GetFeasibilityReport(inst, mech).is_feasible;
}

struct ObjectiveValue {
  std::optional<Rational> exact;  // set for Fill and Linear
  double approx = 0.0;
};

inline ObjectiveValue EvaluateObjective(const Objective& obj, const PositionMasses& masses) {
  const std::size_t n = masses.s.size();
  if (const auto* concave = std::get_if<ConcaveObjective>(&obj)) {
    if (concave->weights.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "objective weights length");
    }
    const double rho = ToDouble(concave->rho);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += ToDouble(concave->weights[k]) * std::pow(ToDouble(masses.s[k]), rho);
    }
    return {std::nullopt, total};
  }
  const RationalVector w = LinearWeights(obj, n);
  Rational total = 0;
  for (std::size_t k = 0; k < n; ++k) total += w[k] * masses.s[k];
  return {total, ToDouble(total)};
}

struct IcClassification {
  std::set<IcPair> binding;
  std::set<IcPair> slack;
  std::set<IcPair> redundant;
};

/// Partition of every IC pair. Non-redundant pairs are binding when their
/// slack is at most zero_tolerance (0 for exact input).
inline IcClassification ClassifyBinding(const Instance& inst, const DirectMechanism& mech,
                                        const Rational& zero_tolerance = 0) {
  const FeasibilityReport report = GetFeasibilityReport(inst, mech);
  if (!report.is_feasible) {
    throw Error(ErrorCode::kInfeasibleInput, "classify_binding needs a feasible mechanism");
  }
  IcClassification out;
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) {
      if (i == j) continue;
      if (IsRedundantIc(inst.n(), i, j)) {
        out.redundant.insert({i, j});
      } else if (report.ic_slack(i, j) <= zero_tolerance) {
        out.binding.insert({i, j});
      } else {
        out.slack.insert({i, j});
      }
    }
  }
  return out;
}

/// a(x_k; theta_i) = c_k for i <= k, 0 otherwise.
inline DirectMechanism ExpandCommonLottery(const Instance& inst, const CommonLottery& cl) {
  if (cl.c.size() != inst.n()) {
    throw Error(ErrorCode::kDimensionMismatch, "lottery length");
  }
  for (const auto& c : cl.c) {
    if (c < 0) throw Error(ErrorCode::kLotteryOverflow, "negative offer probability");
  }
  if (cl.Total() > 1) {
    throw Error(ErrorCode::kLotteryOverflow, "offer total " + ToString(cl.Total()) + " > 1");
  }
  DirectMechanism mech(inst.n());
  for (std::size_t k = 0; k < inst.n(); ++k) {
    for (std::size_t i = 0; i <= k; ++i) mech(k, i) = cl.c[k];
  }
  return mech;
}

/// The offer vector of a mechanism that is exactly a truncated common
/// lottery, or nullopt.
inline std::optional<CommonLottery> ReadCommonLottery(const DirectMechanism& mech) {
  CommonLottery cl{RationalVector(mech.n(), Rational(0))};
  for (std::size_t k = 0; k < mech.n(); ++k) {
    cl.c[k] = mech(k, 0);
    for (std::size_t i = 0; i < mech.n(); ++i) {
      const Rational& expected = i <= k ? cl.c[k] : Rational(0);
      if (mech(k, i) != expected) return std::nullopt;
    }
  }
  return cl;
}

}  // namespace lotto
