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

// LP builders for the designer's problem and for the min-mass problem.
//
// The min-mass program  min D  s.t.  IC(a),  D * sum_i f_i a(k,i) >= s_k,
// sum_k a(k,i) <= 1  is bilinear in (D, a). Substituting y = D * a makes it
// linear: IC constraints are positively homogeneous so they carry over to y
// unchanged, and the agent rows become sum_k y(k,i) <= D. Any optimum (y, D)
// with D > 0 maps back through a = y / D.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/rational.hpp"
#include "lotto/simplex.hpp"

namespace lotto {

inline std::string CellName(const char* prefix, std::size_t k, std::size_t i) {
  return std::string(prefix) + "[" + std::to_string(k) + "][" + std::to_string(i) + "]";
}
inline std::string IcRowName(std::size_t i, std::size_t j) {
  return "IC_{" + std::to_string(i) + "," + std::to_string(j) + "}";
}
inline std::string PosRowName(std::size_t k) { return "POS_" + std::to_string(k); }
inline std::string AgeRowName(std::size_t i) { return "AGE_" + std::to_string(i); }

namespace detail {

// Adds one variable per cell k >= i and returns the index table (unused
// cells hold SIZE_MAX).
inline std::vector<std::vector<std::size_t>> AddCellVariables(LinearProgram& lp, std::size_t n,
                                                              const char* prefix) {
  std::vector<std::vector<std::size_t>> index(n, std::vector<std::size_t>(n, SIZE_MAX));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) index[k][i] = lp.AddVariable(CellName(prefix, k, i));
  }
  return index;
}

// IC_{i,j} scaled by N-1: sum_{k>i} (k-i) (v(k,i) - v(k,j)) >= 0.
inline void AddIcRows(LinearProgram& lp, const std::vector<std::vector<std::size_t>>& index) {
  const std::size_t n = index.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<LpTerm> terms;
      for (std::size_t k = i + 1; k < n; ++k) {
        const Rational w = static_cast<long>(k - i);
        terms.push_back({index[k][i], w});
        if (j <= k) terms.push_back({index[k][j], Rational(-w)});
      }
      lp.AddConstraint(IcRowName(i, j), std::move(terms), Relation::kGreaterEqual, 0);
    }
  }
}

}  // namespace detail

/// max sum_k w_k s_k(a) over direct mechanisms with ex-post IR imposed by
/// only creating cells k >= i.
inline LinearProgram BuildDesignerLp(const Instance& inst, const Objective& obj) {
  if (!IsLinear(obj)) {
    throw Error(ErrorCode::kUnsupportedObjective, "designer LP needs a fill or linear objective");
  }
  const std::size_t n = inst.n();
  const RationalVector w = LinearWeights(obj, n);
  LinearProgram lp(Sense::kMaximize);
  const auto index = detail::AddCellVariables(lp, n, "a");
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) lp.SetCost(index[k][i], w[k] * inst.d() * inst.f()[i]);
  }
  detail::AddIcRows(lp, index);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<LpTerm> terms;
    for (std::size_t i = 0; i <= k; ++i) terms.push_back({index[k][i], inst.d() * inst.f()[i]});
    lp.AddConstraint(PosRowName(k), std::move(terms), Relation::kLessEqual, inst.g()[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<LpTerm> terms;
    for (std::size_t k = i; k < n; ++k) terms.push_back({index[k][i], Rational(1)});
    lp.AddConstraint(AgeRowName(i), std::move(terms), Relation::kLessEqual, 1);
  }
  return lp;
}

/// min D over (y, D) with y = D * a; see the file comment.
inline LinearProgram BuildMinMassLp(const Instance& inst, const PositionMasses& targets) {
  const std::size_t n = inst.n();
  if (targets.s.size() != n) throw Error(ErrorCode::kDimensionMismatch, "targets length");
  for (const auto& s : targets.s) {
    if (s < 0) throw Error(ErrorCode::kInfeasibleInput, "negative target mass");
  }
  LinearProgram lp(Sense::kMinimize);
  const auto index = detail::AddCellVariables(lp, n, "y");
  const std::size_t d = lp.AddVariable("D", 1);
  detail::AddIcRows(lp, index);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<LpTerm> terms;
    for (std::size_t i = 0; i <= k; ++i) terms.push_back({index[k][i], inst.f()[i]});
    lp.AddConstraint(PosRowName(k), std::move(terms), Relation::kGreaterEqual, targets.s[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<LpTerm> terms{{d, Rational(1)}};
    for (std::size_t k = i; k < n; ++k) terms.push_back({index[k][i], Rational(-1)});
    lp.AddConstraint(AgeRowName(i), std::move(terms), Relation::kGreaterEqual, 0);
  }
  return lp;
}

struct DesignerSolution {
  LinearProgram lp;
  LpSolution lp_solution;
  DirectMechanism mechanism;
  Rational value;
};

inline DirectMechanism MechanismFromCells(const LinearProgram& lp, const LpSolution& sol,
                                          std::size_t n, const char* prefix,
                                          const Rational& scale = 1) {
  DirectMechanism mech(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) mech(k, i) = sol.Value(lp, CellName(prefix, k, i)) / scale;
  }
  return mech;
}

inline DesignerSolution SolveDesigner(const Instance& inst, const Objective& obj) {
  DesignerSolution out{BuildDesignerLp(inst, obj), {}, DirectMechanism(inst.n()), 0};
  out.lp_solution = SimplexSolve(out.lp);
  if (!out.lp_solution.optimal()) {
    // The zero mechanism is always feasible and the feasible set is bounded.
    throw Error(ErrorCode::kNotOptimal,
                std::string("designer LP ended ") + LpStatusName(out.lp_solution.status));
  }
  out.mechanism = MechanismFromCells(out.lp, out.lp_solution, inst.n(), "a");
  out.value = out.lp_solution.objective;
  return out;
}

struct MinMassSolution {
  LinearProgram lp;
  LpSolution lp_solution;
  Rational min_mass;
  std::optional<DirectMechanism> mechanism;  // a = y / D when D > 0
};

inline MinMassSolution SolveMinMass(const Instance& inst, const PositionMasses& targets) {
  MinMassSolution out{BuildMinMassLp(inst, targets), {}, 0, std::nullopt};
  out.lp_solution = SimplexSolve(out.lp);
  if (!out.lp_solution.optimal()) {
    throw Error(ErrorCode::kNotOptimal,
                std::string("min-mass LP ended ") + LpStatusName(out.lp_solution.status));
  }
  out.min_mass = out.lp_solution.objective;
  if (out.min_mass > 0) {
    out.mechanism = MechanismFromCells(out.lp, out.lp_solution, inst.n(), "y", out.min_mass);
  }
  return out;
}

/// Closed-form multipliers for the min-mass program, per unit of D:
/// POS_k -> 1/F_k, AGE_0 -> 1, other AGE rows 0, IC_{i,i+1} -> f_{i+1}/F_{i+1},
/// IC_{i,j} (j < i < N-1) -> f_j times the second difference of 1/F at i.
/// Every y column is tight under these prices, so they certify optimality
/// exactly when all of them are nonnegative.
struct ConjecturedDual {
  RationalVector pos;
  RationalVector age;
  RationalMatrix ic;
};

inline ConjecturedDual ConjectureMinMassDual(const Instance& inst) {
  const std::size_t n = inst.n();
  ConjecturedDual dual{RationalVector(n), RationalVector(n, Rational(0)), RationalMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) dual.pos[k] = 1 / inst.cdf()[k];
  dual.age[0] = 1;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dual.ic(i, i + 1) = inst.f()[i + 1] / inst.cdf()[i + 1];
    if (i == 0) continue;
    const Rational second = InverseCdfSecondDifference(inst, i);
    for (std::size_t j = 0; j < i; ++j) dual.ic(i, j) = inst.f()[j] * second;
  }
  return dual;
}

struct DualCertificateEntry {
  std::string row;
  Rational solver_dual;
  Rational conjectured;  // scaled by the optimal D for the min-mass LP
};

struct DualCertificate {
  std::vector<DualCertificateEntry> entries;
  OptimalityCheck check;
  bool conjecture_nonnegative = true;
  bool conjecture_dual_feasible = true;  // sign and reduced-cost conditions
  Rational conjectured_dual_objective;   // per unit D, equals sum_k s_k / F_k
  std::vector<std::string> negative_conjectured;
  bool pos_duals_match = true;  // solver POS duals equal 1/F_k
};

/// Report of solver duals keyed by row name, with the closed-form
/// multipliers alongside when the LP is a min-mass program.
inline DualCertificate MakeDualCertificate(const Instance& inst, const LinearProgram& lp,
                                           const LpSolution& sol) {
  if (!sol.optimal()) throw Error(ErrorCode::kNotOptimal, "no optimal basis to certify");
  DualCertificate cert;
  cert.check = CheckOptimality(lp, sol);
  const bool min_mass = lp.sense() == Sense::kMinimize && lp.HasRow(PosRowName(0));
  const std::size_t n = inst.n();
  ConjecturedDual conj;
  if (min_mass) conj = ConjectureMinMassDual(inst);
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    cert.entries.push_back({lp.rows()[r].name, sol.row_duals[r], 0});
  }
  if (!min_mass) return cert;

  const Rational& d_star = sol.objective;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Rational& v = conj.ic(i, j);
      cert.entries[lp.RowIndex(IcRowName(i, j))].conjectured = d_star * v;
      if (v < 0) {
        cert.conjecture_nonnegative = false;
        cert.negative_conjectured.push_back(IcRowName(i, j));
      }
    }
  }
  Rational dual_obj = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t r = lp.RowIndex(PosRowName(k));
    cert.entries[r].conjectured = d_star * conj.pos[k];
    dual_obj += conj.pos[k] * lp.rows()[r].rhs;
    if (sol.row_duals[r] != conj.pos[k]) cert.pos_duals_match = false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    cert.entries[lp.RowIndex(AgeRowName(i))].conjectured = d_star * conj.age[i];
  }
  cert.conjectured_dual_objective = dual_obj;

  // Reduced costs of the conjectured prices on every column.
  RationalVector reduced = lp.cost();
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    const std::string& name = lp.rows()[r].name;
    Rational price = 0;
    if (name.rfind("POS", 0) == 0) {
      price = conj.pos[std::stoul(name.substr(4))];
    } else if (name.rfind("AGE", 0) == 0) {
      price = conj.age[std::stoul(name.substr(4))];
    } else {
      const std::size_t split = name.find(',');
      price = conj.ic(std::stoul(name.substr(4, split - 4)), std::stoul(name.substr(split + 1)));
    }
    if (price == 0) continue;
    for (const auto& t : lp.rows()[r].terms) reduced[t.var] -= price * t.coef;
  }
  for (const auto& d : reduced) {
    if (d < 0) cert.conjecture_dual_feasible = false;
  }
  if (!cert.conjecture_nonnegative) cert.conjecture_dual_feasible = false;
  return cert;
}

}  // namespace lotto
