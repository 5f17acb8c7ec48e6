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

// Exact rational two-phase simplex (dense tableau, Bland's rule).
//
// Dual prices are reported as the sensitivity of the optimal objective to
// each row's right-hand side, in the problem's own sense: for a maximization
// a binding "<=" row has a nonnegative price, for a minimization a binding
// ">=" row has a nonnegative price.

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lotto/rational.hpp"

namespace lotto {

enum class Sense { kMinimize, kMaximize };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* LpStatusName(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "Optimal";
    case LpStatus::kInfeasible: return "Infeasible";
    case LpStatus::kUnbounded: return "Unbounded";
  }
  return "?";
}

struct LpTerm {
  std::size_t var;
  Rational coef;
};

struct LpRow {
  std::string name;
  std::vector<LpTerm> terms;
  Relation relation = Relation::kLessEqual;
  Rational rhs;
};

class LinearProgram {
 public:
  explicit LinearProgram(Sense sense = Sense::kMinimize) : sense_(sense) {}

  std::size_t AddVariable(std::string name, Rational cost = 0, Rational lower = 0,
                          std::optional<Rational> upper = std::nullopt) {
    if (upper && *upper < lower) {
      throw Error(ErrorCode::kBadIndices, "variable " + name + " has upper < lower");
    }
    const std::size_t index = names_.size();
    if (!var_index_.emplace(name, index).second) {
      throw Error(ErrorCode::kBadIndices, "duplicate variable " + name);
    }
    names_.push_back(std::move(name));
    cost_.push_back(std::move(cost));
    lower_.push_back(std::move(lower));
    upper_.push_back(std::move(upper));
    return index;
  }

  std::size_t AddConstraint(std::string name, std::vector<LpTerm> terms, Relation relation,
                            Rational rhs) {
    for (const auto& t : terms) {
      if (t.var >= names_.size()) {
        throw Error(ErrorCode::kIndexOutOfRange, "constraint " + name + " uses unknown variable");
      }
    }
    const std::size_t index = rows_.size();
    if (!row_index_.emplace(name, index).second) {
      throw Error(ErrorCode::kBadIndices, "duplicate constraint " + name);
    }
    rows_.push_back({std::move(name), std::move(terms), relation, std::move(rhs)});
    return index;
  }

  void SetCost(std::size_t var, Rational cost) { cost_.at(var) = std::move(cost); }

  Sense sense() const noexcept { return sense_; }
  std::size_t num_variables() const noexcept { return names_.size(); }
  std::size_t num_rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& variable_names() const noexcept { return names_; }
  const RationalVector& cost() const noexcept { return cost_; }
  const RationalVector& lower() const noexcept { return lower_; }
  const std::vector<std::optional<Rational>>& upper() const noexcept { return upper_; }
  const std::vector<LpRow>& rows() const noexcept { return rows_; }

  std::size_t VariableIndex(const std::string& name) const {
    const auto it = var_index_.find(name);
    if (it == var_index_.end()) throw Error(ErrorCode::kIndexOutOfRange, "variable " + name);
    return it->second;
  }
  std::size_t RowIndex(const std::string& name) const {
    const auto it = row_index_.find(name);
    if (it == row_index_.end()) throw Error(ErrorCode::kIndexOutOfRange, "constraint " + name);
    return it->second;
  }
  bool HasRow(const std::string& name) const { return row_index_.count(name) > 0; }

  Rational RowActivity(std::size_t r, const RationalVector& x) const {
    Rational total = 0;
    for (const auto& t : rows_[r].terms) total += t.coef * x[t.var];
    return total;
  }

 private:
  Sense sense_;
  std::vector<std::string> names_;
  RationalVector cost_;
  RationalVector lower_;
  std::vector<std::optional<Rational>> upper_;
  std::vector<LpRow> rows_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::unordered_map<std::string, std::size_t> row_index_;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  RationalVector primal;
  Rational objective;
  RationalVector row_duals;
  RationalVector reduced_costs;
  std::vector<std::string> basis;  // basic variable names at termination
  std::size_t pivots = 0;

  bool optimal() const noexcept { return status == LpStatus::kOptimal; }

  const Rational& Value(const LinearProgram& lp, const std::string& var) const {
    return primal.at(lp.VariableIndex(var));
  }
  const Rational& Dual(const LinearProgram& lp, const std::string& row) const {
    return row_duals.at(lp.RowIndex(row));
  }
  std::map<std::string, Rational> PrimalByName(const LinearProgram& lp) const {
    std::map<std::string, Rational> out;
    for (std::size_t j = 0; j < primal.size(); ++j) out[lp.variable_names()[j]] = primal[j];
    return out;
  }
  std::map<std::string, Rational> DualsByName(const LinearProgram& lp) const {
    std::map<std::string, Rational> out;
    for (std::size_t r = 0; r < row_duals.size(); ++r) out[lp.rows()[r].name] = row_duals[r];
    return out;
  }
};

namespace detail {

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows, RationalVector(cols + 1, Rational(0))),
        obj_(cols + 1, Rational(0)), basis_(rows, 0) {}

  Rational& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  Rational& rhs(std::size_t r) { return t_[r][n_]; }
  std::size_t& basic(std::size_t r) { return basis_[r]; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  // Objective row holds reduced costs d_j = c_j - c_B B^-1 A_j and, in the
  // last slot, -z.
  void PriceOut(const RationalVector& cost) {
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = cost[j];
    obj_[n_] = 0;
    for (std::size_t r = 0; r < m_; ++r) {
      const Rational& cb = cost[basis_[r]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (t_[r][j] != 0) obj_[j] -= cb * t_[r][j];
      }
    }
  }

  Rational Objective() const { return -obj_[n_]; }
  const Rational& Reduced(std::size_t j) const { return obj_[j]; }

  void Pivot(std::size_t row, std::size_t col) {
    const Rational inv = 1 / t_[row][col];
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j <= n_; ++j) {
      if (t_[row][j] != 0) {
        t_[row][j] *= inv;
        support.push_back(j);
      }
    }
    auto eliminate = [&](RationalVector& target) {
      if (target[col] == 0) return;
      const Rational factor = target[col];
      for (std::size_t j : support) target[j] -= factor * t_[row][j];
    };
    for (std::size_t r = 0; r < m_; ++r) {
      if (r != row) eliminate(t_[r]);
    }
    eliminate(obj_);
    basis_[row] = col;
  }

  // Bland: lowest-index improving column, ratio ties to lowest basic index.
  // Returns false when unbounded.
  bool Run(const std::vector<bool>& allowed, std::size_t& pivots) {
    for (;;) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < n_; ++j) {
        if (allowed[j] && obj_[j] < 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return true;
      std::optional<std::size_t> leaving;
      Rational best_ratio;
      for (std::size_t r = 0; r < m_; ++r) {
        if (t_[r][*entering] <= 0) continue;
        Rational ratio = t_[r][n_] / t_[r][*entering];
        if (!leaving || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[*leaving])) {
          leaving = r;
          best_ratio = std::move(ratio);
        }
      }
      if (!leaving) return false;
      Pivot(*leaving, *entering);
      ++pivots;
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<RationalVector> t_;
  RationalVector obj_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Solves the LP exactly. Variables are shifted to their lower bounds and
/// finite upper bounds become extra rows; Bland's rule guarantees
/// termination on degenerate problems.
inline LpSolution SimplexSolve(const LinearProgram& lp) {
  const std::size_t nvar = lp.num_variables();
  const std::size_t norig = lp.num_rows();

  struct StdRow {
    std::vector<LpTerm> terms;
    Relation relation;
    Rational rhs;
    int sign;  // +1 kept, -1 negated
  };
  std::vector<StdRow> rows;
  rows.reserve(norig + nvar);
  for (const auto& row : lp.rows()) {
    Rational rhs = row.rhs;
    for (const auto& t : row.terms) rhs -= t.coef * lp.lower()[t.var];
    rows.push_back({row.terms, row.relation, std::move(rhs), 1});
  }
  std::vector<std::size_t> upper_row_of(nvar, SIZE_MAX);
  for (std::size_t j = 0; j < nvar; ++j) {
    if (lp.upper()[j]) {
      upper_row_of[j] = rows.size();
      rows.push_back({{{j, Rational(1)}}, Relation::kLessEqual, *lp.upper()[j] - lp.lower()[j], 1});
    }
  }
  for (auto& row : rows) {
    const bool flip = row.rhs < 0 || (row.rhs == 0 && row.relation == Relation::kGreaterEqual);
    if (!flip) continue;
    row.sign = -1;
    row.rhs = -row.rhs;
    for (auto& t : row.terms) t.coef = -t.coef;
    if (row.relation == Relation::kLessEqual) {
      row.relation = Relation::kGreaterEqual;
    } else if (row.relation == Relation::kGreaterEqual) {
      row.relation = Relation::kLessEqual;
    }
  }

  const std::size_t m = rows.size();
  std::size_t ncols = nvar;
  std::vector<std::size_t> slack_col(m, SIZE_MAX), art_col(m, SIZE_MAX), unit_col(m);
  for (std::size_t r = 0; r < m; ++r) {
    if (rows[r].relation != Relation::kEqual) slack_col[r] = ncols++;
  }
  const std::size_t first_artificial = ncols;
  for (std::size_t r = 0; r < m; ++r) {
    if (rows[r].relation != Relation::kLessEqual) art_col[r] = ncols++;
  }

  detail::Tableau tab(m, ncols);
  for (std::size_t r = 0; r < m; ++r) {
    for (const auto& t : rows[r].terms) tab.at(r, t.var) += t.coef;
    if (slack_col[r] != SIZE_MAX) {
      tab.at(r, slack_col[r]) = rows[r].relation == Relation::kLessEqual ? 1 : -1;
    }
    if (art_col[r] != SIZE_MAX) tab.at(r, art_col[r]) = 1;
    tab.rhs(r) = rows[r].rhs;
    unit_col[r] = art_col[r] != SIZE_MAX ? art_col[r] : slack_col[r];
    tab.basic(r) = unit_col[r];
  }

  LpSolution sol;
  std::vector<bool> allowed(ncols, true);
  if (first_artificial < ncols) {
    RationalVector phase1(ncols, Rational(0));
    for (std::size_t j = first_artificial; j < ncols; ++j) phase1[j] = 1;
    tab.PriceOut(phase1);
    tab.Run(allowed, sol.pivots);
    if (tab.Objective() > 0) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basic(r) < first_artificial) continue;
      for (std::size_t j = 0; j < first_artificial; ++j) {
        if (tab.at(r, j) != 0) {
          tab.Pivot(r, j);
          ++sol.pivots;
          break;
        }
      }
      // A row left with its artificial basic is redundant; the artificial
      // stays at zero and never re-enters.
    }
    for (std::size_t j = first_artificial; j < ncols; ++j) allowed[j] = false;
  }

  RationalVector phase2(ncols, Rational(0));
  const bool maximize = lp.sense() == Sense::kMaximize;
  for (std::size_t j = 0; j < nvar; ++j) phase2[j] = maximize ? Rational(-lp.cost()[j]) : lp.cost()[j];
  tab.PriceOut(phase2);
  if (!tab.Run(allowed, sol.pivots)) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  sol.status = LpStatus::kOptimal;
  sol.primal = lp.lower();
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basic(r);
    if (b < nvar) sol.primal[b] += tab.rhs(r);
  }
  sol.objective = 0;
  for (std::size_t j = 0; j < nvar; ++j) sol.objective += lp.cost()[j] * sol.primal[j];

  // y = c_B B^-1; column unit_col[r] of the current tableau is B^-1 e_r.
  RationalVector y(m, Rational(0));
  for (std::size_t r = 0; r < m; ++r) {
    Rational acc = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const Rational& cb = phase2[tab.basic(i)];
      if (cb != 0 && tab.at(i, unit_col[r]) != 0) acc += cb * tab.at(i, unit_col[r]);
    }
    y[r] = rows[r].sign * acc;
    if (maximize) y[r] = -y[r];
  }
  sol.row_duals.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(norig));
  sol.reduced_costs.resize(nvar);
  for (std::size_t j = 0; j < nvar; ++j) sol.reduced_costs[j] = lp.cost()[j];
  for (std::size_t r = 0; r < norig; ++r) {
    if (sol.row_duals[r] == 0) continue;
    for (const auto& t : lp.rows()[r].terms) sol.reduced_costs[t.var] -= sol.row_duals[r] * t.coef;
  }
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t b = tab.basic(r);
    if (b < nvar) {
      sol.basis.push_back(lp.variable_names()[b]);
    } else if (b < first_artificial) {
      sol.basis.push_back("slack:" + (r < norig ? lp.rows()[r].name : std::string("ub")));
    } else {
      sol.basis.push_back("artificial:" + (r < norig ? lp.rows()[r].name : std::string("ub")));
    }
  }
  (void)upper_row_of;
  return sol;
}

struct OptimalityCheck {
  bool primal_feasible = true;
  bool dual_signs_ok = true;
  bool row_complementary_slackness = true;
  bool variable_complementary_slackness = true;
  bool strong_duality = true;
  Rational dual_objective;
  std::vector<std::string> failures;

  bool ok() const {
    return primal_feasible && dual_signs_ok && row_complementary_slackness &&
           variable_complementary_slackness && strong_duality;
  }
};

/// Independent exact check of a primal/dual pair: feasibility, dual signs,
/// complementary slackness on rows and bounds, and equal objective values.
inline OptimalityCheck CheckOptimality(const LinearProgram& lp, const LpSolution& sol) {
  OptimalityCheck out;
  if (!sol.optimal()) throw Error(ErrorCode::kNotOptimal, "solution is not optimal");
  const bool maximize = lp.sense() == Sense::kMaximize;
  // Relaxing a <= row helps a max problem and cannot hurt it.
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.rows()[r];
    const Rational activity = lp.RowActivity(r, sol.primal);
    const Rational gap = activity - row.rhs;
    const Rational& y = sol.row_duals[r];
    bool feasible = true;
    bool sign_ok = true;
    switch (row.relation) {
      case Relation::kLessEqual:
        feasible = gap <= 0;
        sign_ok = maximize ? y >= 0 : y <= 0;
        break;
      case Relation::kGreaterEqual:
        feasible = gap >= 0;
        sign_ok = maximize ? y <= 0 : y >= 0;
        break;
      case Relation::kEqual:
        feasible = gap == 0;
        break;
    }
    if (!feasible) {
      out.primal_feasible = false;
      out.failures.push_back("row " + row.name + " violated");
    }
    if (!sign_ok) {
      out.dual_signs_ok = false;
      out.failures.push_back("row " + row.name + " dual has wrong sign");
    }
    if (y * gap != 0) {
      out.row_complementary_slackness = false;
      out.failures.push_back("row " + row.name + " dual nonzero on slack row");
    }
  }
  Rational dual_obj = 0;
  for (std::size_t r = 0; r < lp.num_rows(); ++r) dual_obj += sol.row_duals[r] * lp.rows()[r].rhs;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    const Rational& x = sol.primal[j];
    const Rational& d = sol.reduced_costs[j];
    const bool at_lower = x == lp.lower()[j];
    const bool at_upper = lp.upper()[j] && x == *lp.upper()[j];
    if (x < lp.lower()[j] || (lp.upper()[j] && x > *lp.upper()[j])) {
      out.primal_feasible = false;
      out.failures.push_back("variable " + lp.variable_names()[j] + " out of bounds");
    }
    // For a min problem a variable resting on its lower bound needs d >= 0.
    const Rational oriented = maximize ? Rational(-d) : d;
    bool ok = true;
    if (at_lower && at_upper) {
      ok = true;
    } else if (at_lower) {
      ok = oriented >= 0;
    } else if (at_upper) {
      ok = oriented <= 0;
    } else {
      ok = d == 0;
    }
    if (!ok) {
      out.variable_complementary_slackness = false;
      out.failures.push_back("variable " + lp.variable_names()[j] + " reduced cost inconsistent");
    }
    if (d != 0) dual_obj += d * (at_lower ? lp.lower()[j] : x);
  }
  out.dual_objective = dual_obj;
  Rational primal_obj = 0;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) primal_obj += lp.cost()[j] * sol.primal[j];
  if (primal_obj != dual_obj || primal_obj != sol.objective) {
    out.strong_duality = false;
    out.failures.push_back("primal " + ToString(primal_obj) + " != dual " + ToString(dual_obj));
  }
  return out;
}

/// Free-form MPS-like dump for debugging; not a standard format.
inline void WriteLpDump(std::ostream& os, const LinearProgram& lp) {
  os << "NAME lotto\n";
  os << "SENSE " << (lp.sense() == Sense::kMaximize ? "MAX" : "MIN") << "\n";
  os << "ROWS\n";
  for (const auto& row : lp.rows()) {
    const char* rel = row.relation == Relation::kLessEqual ? "L"
                      : row.relation == Relation::kEqual   ? "E"
                                                           : "G";
    os << " " << rel << " " << row.name << "\n";
  }
  os << "COLUMNS\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    os << " " << lp.variable_names()[j] << " OBJ " << ToString(lp.cost()[j]) << "\n";
    for (const auto& row : lp.rows()) {
      for (const auto& t : row.terms) {
        if (t.var == j) os << " " << lp.variable_names()[j] << " " << row.name << " " << ToString(t.coef) << "\n";
      }
    }
  }
  os << "RHS\n";
  for (const auto& row : lp.rows()) os << " RHS " << row.name << " " << ToString(row.rhs) << "\n";
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    os << " LO " << lp.variable_names()[j] << " " << ToString(lp.lower()[j]) << "\n";
    if (lp.upper()[j]) os << " UP " << lp.variable_names()[j] << " " << ToString(*lp.upper()[j]) << "\n";
  }
  os << "ENDATA\n";
}

inline std::string LpDumpString(const LinearProgram& lp) {
  std::ostringstream os;
  WriteLpDump(os, lp);
  return os.str();
}

}  // namespace lotto
