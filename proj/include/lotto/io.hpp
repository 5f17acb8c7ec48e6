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

// JSON and CSV serialization. Rationals travel as "p/q" strings; plain
// integers (string or number) are accepted on input.

#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lotto/designer_lp.hpp"
#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/optimizer.hpp"
#include "lotto/ordinal.hpp"
#include "lotto/rational.hpp"
#include "lotto/simplex.hpp"
#include "lotto/transform.hpp"

namespace lotto {

using Json = nlohmann::ordered_json;

inline Json LoadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

namespace detail {

inline const Json& Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParseError, std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

}  // namespace detail

inline Rational RationalFromJson(const Json& j) {
  if (j.is_string()) return ParseRational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long>());
  throw Error(ErrorCode::kParseError, "expected a rational string, got " + j.dump());
}

inline Json RationalToJson(const Rational& r) { return ToString(r); }

inline RationalVector VectorFromJson(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kParseError, "expected an array, got " + j.dump());
  RationalVector out;
  for (const auto& e : j) out.push_back(RationalFromJson(e));
  return out;
}

inline Json VectorToJson(const RationalVector& v) {
  Json out = Json::array();
  for (const auto& r : v) out.push_back(RationalToJson(r));
  return out;
}

inline Json MatrixToJson(const RationalMatrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(RationalToJson(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Instance InstanceFromJson(const Json& j) {
  const Json& n = detail::Field(j, "n");
  if (!n.is_number_integer() || n.get<long>() < 0) throw Error(ErrorCode::kParseError, "n must be an integer");
  return Instance::Create(n.get<std::size_t>(), VectorFromJson(detail::Field(j, "f")),
                          VectorFromJson(detail::Field(j, "g")),
                          RationalFromJson(detail::Field(j, "D")));
}

inline Json InstanceToJson(const Instance& inst) {
  return Json{{"n", inst.n()}, {"f", VectorToJson(inst.f())}, {"g", VectorToJson(inst.g())},
              {"D", RationalToJson(inst.d())}};
}

/// {"a": [[row k], ...]} with rows indexed by position.
inline DirectMechanism MechanismFromJson(const Json& j) {
  const Json& a = detail::Field(j, "a");
  if (!a.is_array()) throw Error(ErrorCode::kParseError, "\"a\" must be an array of rows");
  const std::size_t n = a.size();
  DirectMechanism mech(n);
  for (std::size_t k = 0; k < n; ++k) {
    const RationalVector row = VectorFromJson(a[k]);
    if (row.size() != n) throw Error(ErrorCode::kDimensionMismatch, "mechanism must be square");
    for (std::size_t i = 0; i < n; ++i) mech(k, i) = row[i];
  }
  return mech;
}

inline Json MechanismToJson(const DirectMechanism& mech) {
  return Json{{"a", MatrixToJson(mech.matrix())}};
}

inline Objective ObjectiveFromJson(const Json& j) {
  const Json& kind_field = detail::Field(j, "kind");
  if (!kind_field.is_string()) throw Error(ErrorCode::kParseError, "objective kind must be a string");
  const std::string kind = kind_field.get<std::string>();
  if (kind == "fill") return FillObjective{};
  if (kind == "linear") return MakeLinear(VectorFromJson(detail::Field(j, "weights")));
  if (kind == "concave") {
    return MakeConcave(VectorFromJson(detail::Field(j, "weights")),
                       RationalFromJson(detail::Field(j, "rho")));
  }
  throw Error(ErrorCode::kParseError, "unknown objective kind " + kind);
}

/// Accepts {"s": [...]} or a bare array.
inline PositionMasses MassesFromJson(const Json& j) {
  return PositionMasses{VectorFromJson(j.is_array() ? j : detail::Field(j, "s"))};
}

inline Json MassesToJson(const PositionMasses& s) {
  return Json{{"s", VectorToJson(s.s)}, {"total", RationalToJson(s.Total())}};
}

inline Json LotteryToJson(const CommonLottery& cl) {
  return Json{{"c", VectorToJson(cl.c)}, {"total", RationalToJson(cl.Total())}};
}

inline OrdinalInstance OrdinalInstanceFromJson(const Json& j) {
  std::vector<std::string> gammas;
  for (const auto& g : detail::Field(j, "Gamma")) gammas.push_back(g.get<std::string>());
  std::vector<RationalVector> utility;
  for (const auto& row : detail::Field(j, "u")) utility.push_back(VectorFromJson(row));
  return OrdinalInstance::Create(VectorFromJson(detail::Field(j, "Q")),
                                 VectorFromJson(detail::Field(j, "hQ")), std::move(gammas),
                                 VectorFromJson(detail::Field(j, "hGamma")), std::move(utility),
                                 VectorFromJson(detail::Field(j, "g")),
                                 RationalFromJson(detail::Field(j, "D")));
}

inline Json ConvexityToJson(const ConvexityReport& r) {
  return Json{{"second_differences", VectorToJson(r.second_differences)},
              {"is_convex", r.is_convex},
              {"is_strictly_convex", r.is_strictly_convex},
              {"violation_indices", r.violation_indices}};
}

inline std::string IcLabel(std::size_t i, std::size_t j) {
  return "IC_{" + std::to_string(i) + "," + std::to_string(j) + "}";
}

inline Json IcSetToJson(const std::set<IcPair>& pairs) {
  Json out = Json::array();
  for (const auto& [i, j] : pairs) out.push_back(IcLabel(i, j));
  return out;
}

inline Json FeasibilityToJson(const FeasibilityReport& r) {
  return Json{{"is_feasible", r.is_feasible},
              {"ex_post_ir_ok", r.ex_post_ir_ok},
              {"nonnegative_ok", r.nonnegative_ok},
              {"mon_ok", r.mon_ok},
              {"participation", VectorToJson(r.participation)},
              {"position_slack", VectorToJson(r.position_slack)},
              {"agent_slack", VectorToJson(r.agent_slack)},
              {"violated_ics", IcSetToJson(r.violated_ics)},
              {"binding_ics", IcSetToJson(r.binding_ics)},
              {"redundant_ics", IcSetToJson(r.redundant_ics)},
              {"ic_slack", MatrixToJson(r.ic_slack)}};
}

inline Json DecompositionToJson(const DecompositionReport& r) {
  return Json{{"common_term", RationalToJson(r.common_term)},
              {"info_term", RationalToJson(r.info_term)},
              {"p_theta0", RationalToJson(r.p_theta0)},
              {"residual", RationalToJson(r.residual)}};
}

inline Json LpSolutionToJson(const LinearProgram& lp, const LpSolution& sol) {
  Json out{{"status", LpStatusName(sol.status)}, {"pivots", sol.pivots}};
  if (!sol.optimal()) return out;
  out["objective"] = RationalToJson(sol.objective);
  Json primal = Json::object();
  for (const auto& [name, v] : sol.PrimalByName(lp)) primal[name] = RationalToJson(v);
  Json duals = Json::object();
  for (std::size_t r = 0; r < lp.num_rows(); ++r) duals[lp.rows()[r].name] = RationalToJson(sol.row_duals[r]);
  out["primal"] = std::move(primal);
  out["duals"] = std::move(duals);
  out["basis"] = sol.basis;
  return out;
}

/// Matrix CSV with a header row of type indices; one line per position.
inline void WriteMatrixCsv(std::ostream& os, const RationalMatrix& m) {
  os << "k";
  for (std::size_t i = 0; i < m.cols(); ++i) os << ',' << i;
  os << '\n';
  for (std::size_t k = 0; k < m.rows(); ++k) {
    os << k;
    for (std::size_t i = 0; i < m.cols(); ++i) os << ',' << ToString(m(k, i));
    os << '\n';
  }
}

}  // namespace lotto
