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

// Command-line front end. Dispatch() takes argv without the program name,
// writes JSON (or CSV) to `out` and diagnostics to `err`, and returns the
// process exit code: 0 success, 1 a negative finding (infeasible
// mechanism, no improvement, failed convexity requirement), 2 bad input.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lotto/converse.hpp"
#include "lotto/crp.hpp"
#include "lotto/designer_lp.hpp"
#include "lotto/instance.hpp"
#include "lotto/io.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/optimizer.hpp"
#include "lotto/simplex.hpp"
#include "lotto/transform.hpp"

#ifndef LOTTO_FIXTURE_DIR
#define LOTTO_FIXTURE_DIR "fixtures"
#endif

namespace lotto {
namespace cli {

inline constexpr int kOk = 0;
inline constexpr int kNegative = 1;
inline constexpr int kBadInput = 2;

inline int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleInput:
    case ErrorCode::kInfeasibleMasses:
    case ErrorCode::kPreconditionViolation:
    case ErrorCode::kConvexityHypothesisFailed:
      return kNegative;
    default:
      return kBadInput;
  }
}

struct Reproduction {
  Json rows = Json::array();
  bool all_match = true;

  void Add(const std::string& quantity, const Json& computed, const Json& expected) {
    const bool match = computed == expected;
    all_match = all_match && match;
    rows.push_back(Json{{"quantity", quantity}, {"computed", computed}, {"expected", expected}, {"match", match}});
  }
};

inline Rational FillOf(const Instance& inst, const DirectMechanism& mech) {
  return GetPositionMasses(inst, mech).Total();
}

inline Json ReproduceFigure(const std::string& name, const std::string& dir) {
  const Json fx = LoadJsonFile((std::filesystem::path(dir) / (name + ".json")).string());
  Reproduction rep;
  auto mech = [&](const char* key) { return MechanismFromJson(fx.at("mechanisms").at(key)); };
  const Json& expected = fx.contains("expected") ? fx.at("expected") : Json::object();

  if (name == "fig1") {
    const Instance inst = InstanceFromJson(fx.at("instance"));
    const DirectMechanism uniform = mech("uniform_lottery");
    const DirectMechanism optimal = mech("optimal_common_lottery");
    rep.Add("uniform lottery feasible", IsFeasible(inst, uniform), true);
    rep.Add("uniform lottery fill", ToString(FillOf(inst, uniform)), expected.at("uniform_lottery_fill"));
    rep.Add("optimal common lottery feasible", IsFeasible(inst, optimal), true);
    rep.Add("optimal common lottery fill", ToString(FillOf(inst, optimal)),
            expected.at("optimal_common_lottery_fill"));
    const FillLottery fill = OptimalLotteryFill(inst);
    rep.Add("closed-form optimal lottery", VectorToJson(fill.lottery.c), expected.at("optimal_lottery"));
    rep.Add("expanded closed-form lottery equals figure", ExpandCommonLottery(inst, fill.lottery) == optimal, true);
    rep.Add("designer LP fill", ToString(SolveDesigner(inst, FillObjective{}).value),
            expected.at("optimal_common_lottery_fill"));
  } else if (name == "fig2") {
    const Instance inst = InstanceFromJson(fx.at("instance"));
    for (const char* key : {"binary_menu", "ceei"}) {
      const DirectMechanism m = mech(key);
      rep.Add(std::string(key) + " feasible", IsFeasible(inst, m), true);
      rep.Add(std::string(key) + " fill", ToString(FillOf(inst, m)), expected.at(std::string(key) + "_fill"));
    }
  } else if (name == "fig3") {
    const Instance inst = InstanceFromJson(fx.at("instance"));
    const FeasibilityReport r = GetFeasibilityReport(inst, mech("local_ic_only"));
    rep.Add("violated IC constraints", IcSetToJson(r.violated_ics), expected.at("violated_ics"));
    bool local_ok = true;
    for (std::size_t i = 0; i + 1 < inst.n(); ++i) {
      local_ok = local_ok && r.ic_slack(i, i + 1) >= 0 && r.ic_slack(i + 1, i) >= 0;
    }
    rep.Add("local IC constraints hold", local_ok, true);
    rep.Add("feasible", r.is_feasible, false);
  } else if (name == "fig4") {
    const Instance inst = InstanceFromJson(fx.at("instance"));
    rep.Add("second differences of 1/F", VectorToJson(GetConvexityReport(inst).second_differences),
            expected.at("second_differences"));
    const FillLottery fill = OptimalLotteryFill(inst);
    rep.Add("closed-form optimal lottery", VectorToJson(fill.lottery.c), expected.at("optimal_lottery"));
    rep.Add("common lottery fill", ToString(FillOf(inst, mech("common_lottery"))),
            expected.at("common_lottery_fill"));
    rep.Add("closed-form lottery fill", ToString(FillOf(inst, ExpandCommonLottery(inst, fill.lottery))),
            expected.at("common_lottery_fill"));
    rep.Add("binary menu feasible", IsFeasible(inst, mech("binary_menu")), true);
    rep.Add("binary menu fill", ToString(FillOf(inst, mech("binary_menu"))), expected.at("binary_menu_fill"));
    rep.Add("designer LP fill", ToString(SolveDesigner(inst, FillObjective{}).value),
            expected.at("designer_lp_fill"));
  } else if (name == "appendixA1") {
    const Json& fam = fx.at("family");
    const RationalVector base = VectorFromJson(fam.at("f_base"));
    const RationalVector slope = VectorFromJson(fam.at("f_slope"));
    const DirectMechanism menu = MechanismFromJson(fx.at("binary_menu"));
    for (const auto& c : fx.at("cases")) {
      const Rational eps = RationalFromJson(c.at("epsilon"));
      RationalVector f(base.size());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = base[i] + eps * slope[i];
      const Instance inst = Instance::Create(fam.at("n").get<std::size_t>(), f, VectorFromJson(fam.at("g")),
                                             RationalFromJson(fam.at("D")));
      const std::string tag = "eps=" + ToString(eps) + " ";
      const Rational lottery_value = FillOf(inst, ExpandCommonLottery(inst, OptimalLotteryFill(inst).lottery));
      rep.Add(tag + "common lottery fill", ToString(lottery_value), c.at("common_lottery_fill"));
      rep.Add(tag + "binary menu feasible", IsFeasible(inst, menu), true);
      rep.Add(tag + "binary menu fill", ToString(FillOf(inst, menu)), c.at("binary_menu_fill"));
    }
  } else {
    throw Error(ErrorCode::kParseError, "unknown figure " + name);
  }
  return Json{{"figure", name}, {"rows", rep.rows}, {"all_match", rep.all_match}};
}

inline int Dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact workbench for common lotteries and no-transfer assignment mechanisms", "lotto_cli"};
  app.require_subcommand(1);
  std::string format = "json";
  app.add_option("--format", format, "Output format for matrices")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string primary, instance_path, objective_path, targets_path, caps_path, dump_path, d_text;
  std::string fixtures = LOTTO_FIXTURE_DIR;
  bool require = false;
  std::size_t agents = 0, reps = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  auto* validate = app.add_subcommand("validate", "Validate an instance");
  validate->add_option("instance", primary)->required();

  auto* check = app.add_subcommand("check", "Check a mechanism against an instance");
  check->add_option("mechanism", primary)->required();
  check->add_option("--instance", instance_path)->required();

  auto* convexity = app.add_subcommand("convexity", "Second differences of 1/F");
  convexity->add_option("instance", primary)->required();
  convexity->add_flag("--require", require, "Exit 1 unless 1/F is convex");

  auto* lottery = app.add_subcommand("optimal-lottery", "Optimal common lottery for an objective");
  lottery->add_option("instance", primary)->required();
  lottery->add_option("--objective", objective_path)->required();
  lottery->add_flag("--require-convex", require, "Exit 1 unless 1/F is convex");

  auto* solve = app.add_subcommand("solve-lp", "Solve the designer LP exactly");
  solve->add_option("instance", primary)->required();
  solve->add_option("--objective", objective_path)->required();
  solve->add_option("--dump", dump_path, "Write the LP in MPS-like text");

  auto* transform = app.add_subcommand("transform", "Common-lottery transform and decomposition");
  transform->add_option("mechanism", primary)->required();
  transform->add_option("--instance", instance_path)->required();

  auto* min_mass = app.add_subcommand("min-mass", "Minimum agent mass for target position masses");
  min_mass->add_option("instance", primary)->required();
  min_mass->add_option("--targets", targets_path)->required();

  auto* perturb = app.add_subcommand("perturb", "Search for an improving perturbation");
  perturb->add_option("instance", primary)->required();
  perturb->add_option("--D", d_text, "Pin the agent mass");
  perturb->add_option("--objective", objective_path);

  auto* simulate = app.add_subcommand("simulate-crp", "Finite-market capped random priority");
  simulate->add_option("instance", primary)->required();
  simulate->add_option("--caps", caps_path)->required();
  simulate->add_option("--agents", agents)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--reps", reps)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--threads", threads);

  auto* reproduce = app.add_subcommand("reproduce", "Recompute a figure from its fixture");
  reproduce->add_option("figure", primary)
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "appendixA1"}));
  reproduce->add_option("--fixtures", fixtures, "Fixture directory");

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }
  const bool csv = format == "csv";
  auto load_instance = [](const std::string& path) { return InstanceFromJson(LoadJsonFile(path)); };
  auto emit = [&out](const Json& j) { out << j.dump(2) << '\n'; };

  try {
    if (*validate) {
      const Instance inst = load_instance(primary);
      emit(Json{{"valid", true}, {"instance", InstanceToJson(inst)}, {"cdf", VectorToJson(inst.cdf())}});
      return kOk;
    }
    if (*check) {
      const Instance inst = load_instance(instance_path);
      const FeasibilityReport r = GetFeasibilityReport(inst, MechanismFromJson(LoadJsonFile(primary)));
      if (csv) {
        WriteMatrixCsv(out, r.ic_slack);
      } else {
        Json j = FeasibilityToJson(r);
        j["position_masses"] = VectorToJson(GetPositionMasses(inst, MechanismFromJson(LoadJsonFile(primary))).s);
        emit(j);
      }
      for (const auto& [i, j] : r.violated_ics) err << "violated " << IcLabel(i, j) << '\n';
      return r.is_feasible ? kOk : kNegative;
    }
    if (*convexity) {
      const ConvexityReport r = GetConvexityReport(load_instance(primary));
      emit(ConvexityToJson(r));
      return require && !r.is_convex ? kNegative : kOk;
    }
    if (*lottery) {
      const Instance inst = load_instance(primary);
      const Objective obj = ObjectiveFromJson(LoadJsonFile(objective_path));
      const MassesResult res = OptimalMasses(inst, obj);
      Json j{{"masses", MassesToJson(res.masses)}, {"convexity_warning", res.convexity_warning}};
      if (const auto* concave = std::get_if<ConcaveObjective>(&obj)) {
        j["masses_approx"] = res.approx;
        j["lambda"] = res.lambda.value_or(0.0);
        j["value_approx"] = res.value.approx;
        const KktReport kkt = KktCheck(inst, *concave, res.approx, 1e-10);
        j["kkt_ok"] = kkt.ok;
      } else {
        CommonLottery cl;
        for (std::size_t k = 0; k < inst.n(); ++k) cl.c.push_back(res.masses.s[k] / (inst.d() * inst.cdf()[k]));
        j["lottery"] = LotteryToJson(cl);
        j["value"] = RationalToJson(*res.value.exact);
        if (std::holds_alternative<FillObjective>(obj)) j["cutoff"] = OptimalLotteryFill(inst).cutoff;
      }
      if (res.convexity_warning) err << "warning: 1/F is not convex; result is the best common lottery only\n";
      emit(j);
      return require && res.convexity_warning ? kNegative : kOk;
    }
    if (*solve) {
      const Instance inst = load_instance(primary);
      const DesignerSolution sol = SolveDesigner(inst, ObjectiveFromJson(LoadJsonFile(objective_path)));
      if (!dump_path.empty()) {
        std::ofstream dump(dump_path);
        WriteLpDump(dump, sol.lp);
      }
      if (csv) {
        WriteMatrixCsv(out, sol.mechanism.matrix());
        return kOk;
      }
      const OptimalityCheck certificate = CheckOptimality(sol.lp, sol.lp_solution);
      emit(Json{{"value", RationalToJson(sol.value)},
                {"mechanism", MechanismToJson(sol.mechanism)},
                {"position_masses", VectorToJson(GetPositionMasses(inst, sol.mechanism).s)},
                {"certificate_ok", certificate.ok()},
                {"lp", LpSolutionToJson(sol.lp, sol.lp_solution)}});
      return kOk;
    }
    if (*transform) {
      const Instance inst = load_instance(instance_path);
      const DirectMechanism mech = MechanismFromJson(LoadJsonFile(primary));
      if (!IsFeasible(inst, mech)) {
        err << "mechanism is not feasible\n";
        return kNegative;
      }
      const TransformResult t = ToCommonLottery(inst, mech);
      const bool preserved = GetPositionMasses(inst, mech).s ==
                             CapsFromLottery(inst, t.lottery).s;
      emit(Json{{"lottery", LotteryToJson(t.lottery)},
                {"overflow", t.overflow},
                {"masses_preserved", preserved},
                {"decomposition", DecompositionToJson(VerifyDecomposition(inst, mech))}});
      return kOk;
    }
    if (*min_mass) {
      const Instance inst = load_instance(primary);
      const MinMassSolution sol = SolveMinMass(inst, MassesFromJson(LoadJsonFile(targets_path)));
      const DualCertificate cert = MakeDualCertificate(inst, sol.lp, sol.lp_solution);
      Json entries = Json::object();
      for (const auto& e : cert.entries) {
        entries[e.row] = Json{{"solver", RationalToJson(e.solver_dual)}, {"closed_form", RationalToJson(e.conjectured)}};
      }
      emit(Json{{"min_mass", RationalToJson(sol.min_mass)},
                {"certificate_ok", cert.check.ok()},
                {"closed_form_dual_feasible", cert.conjecture_dual_feasible},
                {"negative_closed_form", cert.negative_conjectured},
                {"pos_duals_match_closed_form", cert.pos_duals_match},
                {"duals", entries}});
      return kOk;
    }
    if (*perturb) {
      const Instance inst = load_instance(primary);
      const Objective obj = objective_path.empty() ? Objective{FillObjective{}}
                                                   : ObjectiveFromJson(LoadJsonFile(objective_path));
      std::optional<Rational> pinned;
      if (!d_text.empty()) pinned = ParseRational(d_text);
      const ImproveResult r = AutoImprove(inst, obj, pinned);
      if (!r.improvement) {
        err << "no improvement: " << r.diagnostic << '\n';
        emit(Json{{"improved", false}, {"diagnostic", r.diagnostic}});
        return kNegative;
      }
      const Improvement& m = *r.improvement;
      if (csv) {
        WriteMatrixCsv(out, m.mechanism.matrix());
        return kOk;
      }
      emit(Json{{"improved", true},
                {"D", RationalToJson(m.d)},
                {"k", m.k},
                {"i", m.i},
                {"fill_index", m.fill_index},
                {"epsilon", RationalToJson(m.epsilon)},
                {"delta", RationalToJson(m.delta)},
                {"gain", RationalToJson(m.gain)},
                {"base_lottery", LotteryToJson(m.base)},
                {"mechanism", MechanismToJson(m.mechanism)}});
      return kOk;
    }
    if (*simulate) {
      const Instance inst = load_instance(primary);
      const PositionMasses caps = MassesFromJson(LoadJsonFile(caps_path));
      const CrpResult analytic = ContinuumCrp(inst, caps);
      const SimulationResult sim = SimulateFinite(inst, caps, agents, reps, seed, threads);
      if (csv) {
        WriteSimulationCsv(out, sim, analytic.allocation);
        return kOk;
      }
      Json thresholds = Json::array();
      for (const auto& t : analytic.thresholds) {
        thresholds.push_back(Json{{"step", t.step}, {"cutoff", RationalToJson(t.cutoff)},
                                  {"position", t.position}, {"exhausted", t.exhausted}});
      }
      emit(Json{{"quotas", sim.quotas},
                {"probability", sim.probability},
                {"stderr", sim.standard_error},
                {"analytic", MatrixToJson(analytic.allocation.matrix())},
                {"thresholds", thresholds},
                {"max_deviation", MaxDeviation(sim, analytic.allocation)}});
      return kOk;
    }
    if (*reproduce) {
      const Json j = ReproduceFigure(primary, fixtures);
      emit(j);
      if (!j.at("all_match").get<bool>()) err << "mismatch against reported values\n";
      return j.at("all_match").get<bool>() ? kOk : kNegative;
    }
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const Json::exception& e) {
    err << "error [ParseError]: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}

}  // namespace cli
}  // namespace lotto
