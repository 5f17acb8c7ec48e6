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

#include <gtest/gtest.h>

#include <random>

#include "lotto/mechanism.hpp"
#include "test_support.hpp"

namespace lotto {
namespace {

using testing::Q;

// Utility difference computed straight from the definition with explicit
// grid points.
Rational IcOracle(const Instance& inst, const DirectMechanism& a, std::size_t i, std::size_t j) {
  Rational total = 0;
  for (std::size_t k = i; k < inst.n(); ++k) {
    total += (inst.GridPoint(k) - inst.GridPoint(i)) * (a(k, i) - a(k, j));
  }
  return total;
}

TEST(MechanismTest, Fig3IcSlacks) {
  const Instance inst = testing::Uniform(4, Q(1, 2));
  const DirectMechanism m = testing::FixtureMechanism("fig3", "local_ic_only");
  EXPECT_EQ(IcSlack(inst, m, 2, 0), (1 - Q(2, 3)) * (Q(2, 5) - Q(3, 5)));
  EXPECT_EQ(IcSlack(inst, m, 2, 0), Q(-1, 15));
  EXPECT_EQ(IcSlack(inst, m, 1, 2), Q(1, 5));
  EXPECT_THROW(IcSlack(inst, m, 1, 1), Error);
  EXPECT_THROW(IcSlack(inst, m, 1, 4), Error);
}

TEST(MechanismTest, IcSlackMatchesDefinition) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testing::Draw(rng, 2, 6));
    const Instance inst = testing::RandomInstance(rng, n);
    const DirectMechanism m = testing::RandomSupportedMatrix(rng, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) {
          EXPECT_EQ(IcSlack(inst, m, i, j), IcOracle(inst, m, i, j));
        }
      }
    }
  }
}

TEST(MechanismTest, Fig1bUniformLotteryIsFeasible) {
  const Instance inst = testing::Uniform(4);
  const FeasibilityReport r = GetFeasibilityReport(inst, testing::FixtureMechanism("fig1", "uniform_lottery"));
  EXPECT_TRUE(r.is_feasible);
  EXPECT_EQ(r.participation, (RationalVector{1, Q(3, 4), Q(1, 2), Q(1, 4)}));
  EXPECT_TRUE(r.mon_ok);
}

TEST(MechanismTest, Fig3FlagsOnlyTheGlobalDownwardConstraint) {
  const FeasibilityReport r =
      GetFeasibilityReport(testing::Uniform(4, Q(1, 2)), testing::FixtureMechanism("fig3", "local_ic_only"));
  EXPECT_FALSE(r.is_feasible);
  EXPECT_EQ(r.violated_ics, (std::set<IcPair>{{2, 0}}));
  for (const auto& v : r.position_slack) EXPECT_GE(v, 0);
  for (const auto& v : r.agent_slack) EXPECT_GE(v, 0);
}

TEST(MechanismTest, ZeroMechanismIsFeasible) {
  const FeasibilityReport r = GetFeasibilityReport(testing::Uniform(4), DirectMechanism(4));
  EXPECT_TRUE(r.is_feasible);
  for (const auto& p : r.participation) EXPECT_EQ(p, 0);
}

TEST(MechanismTest, RedundantSetMatchesStructure) {
  const FeasibilityReport r = GetFeasibilityReport(testing::Uniform(4), DirectMechanism(4));
  std::set<IcPair> expected;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j && (i == 3 || j >= i + 2)) expected.insert({i, j});
    }
  }
  EXPECT_EQ(r.redundant_ics, expected);
}

TEST(MechanismTest, DimensionMismatchIsReported) {
  try {
    GetFeasibilityReport(testing::Uniform(4), DirectMechanism(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(MechanismTest, ExPostIrViolationIsFlagged) {
  DirectMechanism m(3);
  m(0, 2) = Q(1, 2);
  const FeasibilityReport r = GetFeasibilityReport(testing::Fig4Instance(), m);
  EXPECT_FALSE(r.ex_post_ir_ok);
  EXPECT_FALSE(r.is_feasible);
}

TEST(MechanismTest, PositionMassesOfKnownMechanisms) {
  const Instance inst = testing::Uniform(4);
  EXPECT_EQ(GetPositionMasses(inst, testing::FixtureMechanism("fig1", "optimal_common_lottery")).s,
            (RationalVector{0, Q(5, 12) * Q(1, 2), Q(1, 3) * Q(3, 4), Q(1, 4)}));
  EXPECT_EQ(GetPositionMasses(inst, testing::FixtureMechanism("fig2", "ceei")).Total(), Q(11, 16));
  EXPECT_EQ(GetPositionMasses(inst, DirectMechanism(4)).Total(), 0);
}

TEST(ObjectiveTest, EvaluatesFamilies) {
  const Instance inst = testing::Uniform(4);
  const PositionMasses uniform = GetPositionMasses(inst, testing::FixtureMechanism("fig1", "uniform_lottery"));
  const PositionMasses optimal = GetPositionMasses(inst, testing::FixtureMechanism("fig1", "optimal_common_lottery"));
  EXPECT_EQ(*EvaluateObjective(FillObjective{}, uniform).exact, Q(5, 8));
  EXPECT_EQ(*EvaluateObjective(FillObjective{}, optimal).exact, Q(17, 24));
  EXPECT_EQ(*EvaluateObjective(MakeLinear(RationalVector(4, 0)), optimal).exact, 0);
  const ObjectiveValue concave = EvaluateObjective(MakeConcave(RationalVector(4, 1), Q(1, 2)), optimal);
  EXPECT_FALSE(concave.exact.has_value());
  EXPECT_NEAR(concave.approx, std::sqrt(5.0 / 24) + 2 * std::sqrt(0.25), 1e-12);
  EXPECT_THROW(MakeConcave(RationalVector(4, 1), 1), Error);
  EXPECT_THROW(MakeConcave(RationalVector(4, -1), Q(1, 2)), Error);
}

TEST(ObjectiveTest, FillIsBilinearInMatrixEntries) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testing::Draw(rng, 2, 7));
    const Instance inst = testing::RandomInstance(rng, n);
    const DirectMechanism m = testing::RandomSupportedMatrix(rng, n);
    Rational total = 0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) total += inst.d() * inst.f()[i] * m(k, i);
    }
    EXPECT_EQ(*EvaluateObjective(FillObjective{}, GetPositionMasses(inst, m)).exact, total);
  }
}

TEST(MonTest, ProfilesAndFlags) {
  const Instance inst = testing::Uniform(4);
  const MonProfile p = GetMonProfile(inst, testing::FixtureMechanism("fig1", "optimal_common_lottery"));
  EXPECT_EQ(p.participation, (RationalVector{1, 1, Q(7, 12), Q(1, 4)}));
  EXPECT_TRUE(p.non_increasing);
  DirectMechanism raw(4);
  raw(3, 3) = 1;
  EXPECT_FALSE(GetMonProfile(inst, raw).non_increasing);
}

TEST(MonTest, FeasibleVerticesAreMonotone) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = testing::RandomInstance(rng, static_cast<std::size_t>(testing::Draw(rng, 2, 6)));
    const DirectMechanism v = testing::RandomLpVertex(rng, inst);
    ASSERT_TRUE(IsFeasible(inst, v));
    EXPECT_TRUE(GetMonProfile(inst, v).non_increasing);
  }
}

TEST(MonTest, LocalUpwardAndMonImplyRedundantConstraints) {
  // Common lotteries and LP vertices satisfy local upward ICs and MON; the
  // redundant family must then hold automatically.
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = static_cast<std::size_t>(testing::Draw(rng, 3, 6));
    const Instance inst = testing::RandomInstance(rng, n);
    const DirectMechanism v = trial % 2 == 0 ? testing::RandomLpVertex(rng, inst)
                                             : ExpandCommonLottery(inst, testing::RandomFeasibleLottery(rng, inst));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && IsRedundantIc(n, i, j)) {
          EXPECT_GE(IcSlack(inst, v, i, j), 0);
        }
      }
    }
  }
}

TEST(ClassifyTest, OptimalCommonLotteryBindsAllRelevantConstraints) {
  const IcClassification c =
      ClassifyBinding(testing::Uniform(4), testing::FixtureMechanism("fig1", "optimal_common_lottery"));
  EXPECT_TRUE(c.slack.empty());
  EXPECT_EQ(c.binding.size(), 12u - c.redundant.size());
  EXPECT_TRUE(c.binding.count({0, 1}));
  EXPECT_TRUE(c.binding.count({2, 0}));
}

TEST(ClassifyTest, BinaryMenuConstraints) {
  const IcClassification c =
      ClassifyBinding(testing::Uniform(4), testing::FixtureMechanism("fig2", "binary_menu"));
  // Types 0 and 1 receive identical lotteries, so IC_{1,0} binds; the
  // slack sits on IC_{2,0} and IC_{2,1} (1/12 each).
  EXPECT_TRUE(c.binding.count({1, 0}));
  EXPECT_TRUE(c.slack.count({2, 0}));
  EXPECT_EQ(IcSlack(testing::Uniform(4), testing::FixtureMechanism("fig2", "binary_menu"), 2, 0), Q(1, 12));
  EXPECT_THROW(ClassifyBinding(testing::Uniform(4, Q(1, 2)), testing::FixtureMechanism("fig3", "local_ic_only")),
               Error);
}

TEST(CommonLotteryTest, ExpansionAndReadBack) {
  const Instance inst = testing::Uniform(4);
  const CommonLottery cl{{0, Q(5, 12), Q(1, 3), Q(1, 4)}};
  const DirectMechanism m = ExpandCommonLottery(inst, cl);
  EXPECT_EQ(m, testing::FixtureMechanism("fig1", "optimal_common_lottery"));
  EXPECT_EQ(ReadCommonLottery(m), cl);
  EXPECT_EQ(ExpandCommonLottery(inst, CommonLottery{RationalVector(4, 0)}), DirectMechanism(4));
  EXPECT_EQ(ExpandCommonLottery(testing::Fig4Instance(), CommonLottery{{0, Q(2, 3), Q(1, 3)}}),
            testing::FixtureMechanism("fig4", "common_lottery"));
  try {
    ExpandCommonLottery(inst, CommonLottery{{Q(1, 2), Q(1, 2), Q(1, 4), 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLotteryOverflow);
  }
}

TEST(CommonLotteryTest, ExpansionsAreIcAndMassesFactor) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Instance inst = testing::RandomInstance(rng, static_cast<std::size_t>(testing::Draw(rng, 2, 7)));
    const CommonLottery cl = testing::RandomFeasibleLottery(rng, inst);
    const DirectMechanism m = ExpandCommonLottery(inst, cl);
    EXPECT_TRUE(GetFeasibilityReport(inst, m).violated_ics.empty());
    EXPECT_EQ(ReadCommonLottery(m), cl);
    const PositionMasses s = GetPositionMasses(inst, m);
    for (std::size_t k = 0; k < inst.n(); ++k) EXPECT_EQ(s.s[k], inst.d() * cl.c[k] * inst.cdf()[k]);
  }
}

}  // namespace
}  // namespace lotto
