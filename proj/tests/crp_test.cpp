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
#include <sstream>

#include "lotto/crp.hpp"
#include "test_support.hpp"

namespace lotto {
namespace {

using testing::Q;

const PositionMasses kFig1Caps{{0, Q(5, 24), Q(1, 4), Q(1, 4)}};

TEST(ContinuumCrpTest, Fig1Caps) {
  const Instance inst = testing::Uniform(4);
  const CrpResult r = ContinuumCrp(inst, kFig1Caps);
  EXPECT_EQ(r.allocation, testing::FixtureMechanism("fig1", "optimal_common_lottery"));
  ASSERT_EQ(r.thresholds.size(), 3u);
  EXPECT_EQ(r.thresholds[0].cutoff, Q(1, 4));
  EXPECT_EQ(r.thresholds[1].cutoff, Q(7, 12));
  EXPECT_EQ(r.thresholds[2].cutoff, 1);
  EXPECT_EQ(r.thresholds[0].position, 3u);
  for (const auto& t : r.thresholds) EXPECT_TRUE(t.exhausted);
}

TEST(ContinuumCrpTest, ZeroCaps) {
  const CrpResult r = ContinuumCrp(testing::Uniform(4), PositionMasses{RationalVector(4, 0)});
  EXPECT_EQ(r.allocation, DirectMechanism(4));
  EXPECT_TRUE(r.thresholds.empty());
}

TEST(ContinuumCrpTest, AgentsRunOut) {
  const Instance inst = testing::Uniform(4, Q(1, 8));
  const CrpResult r = ContinuumCrp(inst, PositionMasses{{0, 0, 0, Q(1, 4)}});
  ASSERT_EQ(r.thresholds.size(), 1u);
  EXPECT_FALSE(r.thresholds[0].exhausted);
  EXPECT_EQ(r.thresholds[0].cutoff, Q(1, 8));
  EXPECT_EQ(GetPositionMasses(inst, r.allocation).s[3], Q(1, 8));
}

TEST(ContinuumCrpTest, ExactTieCountsAsExhausted) {
  const Instance inst = testing::Uniform(4, Q(1, 4));
  const CrpResult r = ContinuumCrp(inst, PositionMasses{{0, 0, Q(1, 8), Q(1, 4)}});
  ASSERT_EQ(r.thresholds.size(), 1u);
  EXPECT_TRUE(r.thresholds[0].exhausted);
  EXPECT_EQ(r.allocation(2, 0), 0);
}

TEST(ContinuumCrpTest, RejectsInfeasibleCaps) {
  try {
    ContinuumCrp(testing::Uniform(4), PositionMasses{{0, 0, 0, Q(1, 2)}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCapsInfeasible);
  }
  EXPECT_THROW(ContinuumCrp(testing::Uniform(4), PositionMasses{{0, 0, Q(-1, 8), 0}}), Error);
}

TEST(CapsFromLotteryTest, Examples) {
  EXPECT_EQ(CapsFromLottery(testing::Uniform(4), CommonLottery{{0, Q(5, 12), Q(1, 3), Q(1, 4)}}), kFig1Caps);
  EXPECT_EQ(CapsFromLottery(testing::Fig4Instance(), CommonLottery{{0, Q(2, 3), Q(1, 3)}}).s,
            (RationalVector{0, Q(5, 18), Q(1, 3)}));
  EXPECT_EQ(CapsFromLottery(testing::Uniform(3), CommonLottery{RationalVector(3, 0)}).s, RationalVector(3, 0));
}

TEST(CapsFromLotteryTest, RoundTripReproducesTheLottery) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 200; ++trial) {
    const Instance inst = testing::RandomInstance(rng, static_cast<std::size_t>(testing::Draw(rng, 2, 8)));
    const CommonLottery cl = testing::RandomFeasibleLottery(rng, inst);
    const PositionMasses caps = CapsFromLottery(inst, cl);
    const CrpResult r = ContinuumCrp(inst, caps);
    EXPECT_EQ(r.allocation, ExpandCommonLottery(inst, cl)) << "trial " << trial;
    EXPECT_EQ(GetPositionMasses(inst, r.allocation), caps);
    for (std::size_t t = 1; t < r.thresholds.size(); ++t) {
      EXPECT_GT(r.thresholds[t].cutoff, r.thresholds[t - 1].cutoff);
    }
    if (!r.thresholds.empty()) {
      EXPECT_LE(r.thresholds.back().cutoff, inst.d());
    }
  }
}

TEST(ContinuumCrpTest, CannotReproduceTheFig4Menu) {
  // The menu gives theta_0 no chance at the top position although the top
  // position is used; any caps with s_2 > 0 offer it to theta_0.
  const Instance inst = testing::Fig4Instance();
  const DirectMechanism menu = testing::FixtureMechanism("fig4", "binary_menu");
  EXPECT_EQ(menu(2, 0), 0);
  EXPECT_GT(GetPositionMasses(inst, menu).s[2], 0);
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    RationalVector s(3);
    for (std::size_t k = 0; k < 3; ++k) s[k] = inst.g()[k] * Q(testing::Draw(rng, 0, 8), 8);
    if (s[2] == 0) s[2] = Q(1, 16);
    const CrpResult r = ContinuumCrp(inst, PositionMasses{s});
    EXPECT_GT(r.allocation(2, 0), 0);
    EXPECT_NE(r.allocation, menu);
  }
}

TEST(SimulateFiniteTest, QuotasAndDeterminism) {
  const Instance inst = testing::Uniform(4);
  const SimulationResult a = SimulateFinite(inst, kFig1Caps, 1000, 4, 7, 2);
  EXPECT_EQ(a.quotas, (std::vector<std::int64_t>{0, 208, 250, 250}));
  const SimulationResult b = SimulateFinite(inst, kFig1Caps, 1000, 4, 7, 3);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.type_counts, b.type_counts);
  const SimulationResult c = SimulateFinite(inst, kFig1Caps, 1000, 4, 8, 2);
  EXPECT_NE(a.type_counts, c.type_counts);
  std::int64_t agents = 0;
  for (auto t : a.type_counts) agents += t;
  EXPECT_EQ(agents, 4000);
  // Nobody is placed below their outside option.
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = k + 1; i < 4; ++i) EXPECT_EQ(a.counts[k][i], 0);
  }
}

TEST(SimulateFiniteTest, SingleAgentTakesTheTopPosition) {
  const Instance inst = testing::Uniform(4);
  const SimulationResult r = SimulateFinite(inst, PositionMasses{RationalVector(4, Q(1, 4))}, 1, 50, 3);
  EXPECT_EQ(r.quotas, (std::vector<std::int64_t>{0, 0, 0, 0}));
  const SimulationResult big = SimulateFinite(inst.WithMass(Q(1, 4)), PositionMasses{RationalVector(4, Q(1, 4))}, 1, 50, 3);
  EXPECT_EQ(big.quotas, (std::vector<std::int64_t>{1, 1, 1, 1}));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(big.counts[3][i], big.type_counts[i]);
}

TEST(SimulateFiniteTest, RejectsBadArguments) {
  const Instance inst = testing::Uniform(4);
  try {
    SimulateFinite(inst, kFig1Caps, 0, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadQuota);
  }
  EXPECT_THROW(SimulateFinite(inst, kFig1Caps, 10, 0, 1), Error);
  EXPECT_THROW(SimulateFinite(inst, PositionMasses{{1, 0, 0, 0}}, 10, 1, 1), Error);
}

TEST(SimulateFiniteTest, ConvergesToTheContinuum) {
  const Instance inst = testing::Uniform(4);
  const DirectMechanism analytic = ContinuumCrp(inst, kFig1Caps).allocation;
  const SimulationResult r = SimulateFinite(inst, kFig1Caps, 20000, 10, 11);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(r.probability[k][i], ToDouble(analytic(k, i)), 4 * r.standard_error[k][i] + 1e-12)
          << k << "," << i;
    }
  }
  EXPECT_LT(MaxDeviation(r, analytic), 0.02);
}

TEST(SimulateFiniteTest, CsvLayout) {
  const Instance inst = testing::Uniform(2);
  const PositionMasses caps{{Q(1, 4), Q(1, 4)}};
  const SimulationResult r = SimulateFinite(inst, caps, 100, 2, 1);
  std::ostringstream os;
  WriteSimulationCsv(os, r, ContinuumCrp(inst, caps).allocation);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "k,i,empirical_prob,stderr,analytic_prob");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(LogLogSlopeTest, RecoversPowerLaws) {
  EXPECT_NEAR(LogLogSlope({1e3, 1e4, 1e5}, {1e-1, 1e-1 / std::sqrt(10.0), 1e-2}), -0.5, 1e-12);
  EXPECT_NEAR(LogLogSlope({1, 2, 4}, {3, 6, 12}), 1.0, 1e-12);
}

}  // namespace
}  // namespace lotto
