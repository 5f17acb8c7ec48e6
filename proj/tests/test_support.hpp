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

// Shared fixtures and seeded generators for the test binaries.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lotto/designer_lp.hpp"
#include "lotto/instance.hpp"
#include "lotto/io.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/rational.hpp"

namespace lotto::testing {

inline Rational Q(long p, long q = 1) { return MakeRational(p, q); }

inline Json LoadFixture(const std::string& name) {
  return LoadJsonFile((std::filesystem::path(LOTTO_FIXTURE_DIR) / (name + ".json")).string());
}

inline Instance Uniform(std::size_t n, const Rational& d = 1) {
  RationalVector u(n, Q(1, static_cast<long>(n)));
  return NewInstance(n, u, u, d);
}

// f = (1/3, 1/12, 7/12), one third of capacity per position.
inline Instance Fig4Instance(const Rational& d = 1) {
  return NewInstance(3, {Q(1, 3), Q(1, 12), Q(7, 12)}, {Q(1, 3), Q(1, 3), Q(1, 3)}, d);
}

inline DirectMechanism FixtureMechanism(const std::string& fig, const std::string& key) {
  return MechanismFromJson(LoadFixture(fig).at("mechanisms").at(key));
}

inline long Draw(std::mt19937_64& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

// Positive integer weights normalized to a pmf.
inline RationalVector RandomPmf(std::mt19937_64& rng, std::size_t n, bool allow_zero = false) {
  RationalVector w(n);
  Rational total = 0;
  for (auto& x : w) {
    x = Draw(rng, allow_zero ? 0 : 1, 9);
    total += x;
  }
  if (total == 0) {
    w[n - 1] = 1;
    total = 1;
  }
  for (auto& x : w) x /= total;
  return w;
}

// 1/F convex: G = 1/F decreasing to 1 with non-increasing decrements, or
// a non-increasing pmf.
inline RationalVector RandomConvexTypePmf(std::mt19937_64& rng, std::size_t n) {
  if (Draw(rng, 0, 1) == 0) {
    RationalVector f = RandomPmf(rng, n);
    std::sort(f.begin(), f.end(), [](const Rational& a, const Rational& b) { return a > b; });
    return f;
  }
  std::vector<long> steps(n - 1);
  for (auto& s : steps) s = Draw(rng, 1, 12);
  std::sort(steps.begin(), steps.end(), std::greater<long>());
  const Rational scale = Q(1, Draw(rng, 1, 6));
  RationalVector inv_f(n);
  inv_f[n - 1] = 1;
  for (std::size_t k = n - 1; k-- > 0;) inv_f[k] = inv_f[k + 1] + scale * steps[k];
  RationalVector f(n);
  Rational prev = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const Rational cdf = 1 / inv_f[k];
    f[k] = cdf - prev;
    prev = cdf;
  }
  return f;
}

inline Rational RandomMass(std::mt19937_64& rng) { return Q(Draw(rng, 1, 30), Draw(rng, 4, 12)); }

inline Instance RandomConvexInstance(std::mt19937_64& rng, std::size_t n) {
  return NewInstance(n, RandomConvexTypePmf(rng, n), RandomPmf(rng, n, true), RandomMass(rng));
}

inline Instance RandomInstance(std::mt19937_64& rng, std::size_t n) {
  return NewInstance(n, RandomPmf(rng, n), RandomPmf(rng, n, true), RandomMass(rng));
}

// Arbitrary matrix supported on k >= i with entries in [0, 1].
inline DirectMechanism RandomSupportedMatrix(std::mt19937_64& rng, std::size_t n) {
  DirectMechanism m(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) m(k, i) = Q(Draw(rng, 0, 20), 20);
  }
  return m;
}

inline RationalVector RandomPositiveWeights(std::mt19937_64& rng, std::size_t n) {
  RationalVector w(n);
  for (auto& x : w) x = Q(Draw(rng, 1, 10), Draw(rng, 1, 4));
  return w;
}

// A feasible common lottery: random offers scaled under both the
// probability and the capacity limits.
inline CommonLottery RandomFeasibleLottery(std::mt19937_64& rng, const Instance& inst) {
  const std::size_t n = inst.n();
  CommonLottery cl{RationalVector(n)};
  for (auto& c : cl.c) c = Q(Draw(rng, 0, 10), 10);
  Rational total = cl.Total();
  if (total > 1) {
    for (auto& c : cl.c) c /= total;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Rational cap = inst.g()[k] / (inst.d() * inst.cdf()[k]);
    if (cl.c[k] > cap) cl.c[k] = cap;
  }
  return cl;
}

// A vertex of the designer polytope: optimum for random positive weights.
inline DirectMechanism RandomLpVertex(std::mt19937_64& rng, const Instance& inst) {
  return SolveDesigner(inst, MakeLinear(RandomPositiveWeights(rng, inst.n()))).mechanism;
}

// Exhaustive vertex enumeration for tiny bounded LPs: every choice of
// num_variables tight constraints (rows or finite bounds) is solved exactly
// and the best feasible point is kept. Independent of the simplex code.
inline std::optional<Rational> BruteForceLpOptimum(const LinearProgram& lp) {
  const std::size_t n = lp.num_variables();
  struct Hyper {
    RationalVector a;
    Rational b;
  };
  std::vector<Hyper> planes;
  for (const auto& row : lp.rows()) {
    RationalVector a(n, Rational(0));
    for (const auto& t : row.terms) a[t.var] += t.coef;
    planes.push_back({a, row.rhs});
  }
  for (std::size_t j = 0; j < n; ++j) {
    RationalVector a(n, Rational(0));
    a[j] = 1;
    planes.push_back({a, lp.lower()[j]});
    if (lp.upper()[j]) planes.push_back({a, *lp.upper()[j]});
  }
  auto feasible = [&](const RationalVector& x) {
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] < lp.lower()[j] || (lp.upper()[j] && x[j] > *lp.upper()[j])) return false;
    }
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
      const auto& row = lp.rows()[r];
      const Rational v = lp.RowActivity(r, x);
      if (row.relation == Relation::kLessEqual && v > row.rhs) return false;
      if (row.relation == Relation::kGreaterEqual && v < row.rhs) return false;
      if (row.relation == Relation::kEqual && v != row.rhs) return false;
    }
    return true;
  };
  std::optional<Rational> best;
  std::vector<std::size_t> pick(n);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t start) {
    if (depth == n) {
      std::vector<RationalVector> m(n);
      for (std::size_t r = 0; r < n; ++r) {
        m[r] = planes[pick[r]].a;
        m[r].push_back(planes[pick[r]].b);
      }
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0) ++p;
        if (p == n) return;
        std::swap(m[p], m[c]);
        for (std::size_t r = 0; r < n; ++r) {
          if (r == c || m[r][c] == 0) continue;
          const Rational factor = m[r][c] / m[c][c];
          for (std::size_t k = c; k <= n; ++k) m[r][k] -= factor * m[c][k];
        }
      }
      RationalVector x(n);
      for (std::size_t c = 0; c < n; ++c) x[c] = m[c][n] / m[c][c];
      if (!feasible(x)) return;
      Rational value = 0;
      for (std::size_t j = 0; j < n; ++j) value += lp.cost()[j] * x[j];
      const bool better = !best || (lp.sense() == Sense::kMaximize ? value > *best : value < *best);
      if (better) best = value;
      return;
    }
    for (std::size_t h = start; h < planes.size(); ++h) {
      pick[depth] = h;
      rec(depth + 1, h + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace lotto::testing
