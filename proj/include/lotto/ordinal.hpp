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

// Common ordinal preferences with heterogeneous cardinal utility. Each
// utility parameter gamma induces an uneven grid x_k = u(q_k; gamma) with
// the same cdf values F_k = H(q_k).

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/optimizer.hpp"
#include "lotto/rational.hpp"
#include "lotto/transform.hpp"

namespace lotto {

class OrdinalInstance {
 public:
  static OrdinalInstance Create(RationalVector qualities, RationalVector h_q,
                                std::vector<std::string> gammas, RationalVector h_gamma,
                                std::vector<RationalVector> utility, RationalVector g, Rational d) {
    const std::size_t n = qualities.size();
    if (n < 2) throw Error(ErrorCode::kGridTooSmall, "need at least two qualities");
    if (h_q.size() != n || g.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "hQ and g must match the quality grid");
    }
    if (gammas.empty() || h_gamma.size() != gammas.size() || utility.size() != gammas.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "Gamma, hGamma and u must have equal length");
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (qualities[k] <= qualities[k - 1]) {
        throw Error(ErrorCode::kInfeasibleInput, "qualities must be strictly increasing");
      }
    }
    for (const auto& h : h_q) {
      if (h <= 0) throw Error(ErrorCode::kNonPositiveTypeMass, "hQ must have full support");
    }
    for (const auto& h : h_gamma) {
      if (h < 0) throw Error(ErrorCode::kNonPositiveTypeMass, "hGamma must be nonnegative");
    }
    for (const auto& x : g) {
      if (x < 0) throw Error(ErrorCode::kNegativeCapacity, "negative capacity");
    }
    if (Sum(h_q) != 1 || Sum(h_gamma) != 1 || Sum(g) != 1) {
      throw Error(ErrorCode::kPmfNotNormalized, "hQ, hGamma and g must each sum to 1");
    }
    if (d <= 0) throw Error(ErrorCode::kBadMass, "D = " + ToString(d));
    for (std::size_t t = 0; t < utility.size(); ++t) {
      if (utility[t].size() != n) throw Error(ErrorCode::kDimensionMismatch, "utility row length");
      for (std::size_t k = 1; k < n; ++k) {
        if (utility[t][k] <= utility[t][k - 1]) {
          throw Error(ErrorCode::kInfeasibleInput, "utility for " + gammas[t] + " must be strictly increasing");
        }
      }
    }
    for (std::size_t t = 0; t < gammas.size(); ++t) {
      for (std::size_t s = 0; s < t; ++s) {
        if (gammas[s] == gammas[t]) throw Error(ErrorCode::kInfeasibleInput, "duplicate gamma " + gammas[t]);
      }
    }
    return OrdinalInstance(std::move(qualities), std::move(h_q), std::move(gammas), std::move(h_gamma),
                           std::move(utility), std::move(g), std::move(d));
  }

  std::size_t n() const noexcept { return q_.size(); }
  const RationalVector& qualities() const noexcept { return q_; }
  const RationalVector& h_q() const noexcept { return h_q_; }
  const RationalVector& cdf() const noexcept { return cdf_; }
  const std::vector<std::string>& gammas() const noexcept { return gammas_; }
  const RationalVector& h_gamma() const noexcept { return h_gamma_; }
  const std::vector<RationalVector>& utility() const noexcept { return u_; }
  const RationalVector& g() const noexcept { return g_; }
  const Rational& d() const noexcept { return d_; }

  std::size_t GammaIndex(const std::string& name) const {
    for (std::size_t t = 0; t < gammas_.size(); ++t) {
      if (gammas_[t] == name) return t;
    }
    throw Error(ErrorCode::kUnknownGamma, "unknown gamma " + name);
  }

  /// Baseline instance with f = hQ; prices 1/H only depend on this.
  Instance PriceInstance() const { return Instance::Create(n(), h_q_, g_, d_); }

 private:
  OrdinalInstance(RationalVector q, RationalVector h_q, std::vector<std::string> gammas,
                  RationalVector h_gamma, std::vector<RationalVector> u, RationalVector g, Rational d)
      : q_(std::move(q)), h_q_(std::move(h_q)), gammas_(std::move(gammas)),
        h_gamma_(std::move(h_gamma)), u_(std::move(u)), g_(std::move(g)), d_(std::move(d)) {
    Rational running = 0;
    for (const auto& h : h_q_) {
      running += h;
      cdf_.push_back(running);
    }
  }

  RationalVector q_;
  RationalVector h_q_;
  RationalVector cdf_;
  std::vector<std::string> gammas_;
  RationalVector h_gamma_;
  std::vector<RationalVector> u_;
  RationalVector g_;
  Rational d_;
};

struct UnevenGridView {
  RationalVector x;
  RationalVector f;  // increments of F
  RationalVector F;
};

inline UnevenGridView NormalizeGamma(const OrdinalInstance& oi, const std::string& gamma) {
  const std::size_t t = oi.GammaIndex(gamma);
  return {oi.utility()[t], oi.h_q(), oi.cdf()};
}

/// The baseline grid x_k = k/(N-1) for an ordinary instance.
inline UnevenGridView EvenGridView(const Instance& inst) {
  UnevenGridView view{RationalVector(inst.n()), inst.f(), inst.cdf()};
  for (std::size_t k = 0; k < inst.n(); ++k) view.x[k] = inst.GridPoint(k);
  return view;
}

inline Rational UnevenBracket(const UnevenGridView& v, std::size_t i) {
  return (v.x[i + 1] - v.x[i]) / v.F[i - 1] - (v.x[i + 1] - v.x[i - 1]) / v.F[i] +
         (v.x[i] - v.x[i - 1]) / v.F[i + 1];
}

inline ConvexityReport UnevenConvexity(const UnevenGridView& v) {
  ConvexityReport report;
  report.is_convex = true;
  report.is_strictly_convex = true;
  for (std::size_t i = 1; i + 1 < v.x.size(); ++i) {
    Rational entry = UnevenBracket(v, i);
    if (entry < 0) {
      report.is_convex = false;
      report.violation_indices.push_back(i);
    }
    if (entry <= 0) report.is_strictly_convex = false;
    report.second_differences.push_back(std::move(entry));
  }
  return report;
}

/// Multipliers of the unscaled IC constraints sum_{k>i} (x_k - x_i)(...) >= 0.
inline Multipliers UnevenMultipliers(const UnevenGridView& v) {
  const std::size_t n = v.x.size();
  Multipliers m{RationalVector(n - 1), RationalMatrix(n, n)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    m.local_up[i] = v.f[i + 1] / v.F[i + 1] / (v.x[i + 1] - v.x[i]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Rational scale = UnevenBracket(v, i) / ((v.x[i + 1] - v.x[i]) * (v.x[i] - v.x[i - 1]));
    for (std::size_t j = 0; j < i; ++j) m.down(i, j) = v.f[j] * scale;
  }
  return m;
}

struct FocReport {
  RationalMatrix residual;  // cells k >= i
  bool zero = true;
};

/// Stationarity of the min-mass Lagrangian on an uneven grid: for every
/// cell, -f_i/F_k + [i = 0] minus the cell's coefficient in sum lambda * IC.
inline FocReport UnevenFocResidual(const UnevenGridView& v) {
  const std::size_t n = v.x.size();
  const Multipliers m = UnevenMultipliers(v);
  RationalMatrix coef(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Rational w = m.At(i, j);
      if (w == 0) continue;
      for (std::size_t k = i + 1; k < n; ++k) {
        const Rational term = w * (v.x[k] - v.x[i]);
        coef(k, i) += term;
        coef(k, j) -= term;
      }
    }
  }
  FocReport out{RationalMatrix(n, n), true};
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i <= k; ++i) {
      Rational r = -v.f[i] / v.F[k] - coef(k, i);
      if (i == 0) r += 1;
      if (r != 0) out.zero = false;
      out.residual(k, i) = std::move(r);
    }
  }
  return out;
}

/// Optimal gamma-independent common lottery over Q, priced by 1/H.
inline CommonLottery OptimalCommonLotteryOrdinal(const OrdinalInstance& oi, const Objective& obj) {
  if (!IsLinear(obj)) {
    throw Error(ErrorCode::kUnsupportedObjective, "ordinal lottery needs a fill or linear objective");
  }
  std::string failing;
  for (const auto& gamma : oi.gammas()) {
    if (!UnevenConvexity(NormalizeGamma(oi, gamma)).is_convex) {
      failing += failing.empty() ? gamma : ", " + gamma;
    }
  }
  if (!failing.empty()) {
    throw Error(ErrorCode::kConvexityHypothesisFailed, "convexity fails for: " + failing);
  }
  const Instance prices = oi.PriceInstance();
  if (std::holds_alternative<FillObjective>(obj)) return OptimalLotteryFill(prices).lottery;
  const MassesResult masses = OptimalMasses(prices, obj);
  CommonLottery cl;
  for (std::size_t k = 0; k < oi.n(); ++k) cl.c.push_back(masses.masses.s[k] / (oi.d() * oi.cdf()[k]));
  return cl;
}

inline CommonLottery AggregatePerGamma(const OrdinalInstance& oi,
                                       const std::map<std::string, CommonLottery>& per_gamma) {
  CommonLottery out{RationalVector(oi.n(), Rational(0))};
  if (per_gamma.size() != oi.gammas().size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one lottery per gamma");
  }
  for (const auto& [name, cl] : per_gamma) {
    const std::size_t t = oi.GammaIndex(name);
    if (cl.c.size() != oi.n()) throw Error(ErrorCode::kDimensionMismatch, "lottery length for " + name);
    for (std::size_t k = 0; k < oi.n(); ++k) out.c[k] += oi.h_gamma()[t] * cl.c[k];
  }
  return out;
}

/// s_k = D sum_gamma sum_{v <= q_k} h_Gamma(gamma) h_Q(v) c^gamma_k, summed
/// over the joint type space.
inline PositionMasses OrdinalPositionMasses(const OrdinalInstance& oi,
                                            const std::map<std::string, CommonLottery>& per_gamma) {
  PositionMasses s{RationalVector(oi.n(), Rational(0))};
  for (const auto& [name, cl] : per_gamma) {
    const Rational& hg = oi.h_gamma()[oi.GammaIndex(name)];
    for (std::size_t k = 0; k < oi.n(); ++k) {
      for (std::size_t v = 0; v <= k; ++v) s.s[k] += oi.d() * hg * oi.h_q()[v] * cl.c[k];
    }
  }
  return s;
}

/// Masses of one lottery offered to every (v, gamma): D c_k H_k.
inline PositionMasses OrdinalLotteryMasses(const OrdinalInstance& oi, const CommonLottery& cl) {
  PositionMasses s{RationalVector(oi.n())};
  for (std::size_t k = 0; k < oi.n(); ++k) s.s[k] = oi.d() * cl.c[k] * oi.cdf()[k];
  return s;
}

}  // namespace lotto
