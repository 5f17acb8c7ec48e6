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

// Problem instances on the evenly spaced grid X = Theta = {k/(N-1)}.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "lotto/rational.hpp"

namespace lotto {

/// A validated instance: type pmf f, position pmf g (capacities, total 1)
/// and agent mass D. Grid points are never stored; see GridPoint().
class Instance {
 public:
  static Instance Create(std::size_t n, RationalVector f, RationalVector g, Rational d) {
    if (n < 2) throw Error(ErrorCode::kGridTooSmall, "need N >= 2");
    if (f.size() != n || g.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "f and g must have length N");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (f[i] <= 0) {
        throw Error(ErrorCode::kNonPositiveTypeMass,
                    "f[" + std::to_string(i) + "] = " + ToString(f[i]));
      }
      if (g[i] < 0) {
        throw Error(ErrorCode::kNegativeCapacity,
                    "g[" + std::to_string(i) + "] = " + ToString(g[i]));
      }
    }
    if (Sum(f) != 1) throw Error(ErrorCode::kPmfNotNormalized, "sum f = " + ToString(Sum(f)));
    if (Sum(g) != 1) throw Error(ErrorCode::kPmfNotNormalized, "sum g = " + ToString(Sum(g)));
    if (d <= 0) throw Error(ErrorCode::kBadMass, "D = " + ToString(d));
    return Instance(n, std::move(f), std::move(g), std::move(d));
  }

  std::size_t n() const noexcept { return n_; }
  const RationalVector& f() const noexcept { return f_; }
  const RationalVector& g() const noexcept { return g_; }
  const Rational& d() const noexcept { return d_; }
  const RationalVector& cdf() const noexcept { return cdf_; }

  const Rational& Cdf(std::size_t i) const {
    if (i >= n_) throw Error(ErrorCode::kIndexOutOfRange, "type index " + std::to_string(i));
    return cdf_[i];
  }

  /// x_k = theta_k = k / (N-1), produced on demand.
  Rational GridPoint(std::size_t k) const {
    return MakeRational(static_cast<long>(k), static_cast<long>(n_ - 1));
  }

  /// Same primitives with a different agent mass.
  Instance WithMass(Rational d) const { return Create(n_, f_, g_, std::move(d)); }

 private:
  Instance(std::size_t n, RationalVector f, RationalVector g, Rational d)
      : n_(n), f_(std::move(f)), g_(std::move(g)), d_(std::move(d)), cdf_(n_) {
    Rational running = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      running += f_[i];
      cdf_[i] = running;
    }
  }

  std::size_t n_;
  RationalVector f_;
  RationalVector g_;
  Rational d_;
  RationalVector cdf_;
};

inline Instance NewInstance(std::size_t n, RationalVector f, RationalVector g, Rational d) {
  return Instance::Create(n, std::move(f), std::move(g), std::move(d));
}

inline Rational Cdf(const Instance& inst, std::size_t i) { return inst.Cdf(i); }

struct ConvexityReport {
  RationalVector second_differences;  // entry m is for interior index m+1
  bool is_convex = true;
  bool is_strictly_convex = true;
  std::vector<std::size_t> violation_indices;  // interior grid indices
};

// Second differences of an arbitrary sequence; entry for interior index i.
inline ConvexityReport ConvexityOfSequence(const RationalVector& values) {
  ConvexityReport report;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    Rational diff = values[i - 1] - 2 * values[i] + values[i + 1];
    if (diff < 0) {
      report.is_convex = false;
      report.violation_indices.push_back(i);
    }
    if (diff <= 0) report.is_strictly_convex = false;
    report.second_differences.push_back(std::move(diff));
  }
  return report;
}

/// Exact second differences of 1/F on the grid. N = 2 is vacuously convex.
inline ConvexityReport GetConvexityReport(const Instance& inst) {
  RationalVector inverse(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) inverse[i] = 1 / inst.cdf()[i];
  return ConvexityOfSequence(inverse);
}

/// 1/F(theta_{i-1}) - 2/F(theta_i) + 1/F(theta_{i+1}) for interior i.
inline Rational InverseCdfSecondDifference(const Instance& inst, std::size_t i) {
  if (i == 0 || i + 1 >= inst.n()) {
    throw Error(ErrorCode::kIndexOutOfRange, "not an interior index: " + std::to_string(i));
  }
  const auto& F = inst.cdf();
  return 1 / F[i - 1] - 2 / F[i] + 1 / F[i + 1];
}

}  // namespace lotto
