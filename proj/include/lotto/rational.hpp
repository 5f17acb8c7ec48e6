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

// Exact rational scalar, dense rational matrix and the error type shared by
// every module.

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lotto {

enum class ErrorCode {
  kNonPositiveTypeMass,
  kPmfNotNormalized,
  kNegativeCapacity,
  kBadMass,
  kGridTooSmall,
  kIndexOutOfRange,
  kDimensionMismatch,
  kSupportViolation,
  kInfeasibleInput,
  kLotteryOverflow,
  kUnsupportedObjective,
  kNotOptimal,
  kInsufficientMass,
  kBadIndices,
  kInfeasibleMasses,
  kPreconditionViolation,
  kCapsInfeasible,
  kBadQuota,
  kUnknownGamma,
  kConvexityHypothesisFailed,
  kParseError,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPositiveTypeMass: return "NonPositiveTypeMass";
    case ErrorCode::kPmfNotNormalized: return "PmfNotNormalized";
    case ErrorCode::kNegativeCapacity: return "NegativeCapacity";
    case ErrorCode::kBadMass: return "BadMass";
    case ErrorCode::kGridTooSmall: return "GridTooSmall";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSupportViolation: return "SupportViolation";
    case ErrorCode::kInfeasibleInput: return "InfeasibleInput";
    case ErrorCode::kLotteryOverflow: return "LotteryOverflow";
    case ErrorCode::kUnsupportedObjective: return "UnsupportedObjective";
    case ErrorCode::kNotOptimal: return "NotOptimal";
    case ErrorCode::kInsufficientMass: return "InsufficientMass";
    case ErrorCode::kBadIndices: return "BadIndices";
    case ErrorCode::kInfeasibleMasses: return "InfeasibleMasses";
    case ErrorCode::kPreconditionViolation: return "PreconditionViolation";
    case ErrorCode::kCapsInfeasible: return "CapsInfeasible";
    case ErrorCode::kBadQuota: return "BadQuota";
    case ErrorCode::kUnknownGamma: return "UnknownGamma";
    case ErrorCode::kConvexityHypothesisFailed: return "ConvexityHypothesisFailed";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// GMP rationals are kept canonical by every arithmetic operator; only the
// two-argument constructor needs an explicit canonicalize().
using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

inline Rational MakeRational(long num, long den = 1) {
  if (den == 0) throw Error(ErrorCode::kParseError, "zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Accepts "p/q", "p", optional sign, surrounding whitespace.
inline Rational ParseRational(std::string_view text) {
  std::string s(text);
  const auto first = s.find_first_not_of(" \t\n");
  const auto last = s.find_last_not_of(" \t\n");
  if (first == std::string::npos) {
    throw Error(ErrorCode::kParseError, "empty rational");
  }
  s = s.substr(first, last - first + 1);
  if (s.front() == '+') s.erase(0, 1);
  const auto valid = [](const std::string& part) {
    if (part.empty()) return false;
    std::size_t i = part[0] == '-' ? 1 : 0;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i) {
      if (part[i] < '0' || part[i] > '9') return false;
    }
    return true;
  };
  const auto slash = s.find('/');
  const std::string num = s.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid(num) || !valid(den) || den[0] == '-') {
    throw Error(ErrorCode::kParseError, "malformed rational '" + s + "'");
  }
  Rational r;
  r.get_num() = mpz_class(num, 10);
  r.get_den() = mpz_class(den, 10);
  if (r.get_den() == 0) throw Error(ErrorCode::kParseError, "zero denominator");
  r.canonicalize();
  return r;
}

// Canonical "p/q" text; integers print without a denominator.
inline std::string ToString(const Rational& r) { return r.get_str(); }

inline double ToDouble(const Rational& r) { return r.get_d(); }

inline Rational Min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational Max(const Rational& a, const Rational& b) { return a < b ? b : a; }

inline Rational Sum(const RationalVector& v) {
  Rational total = 0;
  for (const auto& x : v) total += x;
  return total;
}

// Best rational approximation with denominator at most max_den
// (continued-fraction convergents and the final semiconvergent).
inline Rational Rationalize(double value, long max_den = 1'000'000'000L) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kParseError, "cannot rationalize non-finite value");
  }
  const bool negative = value < 0;
  double x = std::fabs(value);
  mpz_class p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(x);
    if (a_d > 1e18) break;
    const mpz_class a(a_d);
    const mpz_class q2 = a * q1 + q0;
    if (q2 > max_den) {
      const mpz_class k = (mpz_class(max_den) - q0) / q1;
      const mpz_class ps = k * p1 + p0, qs = k * q1 + q0;
      const double err_s = std::fabs(mpq_class(ps, qs).get_d() - std::fabs(value));
      const double err_c = std::fabs(mpq_class(p1, q1).get_d() - std::fabs(value));
      if (err_s < err_c) { p1 = ps; q1 = qs; }
      break;
    }
    const mpz_class p2 = a * p1 + p0;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = x - a_d;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
  }
  Rational r(p1, q1);
  r.canonicalize();
  return negative ? Rational(-r) : r;
}

// Dense row-major rational matrix.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  Rational& at(std::size_t r, std::size_t c) {
    Check(r, c);
    return (*this)(r, c);
  }
  const Rational& at(std::size_t r, std::size_t c) const {
    Check(r, c);
    return (*this)(r, c);
  }

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void Check(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "cell (" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

}  // namespace lotto
