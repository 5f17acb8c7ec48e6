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

// Capped random priority for vertical preferences: agents are ranked by a
// uniform lottery number and, in that order, take the best position that
// still has quota if they prefer it to their outside option.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lotto/instance.hpp"
#include "lotto/mechanism.hpp"
#include "lotto/rational.hpp"

namespace lotto {

struct CrpThreshold {
  std::size_t step;      // 1-based
  Rational cutoff;       // agent mass consumed once this step ends
  std::size_t position;  // position served in this step
  bool exhausted;        // false when agents ran out first
};

struct CrpResult {
  std::vector<CrpThreshold> thresholds;
  DirectMechanism allocation;
  PositionMasses caps;
};

inline void CheckCaps(const Instance& inst, const PositionMasses& caps) {
  if (caps.s.size() != inst.n()) throw Error(ErrorCode::kDimensionMismatch, "caps length");
  for (std::size_t k = 0; k < inst.n(); ++k) {
    if (caps.s[k] < 0 || caps.s[k] > inst.g()[k]) {
      throw Error(ErrorCode::kCapsInfeasible, "cap " + std::to_string(k) + " outside [0, g_k]");
    }
  }
}

/// Continuum CRP. Serving position k costs s_k / F_k agents because only
/// types <= k accept it. Every type <= k is offered k with probability
/// (s_k / F_k) / D; if agents run out, the last position is filled pro rata.
inline CrpResult ContinuumCrp(const Instance& inst, const PositionMasses& caps) {
  CheckCaps(inst, caps);
  const std::size_t n = inst.n();
  CrpResult out{{}, DirectMechanism(n), caps};
  Rational used = 0;
  for (std::size_t k = n; k-- > 0;) {
    if (caps.s[k] == 0) continue;
    const Rational need = caps.s[k] / inst.cdf()[k];
    const Rational left = inst.d() - used;
    const bool enough = need <= left;
    const Rational taken = enough ? need : left;
    used += taken;
    const Rational prob = taken / inst.d();
    for (std::size_t i = 0; i <= k; ++i) out.allocation(k, i) = prob;
    out.thresholds.push_back({out.thresholds.size() + 1, used, k, enough});
    if (!enough || used == inst.d()) break;
  }
  return out;
}

inline PositionMasses CapsFromLottery(const Instance& inst, const CommonLottery& cl) {
  if (cl.c.size() != inst.n()) throw Error(ErrorCode::kDimensionMismatch, "lottery length");
  PositionMasses caps;
  caps.s.resize(inst.n());
  for (std::size_t k = 0; k < inst.n(); ++k) caps.s[k] = inst.d() * cl.c[k] * inst.cdf()[k];
  return caps;
}

struct SimulationResult {
  std::size_t n_agents = 0;
  std::size_t replications = 0;
  std::vector<std::int64_t> quotas;
  std::vector<std::vector<std::int64_t>> counts;  // (k, i) assignments
  std::vector<std::int64_t> type_counts;
  std::vector<std::vector<double>> probability;
  std::vector<std::vector<double>> standard_error;
};

namespace detail {

inline double UnitDouble(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ReplicationCounts {
  std::vector<std::int64_t> cells;  // row-major (k, i)
  std::vector<std::int64_t> types;
};

inline ReplicationCounts RunReplication(const std::vector<double>& cdf,
                                        const std::vector<std::int64_t>& quotas,
                                        std::size_t n_agents, std::uint64_t seed,
                                        std::uint64_t rep) {
  const std::size_t n = cdf.size();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(rep >> 32)};
  std::mt19937_64 rng(seq);
  ReplicationCounts out{std::vector<std::int64_t>(n * n, 0), std::vector<std::int64_t>(n, 0)};
  std::vector<std::int64_t> left = quotas;
  std::size_t top = n;  // positions >= top are exhausted
  while (top > 0 && left[top - 1] == 0) --top;
  // Draw order is the priority order: types are i.i.d., so it is uniform.
  for (std::size_t a = 0; a < n_agents; ++a) {
    const double u = UnitDouble(rng);
    std::size_t type = 0;
    while (type + 1 < n && u >= cdf[type]) ++type;
    ++out.types[type];
    if (top == 0 || top - 1 < type) continue;
    const std::size_t k = top - 1;
    ++out.cells[k * n + type];
    if (--left[k] == 0) {
      while (top > 0 && left[top - 1] == 0) --top;
    }
  }
  return out;
}

}  // namespace detail

/// Finite-market CRP: quotas floor(n s_k / D), n i.i.d. agents per
/// replication, replication r seeded from (seed, r). Replications run on
/// worker threads; counts are summed so the result does not depend on
/// scheduling.
inline SimulationResult SimulateFinite(const Instance& inst, const PositionMasses& caps,
                                       std::size_t n_agents, std::size_t replications,
                                       std::uint64_t seed, unsigned threads = 0) {
  CheckCaps(inst, caps);
  if (n_agents < 1) throw Error(ErrorCode::kBadQuota, "need at least one agent");
  if (replications < 1) throw Error(ErrorCode::kBadQuota, "need at least one replication");
  const std::size_t n = inst.n();
  SimulationResult out;
  out.n_agents = n_agents;
  out.replications = replications;
  out.quotas.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Rational seats = Rational(static_cast<long>(n_agents)) * caps.s[k] / inst.d();
    mpz_class floor_seats;
    mpz_fdiv_q(floor_seats.get_mpz_t(), seats.get_num_mpz_t(), seats.get_den_mpz_t());
    if (!floor_seats.fits_slong_p()) throw Error(ErrorCode::kBadQuota, "quota too large");
    out.quotas[k] = floor_seats.get_si();
  }
  std::vector<double> cdf(n);
  for (std::size_t i = 0; i < n; ++i) cdf[i] = ToDouble(inst.cdf()[i]);
  cdf[n - 1] = 1.0;

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, replications));
  std::vector<detail::ReplicationCounts> partial(threads, {std::vector<std::int64_t>(n * n, 0),
                                                           std::vector<std::int64_t>(n, 0)});
  auto work = [&](unsigned t) {
    for (std::size_t r = t; r < replications; r += threads) {
      const auto one = detail::RunReplication(cdf, out.quotas, n_agents, seed, r);
      for (std::size_t c = 0; c < n * n; ++c) partial[t].cells[c] += one.cells[c];
      for (std::size_t i = 0; i < n; ++i) partial[t].types[i] += one.types[i];
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  out.counts.assign(n, std::vector<std::int64_t>(n, 0));
  out.type_counts.assign(n, 0);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) out.counts[k][i] += p.cells[k * n + i];
    }
    for (std::size_t i = 0; i < n; ++i) out.type_counts[i] += p.types[i];
  }
  out.probability.assign(n, std::vector<double>(n, 0.0));
  out.standard_error.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double m = static_cast<double>(out.type_counts[i]);
      if (m == 0) continue;
      const double p = static_cast<double>(out.counts[k][i]) / m;
      out.probability[k][i] = p;
      out.standard_error[k][i] = std::sqrt(p * (1 - p) / m);
    }
  }
  return out;
}

/// Largest |empirical - analytic| over all cells.
inline double MaxDeviation(const SimulationResult& sim, const DirectMechanism& analytic) {
  double worst = 0;
  for (std::size_t k = 0; k < analytic.n(); ++k) {
    for (std::size_t i = 0; i < analytic.n(); ++i) {
      worst = std::max(worst, std::abs(sim.probability[k][i] - ToDouble(analytic(k, i))));
    }
  }
  return worst;
}

/// Least-squares slope of log(y) on log(x).
inline double LogLogSlope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double lx = std::log(x[t]);
    const double ly = std::log(y[t]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double md = static_cast<double>(m);
  return (md * sxy - sx * sy) / (md * sxx - sx * sx);
}

/// CSV rows: k,i,empirical_prob,stderr,analytic_prob.
inline void WriteSimulationCsv(std::ostream& os, const SimulationResult& sim,
                               const DirectMechanism& analytic) {
  os << "k,i,empirical_prob,stderr,analytic_prob\n";
  os << std::setprecision(10);
  for (std::size_t k = 0; k < analytic.n(); ++k) {
    for (std::size_t i = 0; i < analytic.n(); ++i) {
      os << k << ',' << i << ',' << sim.probability[k][i] << ',' << sim.standard_error[k][i] << ','
         << ToDouble(analytic(k, i)) << '\n';
    }
  }
}

}  // namespace lotto
