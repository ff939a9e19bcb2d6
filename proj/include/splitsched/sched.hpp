/*
 * Copyright 2026 The splitsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Joint cut selection and bandwidth allocation.
//
// Minimizes the round makespan max_i (A_i,j(i) + C_j(i) / B_i) subject to
// sum_i B_i <= B by alternating two exact sub-solvers:
//   - with bandwidth fixed, each device independently takes the cut that
//     minimizes its own round time;
//   - with cuts fixed, the min-max bandwidth split equalizes the completion
//     time of every device that moves data, found by bisection on T.
// The alternation is a local search, so brute_force_oracle() exists to
// measure how far it lands from the true optimum on small instances.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "splitsched/cost.hpp"
#include "splitsched/errors.hpp"

namespace splitsched {

inline std::vector<double> equal_split(double total_bandwidth_bps, std::size_t num_devices) {
  return std::vector<double>(num_devices, total_bandwidth_bps / static_cast<double>(num_devices));
}

/// Per-device argmin_j (A_ij + C_j / B_i); ties go to the shallowest cut.
inline std::vector<int> best_cuts_given_bandwidth(const CostTable& table,
                                                  const std::vector<double>& bandwidth_bps) {
  if (bandwidth_bps.size() != table.num_devices()) {
    throw SolverError("best_cuts_given_bandwidth: bandwidth list length does not match devices");
  }
  const int n = static_cast<int>(table.num_cuts());
  std::vector<int> cuts(table.num_devices(), 1);
  for (std::size_t i = 0; i < table.num_devices(); ++i) {
    double best = table.round_time(i, 1, bandwidth_bps[i]);
    for (int j = 2; j <= n; ++j) {
      const double t = table.round_time(i, j, bandwidth_bps[i]);
      if (t < best) {
        best = t;
        cuts[i] = j;
      }
    }
  }
  return cuts;
}

struct BandwidthSolution {
  std::vector<double> bandwidth_bps;
  /// Makespan recomputed from the allocation.
  double objective_s = 0.0;
};

/// Min-max bandwidth split for fixed cuts.
///
/// Devices with traffic (C_i > 0) receive B_i = C_i / (T - A_i) where T is
/// the root of sum_i C_i / (T - A_i) = B, so they all finish together and
/// the budget is used in full. Devices with no traffic get 0 bps. If one of
/// them computes longer than T, it sets the makespan and the others keep
/// their full-budget allocation.
inline BandwidthSolution solve_bandwidth(const CostTable& table, const std::vector<int>& cuts,
                                         double total_bandwidth_bps) {
  const std::size_t m = table.num_devices();
  if (cuts.size() != m) throw SolverError("solve_bandwidth: cut list length does not match devices");
  if (!std::isfinite(total_bandwidth_bps) || total_bandwidth_bps <= 0.0) {
    throw SolverError("solve_bandwidth: total bandwidth must be positive and finite");
  }

  std::vector<double> a(m), c(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (cuts[i] < 1 || static_cast<std::size_t>(cuts[i]) > table.num_cuts()) {
      throw SolverError("solve_bandwidth: cut " + std::to_string(cuts[i]) + " out of range");
    }
    a[i] = table.a(i, cuts[i]);
    c[i] = table.c(cuts[i]);
    if (!std::isfinite(a[i]) || !std::isfinite(c[i]) || a[i] < 0.0 || c[i] < 0.0) {
      throw SolverError("solve_bandwidth: non-finite or negative coefficient for device " +
                        std::to_string(i));
    }
  }

  BandwidthSolution out;
  const double total_traffic = std::accumulate(c.begin(), c.end(), 0.0);
  if (total_traffic == 0.0) {
    out.bandwidth_bps = equal_split(total_bandwidth_bps, m);
    out.objective_s = *std::max_element(a.begin(), a.end());
    return out;
  }

  double lo = 0.0;
  double max_a = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    max_a = std::max(max_a, a[i]);
    if (c[i] > 0.0) lo = std::max(lo, a[i]);
  }
  // Strictly decreasing on (lo, inf), unbounded at lo.
  auto demand = [&](double t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (c[i] > 0.0) sum += c[i] / (t - a[i]);
    }
    return sum;
  };

  double hi = max_a + total_traffic / total_bandwidth_bps + 1.0;
  while (demand(hi) > total_bandwidth_bps) hi = lo + 2.0 * (hi - lo);
  // Bisect down to adjacent doubles; hi always satisfies the budget.
  for (int step = 0; step < 4096; ++step) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (demand(mid) <= total_bandwidth_bps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  out.bandwidth_bps.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (c[i] > 0.0) out.bandwidth_bps[i] = c[i] / (hi - a[i]);
  }
  out.objective_s = makespan(table, cuts, out.bandwidth_bps);
  return out;
}

struct SolveOptions {
  int max_iterations = 50;
  /// Relative improvement required to accept another alternation pass.
  double improvement_tolerance = 1e-9;
};

enum class Termination { kNoImprovement, kIterationCap };

inline const char* to_string(Termination t) {
  return t == Termination::kNoImprovement ? "no-improvement" : "iteration-cap";
}

struct SolveReport {
  Schedule schedule;
  int iterations = 0;
  /// Accepted objective after each improving pass; non-increasing.
  std::vector<double> objective_trace;
  Termination terminated_by = Termination::kIterationCap;
};

/// Alternating minimization from an equal bandwidth split.
inline SolveReport solve(const CostTable& table, double total_bandwidth_bps,
                         const SolveOptions& options = {}) {
  if (table.num_devices() == 0 || table.num_cuts() == 0) {
    throw SolverError("solve: empty cost table");
  }
  if (options.max_iterations < 1) throw SolverError("solve: iteration cap must be at least 1");

  SolveReport report;
  std::vector<double> bandwidth = equal_split(total_bandwidth_bps, table.num_devices());
  double best = std::numeric_limits<double>::infinity();

  for (int pass = 1; pass <= options.max_iterations; ++pass) {
    report.iterations = pass;
    std::vector<int> cuts = best_cuts_given_bandwidth(table, bandwidth);
    BandwidthSolution p2 = solve_bandwidth(table, cuts, total_bandwidth_bps);
    const bool improved = std::isinf(best)
                              ? true
                              : p2.objective_s < best * (1.0 - options.improvement_tolerance);
    if (!improved) {
      report.terminated_by = Termination::kNoImprovement;
      return report;
    }
    best = p2.objective_s;
    report.objective_trace.push_back(best);
    report.schedule = Schedule{std::move(cuts), p2.bandwidth_bps, best, ExecutionMode::kSplit};
    bandwidth = std::move(p2.bandwidth_bps);
  }
  report.terminated_by = Termination::kIterationCap;
  return report;
}

inline constexpr double kDefaultOracleCap = 1e6;

/// Number of cut assignments N^M, saturating at +inf.
inline double assignment_count(const CostTable& table) {
  return std::pow(static_cast<double>(table.num_cuts()), static_cast<double>(table.num_devices()));
}

/// Exact optimum by enumerating every cut vector in lexicographic order and
/// solving the bandwidth split for each. The first vector reaching the
/// minimum wins.
inline Schedule brute_force_oracle(const CostTable& table, double total_bandwidth_bps,
                                   double max_assignments = kDefaultOracleCap) {
  const double count = assignment_count(table);
  if (!(count <= max_assignments)) {
    throw InstanceTooLarge("oracle: " + std::to_string(table.num_cuts()) + "^" +
                           std::to_string(table.num_devices()) +
                           " cut assignments exceed the cap of " +
                           std::to_string(static_cast<long long>(max_assignments)));
  }
  const std::size_t m = table.num_devices();
  const int n = static_cast<int>(table.num_cuts());

  Schedule best;
  best.objective_s = std::numeric_limits<double>::infinity();
  std::vector<int> cuts(m, 1);
  while (true) {
    BandwidthSolution p2 = solve_bandwidth(table, cuts, total_bandwidth_bps);
    if (p2.objective_s < best.objective_s) {
      best = Schedule{cuts, std::move(p2.bandwidth_bps), p2.objective_s, ExecutionMode::kSplit};
    }
    // Odometer with the last device fastest.
    std::size_t pos = m;
    while (pos > 0 && cuts[pos - 1] == n) cuts[--pos] = 1;
    if (pos == 0) break;
    ++cuts[pos - 1];
  }
  return best;
}

}  // namespace splitsched
