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

// Analytic per-round time model.
//
// For device i cutting at layer j with link bandwidth B_i, one round of b
// batches takes
//
//   forward    T^f_ij + S^f_ij                    per batch
//   backward   S^b_ij + T^b_ij                    per batch
//   act. comm  2 * O_j / B_i                      per batch (activations up,
//                                                 gradients down)
//   weights    2 * P_j / B_i                      once per round (receive
//                                                 initial, send updated)
//   round      b * (forward + backward + act. comm) + weights
//
// which collapses to round = A_ij + C_j / B_i with
//   A_ij = b * (T^f_ij + S^f_ij + S^b_ij + T^b_ij)
//   C_j  = 2 * (b * O_j + P_j).
//
// Full local training (no split) is the same model with nothing offloaded:
// the server terms and activation traffic vanish and only weights move.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "splitsched/errors.hpp"
#include "splitsched/profiles.hpp"

namespace splitsched {

/// Activations go up and gradients of the same shape come down every batch.
inline constexpr double kActivationTransfersPerBatch = 2.0;
/// Initial weights come down and updated weights go up once per round.
inline constexpr double kWeightTransfersPerRound = 2.0;

/// Relative slack on the bandwidth budget accepted by feasibility checks.
inline constexpr double kBandwidthTolerance = 1e-9;

enum class ExecutionMode {
  kSplit,       // layers 1..j on the device, j+1..N on the server
  kFullLocal,   // whole model on the device, server only aggregates
};

inline const char* to_string(ExecutionMode mode) {
  return mode == ExecutionMode::kSplit ? "split" : "full-local";
}

/// A cut index and bandwidth share for every device. Cuts are 1-based.
struct Schedule {
  std::vector<int> cuts;
  std::vector<double> bandwidth_bps;
  double objective_s = 0.0;
  ExecutionMode mode = ExecutionMode::kSplit;

  std::size_t num_devices() const { return cuts.size(); }

  bool operator==(const Schedule&) const = default;
};

/// A_ij (seconds) and C_j (bits) for every device and cut.
class CostTable {
 public:
  CostTable() = default;
  CostTable(std::size_t num_devices, std::size_t num_cuts)
      : num_devices_(num_devices), num_cuts_(num_cuts),
        a_(num_devices * num_cuts, 0.0), c_(num_cuts, 0.0) {}

  std::size_t num_devices() const { return num_devices_; }
  std::size_t num_cuts() const { return num_cuts_; }

  /// cut is 1-based.
  double a(std::size_t device, int cut) const { return a_[index(device, cut)]; }
  double& a(std::size_t device, int cut) { return a_[index(device, cut)]; }
  double c(int cut) const { return c_[static_cast<std::size_t>(cut - 1)]; }
  double& c(int cut) { return c_[static_cast<std::size_t>(cut - 1)]; }

  /// A_ij + C_j / B_i. Zero traffic needs no link; traffic over a zero-width
  /// link never completes.
  double round_time(std::size_t device, int cut, double bandwidth_bps) const {
    return a(device, cut) + transfer_time(c(cut), bandwidth_bps);
  }

  static double transfer_time(double bits, double bandwidth_bps) {
    if (bits == 0.0) return 0.0;
    if (bandwidth_bps <= 0.0) return std::numeric_limits<double>::infinity();
    return bits / bandwidth_bps;
  }

  bool operator==(const CostTable&) const = default;

 private:
  std::size_t index(std::size_t device, int cut) const {
    assert(device < num_devices_ && cut >= 1 && static_cast<std::size_t>(cut) <= num_cuts_);
    return device * num_cuts_ + static_cast<std::size_t>(cut - 1);
  }

  std::size_t num_devices_ = 0;
  std::size_t num_cuts_ = 0;
  std::vector<double> a_;
  std::vector<double> c_;
};

inline CostTable build_cost_table(const FleetProfile& fleet) {
  const std::size_t m = fleet.num_devices();
  const std::size_t n = fleet.num_cuts();
  const double b = fleet.batches_per_round;
  CostTable table(m, n);
  for (std::size_t k = 0; k < n; ++k) {
    const int cut = static_cast<int>(k + 1);
    table.c(cut) = kWeightTransfersPerRound *
                   (b * fleet.model.activation_bits[k] + fleet.model.cum_param_bits[k]);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& d = fleet.devices[i];
      const auto& s = fleet.server(i);
      table.a(i, cut) = b * (d.fwd_time_s[k] + s.fwd_time_s[k] + s.bwd_time_s[k] + d.bwd_time_s[k]);
    }
  }
  return table;
}

/// Coefficients for training layers 1..j locally with nothing offloaded:
/// A_ij = b * (T^f_ij + T^b_ij), C_j = 2 * P_j. Column N is plain FedAvg.
inline CostTable build_full_local_cost_table(const FleetProfile& fleet) {
  const std::size_t m = fleet.num_devices();
  const std::size_t n = fleet.num_cuts();
  const double b = fleet.batches_per_round;
  CostTable table(m, n);
  for (std::size_t k = 0; k < n; ++k) {
    const int cut = static_cast<int>(k + 1);
    table.c(cut) = kWeightTransfersPerRound * fleet.model.cum_param_bits[k];
    for (std::size_t i = 0; i < m; ++i) {
      const auto& d = fleet.devices[i];
      table.a(i, cut) = b * (d.fwd_time_s[k] + d.bwd_time_s[k]);
    }
  }
  return table;
}

inline CostTable cost_table_for(const FleetProfile& fleet, ExecutionMode mode) {
  return mode == ExecutionMode::kSplit ? build_cost_table(fleet)
                                       : build_full_local_cost_table(fleet);
}

/// max_i (A_i,cut(i) + C_cut(i) / B_i).
inline double makespan(const CostTable& table, const std::vector<int>& cuts,
                       const std::vector<double>& bandwidth_bps) {
  double worst = 0.0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    worst = std::max(worst, table.round_time(i, cuts[i], bandwidth_bps[i]));
  }
  return worst;
}

struct DeviceRoundTime {
  double forward_s = 0.0;          // per batch, device + server
  double backward_s = 0.0;         // per batch, server + device
  double activation_comm_s = 0.0;  // per batch, up + down
  double weight_comm_s = 0.0;      // per round
  double round_s = 0.0;

  bool operator==(const DeviceRoundTime&) const = default;
};

struct RoundBreakdown {
  int batches_per_round = 1;
  std::vector<DeviceRoundTime> devices;
  double makespan_s = 0.0;
};

/// Checks cut range, bandwidth signs and the budget. Zero bandwidth is
/// allowed only where the device moves no data.
inline void check_feasible(const FleetProfile& fleet, const Schedule& schedule) {
  const std::size_t m = fleet.num_devices();
  const std::size_t n = fleet.num_cuts();
  if (schedule.cuts.size() != m || schedule.bandwidth_bps.size() != m) {
    throw InfeasibleSchedule("schedule covers " + std::to_string(schedule.cuts.size()) +
                             " devices, fleet has " + std::to_string(m));
  }
  const CostTable table = cost_table_for(fleet, schedule.mode);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const int cut = schedule.cuts[i];
    if (cut < 1 || static_cast<std::size_t>(cut) > n) {
      throw InfeasibleSchedule("device " + std::to_string(i) + ": cut " + std::to_string(cut) +
                               " outside 1.." + std::to_string(n));
    }
    const double bw = schedule.bandwidth_bps[i];
    if (!std::isfinite(bw) || bw < 0.0 || (bw == 0.0 && table.c(cut) > 0.0)) {
      throw InfeasibleSchedule("device " + std::to_string(i) + ": bandwidth " +
                               std::to_string(bw) + " bps cannot carry its traffic");
    }
    total += bw;
  }
  if (total > fleet.total_bandwidth_bps * (1.0 + kBandwidthTolerance)) {
    throw InfeasibleSchedule("bandwidth sum " + std::to_string(total) + " bps exceeds budget " +
                             std::to_string(fleet.total_bandwidth_bps) + " bps");
  }
}

/// Per-device time breakdown of one round under a feasible schedule.
inline RoundBreakdown round_time(const FleetProfile& fleet, const Schedule& schedule) {
  check_feasible(fleet, schedule);
  const double b = fleet.batches_per_round;
  const bool split = schedule.mode == ExecutionMode::kSplit;
  const CostTable table = cost_table_for(fleet, schedule.mode);

  RoundBreakdown out;
  out.batches_per_round = fleet.batches_per_round;
  for (std::size_t i = 0; i < fleet.num_devices(); ++i) {
    const auto k = static_cast<std::size_t>(schedule.cuts[i] - 1);
    const auto& d = fleet.devices[i];
    const auto& s = fleet.server(i);
    const double bw = schedule.bandwidth_bps[i];

    DeviceRoundTime t;
    t.forward_s = d.fwd_time_s[k] + (split ? s.fwd_time_s[k] : 0.0);
    t.backward_s = (split ? s.bwd_time_s[k] : 0.0) + d.bwd_time_s[k];
    t.activation_comm_s =
        split ? CostTable::transfer_time(kActivationTransfersPerBatch * fleet.model.activation_bits[k], bw)
              : 0.0;
    t.weight_comm_s =
        CostTable::transfer_time(kWeightTransfersPerRound * fleet.model.cum_param_bits[k], bw);
    t.round_s = b * (t.forward_s + t.backward_s + t.activation_comm_s) + t.weight_comm_s;

    [[maybe_unused]] const double collapsed = table.round_time(i, schedule.cuts[i], bw);
    assert(std::abs(collapsed - t.round_s) <= 1e-9 * std::max(1.0, std::abs(t.round_s)));

    out.makespan_s = std::max(out.makespan_s, t.round_s);
    out.devices.push_back(t);
  }
  return out;
}

}  // namespace splitsched
