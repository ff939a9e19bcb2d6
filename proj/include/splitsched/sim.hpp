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

// Event-driven simulation of one synchronous training round.
//
// Each device runs this program, one phase after another:
//
//   weight download                       (initial / aggregated weights)
//   repeat b times:
//     local forward  -> uplink activations -> server forward+backward
//                    -> downlink gradients -> local backward
//   weight upload                         (updated client-side weights)
//
// and the server aggregates once every upload has arrived. The exchange with
// the server is blocking: a device idles while the server works on its
// batch, and the server serves all devices concurrently at profiled speed.
// Full local training drops the three server-side phases.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "splitsched/cost.hpp"
#include "splitsched/errors.hpp"
#include "splitsched/profiles.hpp"
#include "splitsched/sched.hpp"

namespace splitsched {

enum class Strategy { kEdgeSplit, kSplitFed, kFedAvg, kAdaptiveFl };

inline constexpr Strategy kAllStrategies[] = {Strategy::kEdgeSplit, Strategy::kSplitFed,
                                              Strategy::kAdaptiveFl, Strategy::kFedAvg};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::kEdgeSplit: return "edgesplit";
    case Strategy::kSplitFed: return "splitfed";
    case Strategy::kFedAvg: return "fedavg";
    case Strategy::kAdaptiveFl: return "adaptivefl";
  }
  return "?";
}

inline std::optional<Strategy> parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

/// Uniform cut for SplitFed: half of the layers, never below 1.
inline int mid_cut(std::size_t num_cuts) {
  return std::max(1, static_cast<int>(num_cuts / 2));
}

/// Concrete cuts and bandwidth for a strategy.
inline Schedule resolve_strategy(const FleetProfile& fleet, Strategy strategy,
                                 const SolveOptions& options = {}) {
  const std::size_t m = fleet.num_devices();
  const double budget = fleet.total_bandwidth_bps;
  const int last = static_cast<int>(fleet.num_cuts());
  switch (strategy) {
    case Strategy::kEdgeSplit:
      return solve(build_cost_table(fleet), budget, options).schedule;
    case Strategy::kSplitFed: {
      Schedule s{std::vector<int>(m, mid_cut(fleet.num_cuts())), equal_split(budget, m), 0.0,
                 ExecutionMode::kSplit};
      s.objective_s = makespan(build_cost_table(fleet), s.cuts, s.bandwidth_bps);
      return s;
    }
    case Strategy::kFedAvg: {
      Schedule s{std::vector<int>(m, last), equal_split(budget, m), 0.0, ExecutionMode::kFullLocal};
      s.objective_s = makespan(build_full_local_cost_table(fleet), s.cuts, s.bandwidth_bps);
      return s;
    }
    case Strategy::kAdaptiveFl: {
      std::vector<int> cuts(m, last);
      BandwidthSolution p2 = solve_bandwidth(build_full_local_cost_table(fleet), cuts, budget);
      return Schedule{std::move(cuts), std::move(p2.bandwidth_bps), p2.objective_s,
                      ExecutionMode::kFullLocal};
    }
  }
  throw SolverError("unknown strategy");
}

enum class Phase {
  kWeightDownload,
  kLocalForward,
  kUplink,
  kServerCompute,
  kDownlink,
  kLocalBackward,
  kWeightUpload,
};

inline const char* to_string(Phase p) {
  switch (p) {
    case Phase::kWeightDownload: return "weight-download";
    case Phase::kLocalForward: return "local-forward";
    case Phase::kUplink: return "uplink";
    case Phase::kServerCompute: return "server-compute";
    case Phase::kDownlink: return "downlink";
    case Phase::kLocalBackward: return "local-backward";
    case Phase::kWeightUpload: return "weight-upload";
  }
  return "?";
}

struct SimEvent {
  std::size_t device = 0;
  /// 1-based batch number; 0 for the weight transfers.
  int batch = 0;
  Phase phase = Phase::kWeightDownload;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const SimEvent&) const = default;
};

struct SimTimeline {
  /// In the order the simulator executed them (by start time, then device).
  std::vector<SimEvent> events;
  /// Time each device finished its weight upload.
  std::vector<double> completion_s;
  /// Aggregation time: the last upload.
  double makespan_s = 0.0;
};

namespace detail {

struct PhaseStep {
  int batch;
  Phase phase;
  double duration_s;
};

inline std::vector<PhaseStep> device_program(const FleetProfile& fleet, const Schedule& schedule,
                                             std::size_t i) {
  const auto k = static_cast<std::size_t>(schedule.cuts[i] - 1);
  const auto& d = fleet.devices[i];
  const auto& s = fleet.server(i);
  const double bw = schedule.bandwidth_bps[i];
  const bool split = schedule.mode == ExecutionMode::kSplit;
  const double weights = CostTable::transfer_time(fleet.model.cum_param_bits[k], bw);
  const double activations = CostTable::transfer_time(fleet.model.activation_bits[k], bw);

  std::vector<PhaseStep> program;
  program.push_back({0, Phase::kWeightDownload, weights});
  for (int batch = 1; batch <= fleet.batches_per_round; ++batch) {
    program.push_back({batch, Phase::kLocalForward, d.fwd_time_s[k]});
    if (split) {
      program.push_back({batch, Phase::kUplink, activations});
      program.push_back({batch, Phase::kServerCompute, s.fwd_time_s[k] + s.bwd_time_s[k]});
      program.push_back({batch, Phase::kDownlink, activations});
    }
    program.push_back({batch, Phase::kLocalBackward, d.bwd_time_s[k]});
  }
  program.push_back({0, Phase::kWeightUpload, weights});
  return program;
}

struct Wakeup {
  double time;
  std::size_t seq;
  std::size_t device;

  bool operator>(const Wakeup& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

}  // namespace detail

/// Simulates one round starting at t = 0.
inline SimTimeline simulate_round(const FleetProfile& fleet, const Schedule& schedule) {
  check_feasible(fleet, schedule);
  const std::size_t m = fleet.num_devices();

  std::vector<std::vector<detail::PhaseStep>> programs;
  programs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) programs.push_back(detail::device_program(fleet, schedule, i));
  std::vector<std::size_t> cursor(m, 0);

  SimTimeline timeline;
  timeline.completion_s.assign(m, 0.0);
  std::priority_queue<detail::Wakeup, std::vector<detail::Wakeup>, std::greater<>> queue;
  std::size_t seq = 0;
  for (std::size_t i = 0; i < m; ++i) queue.push({0.0, seq++, i});

  while (!queue.empty()) {
    const detail::Wakeup w = queue.top();
    queue.pop();
    auto& pc = cursor[w.device];
    if (pc == programs[w.device].size()) {
      timeline.completion_s[w.device] = w.time;
      timeline.makespan_s = std::max(timeline.makespan_s, w.time);
      continue;
    }
    const detail::PhaseStep& step = programs[w.device][pc++];
    const double end = w.time + step.duration_s;
    timeline.events.push_back({w.device, step.batch, step.phase, w.time, end});
    queue.push({end, seq++, w.device});
  }
  return timeline;
}

struct StrategyResult {
  Strategy strategy = Strategy::kFedAvg;
  Schedule schedule;
  std::vector<double> round_makespan_s;
  double mean_makespan_s = 0.0;
  /// FedAvg mean makespan / this strategy's mean makespan.
  double acceleration_vs_fedavg = 1.0;
};

struct ComparisonReport {
  std::vector<StrategyResult> results;
  double fedavg_mean_makespan_s = 0.0;
  int rounds = 1;
};

/// Resolves and simulates every strategy for the given number of rounds.
/// Profiles are static, so every round of a strategy repeats the same
/// timeline; FedAvg is always simulated as the acceleration baseline.
inline ComparisonReport run_experiment(const FleetProfile& fleet,
                                       const std::vector<Strategy>& strategies, int rounds,
                                       const SolveOptions& options = {}) {
  if (rounds < 1) throw ValidationError("rounds must be at least 1");

  auto simulate = [&](Strategy strategy) {
    StrategyResult r;
    r.strategy = strategy;
    r.schedule = resolve_strategy(fleet, strategy, options);
    for (int round = 0; round < rounds; ++round) {
      r.round_makespan_s.push_back(simulate_round(fleet, r.schedule).makespan_s);
    }
    double sum = 0.0;
    for (double t : r.round_makespan_s) sum += t;
    r.mean_makespan_s = sum / rounds;
    return r;
  };

  ComparisonReport report;
  report.rounds = rounds;
  report.fedavg_mean_makespan_s = simulate(Strategy::kFedAvg).mean_makespan_s;
  for (Strategy s : strategies) {
    StrategyResult r = simulate(s);
    r.acceleration_vs_fedavg = r.mean_makespan_s > 0.0
                                   ? report.fedavg_mean_makespan_s / r.mean_makespan_s
                                   : (report.fedavg_mean_makespan_s > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace splitsched
