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

// Command-line front end: gen-profiles, optimize, simulate, compare.
//
// Exit codes: 0 success, 2 usage, 3 input (parse or validation), 4 solver
// (including simulator/analytic disagreement), 5 output I/O.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splitsched/cost.hpp"
#include "splitsched/errors.hpp"
#include "splitsched/profiles.hpp"
#include "splitsched/report.hpp"
#include "splitsched/sched.hpp"
#include "splitsched/sim.hpp"
#include "splitsched/synthetic.hpp"

namespace splitsched::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitSolver = 4;
inline constexpr int kExitIo = 5;

/// Relative tolerance for the simulated vs analytic makespan check.
inline constexpr double kSimAgreementTolerance = 1e-9;

enum class Format { kTable, kCsv, kJson };

struct Config {
  std::string subcommand;
  std::string fleet_path;
  std::string spec_path;
  std::string out_path;
  std::optional<double> bandwidth_bps;
  std::optional<int> batches;
  std::uint64_t seed = 0;
  int max_iters = 50;
  Format format = Format::kTable;
  bool oracle = false;
  double oracle_cap = kDefaultOracleCap;
  // gen-profiles
  std::size_t devices = 8;
  std::vector<double> classes = {1, 3, 5, 12};
  std::size_t layers = 16;
  std::optional<double> server_factor;
  // simulate / compare
  std::string strategy = "edgesplit";
  bool events = false;
  int rounds = 1;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline FleetProfile load_with_overrides(const Config& cfg) {
  FleetProfile fleet = load_fleet(cfg.fleet_path);
  if (cfg.bandwidth_bps) fleet.total_bandwidth_bps = *cfg.bandwidth_bps;
  if (cfg.batches) fleet.batches_per_round = *cfg.batches;
  validate(fleet);
  return fleet;
}

inline void emit(const Config& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) throw OutputError("cannot write '" + cfg.out_path + "'");
  file << text;
  if (!file) throw OutputError("failed writing '" + cfg.out_path + "'");
}

inline std::string schedule_table(const Schedule& s) {
  std::ostringstream out;
  out << "device  cut  bandwidth_bps\n";
  for (std::size_t i = 0; i < s.cuts.size(); ++i) {
    out << std::setw(6) << i << std::setw(5) << s.cuts[i] << "  " << format_short(s.bandwidth_bps[i], 9)
        << "\n";
  }
  out << "objective_s " << format_short(s.objective_s, 9) << "\n";
  return out.str();
}

inline int cmd_gen_profiles(const Config& cfg, std::ostream& out, std::ostream& err,
                            bool devices_given, bool classes_given, bool layers_given) {
  SyntheticSpec spec;
  if (!cfg.spec_path.empty()) {
    std::ifstream in(cfg.spec_path);
    if (!in) throw ParseError("cannot open synthetic spec '" + cfg.spec_path + "'");
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("synthetic spec: ") + e.what());
    }
    spec = synthetic_spec_from_json(doc);
  }
  if (cfg.spec_path.empty() || devices_given || classes_given) {
    spec.slowdowns = slowdowns_from_core_classes(cfg.devices, cfg.classes);
  }
  if (cfg.spec_path.empty() || layers_given) spec.num_cuts = cfg.layers;
  if (cfg.bandwidth_bps) spec.total_bandwidth_bps = *cfg.bandwidth_bps;
  if (cfg.batches) spec.batches_per_round = *cfg.batches;
  if (cfg.server_factor) spec.server_factor = *cfg.server_factor;

  const FleetProfile fleet = generate_fleet(spec, cfg.seed);
  emit(cfg, serialize_fleet(fleet), out);
  err << "generated fleet: M=" << fleet.num_devices() << " N=" << fleet.num_cuts()
      << " B=" << format_short(fleet.total_bandwidth_bps) << " bps b=" << fleet.batches_per_round
      << " seed=" << cfg.seed << "\n";
  return kExitOk;
}

inline int cmd_optimize(const Config& cfg, std::ostream& out) {
  const FleetProfile fleet = load_with_overrides(cfg);
  const CostTable table = build_cost_table(fleet);
  const SolveReport report = solve(table, fleet.total_bandwidth_bps, SolveOptions{cfg.max_iters});
  std::optional<Schedule> oracle;
  if (cfg.oracle) oracle = brute_force_oracle(table, fleet.total_bandwidth_bps, cfg.oracle_cap);
  const double gap =
      oracle ? (oracle->objective_s > 0.0 ? report.schedule.objective_s / oracle->objective_s - 1.0 : 0.0)
             : 0.0;

  std::string text;
  switch (cfg.format) {
    case Format::kJson: {
      Json doc = solve_report_to_json(report);
      doc["breakdown"] = breakdown_to_json(round_time(fleet, report.schedule), report.schedule);
      if (oracle) {
        doc["oracle"] = schedule_to_json(*oracle);
        doc["oracle_gap"] = gap;
      }
      text = doc.dump(2) + "\n";
      break;
    }
    case Format::kCsv:
      text = breakdown_to_csv(round_time(fleet, report.schedule), report.schedule);
      break;
    case Format::kTable: {
      std::ostringstream s;
      s << schedule_table(report.schedule);
      s << "iterations  " << report.iterations << " (" << to_string(report.terminated_by) << ")\n";
      s << "trace       ";
      for (double t : report.objective_trace) s << format_short(t, 9) << " ";
      s << "\n";
      if (oracle) {
        s << "oracle_s    " << format_short(oracle->objective_s, 9) << "  cuts ["
          << join(oracle->cuts, ",") << "]\n";
        s << "oracle_gap  " << format_short(gap, 6) << "\n";
      }
      text = s.str();
      break;
    }
  }
  emit(cfg, text, out);
  return kExitOk;
}

inline int cmd_simulate(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto strategy = parse_strategy(cfg.strategy);
  if (!strategy) throw UsageError("unknown strategy '" + cfg.strategy + "'");
  const FleetProfile fleet = load_with_overrides(cfg);
  const Schedule schedule = resolve_strategy(fleet, *strategy, SolveOptions{cfg.max_iters});
  const SimTimeline timeline = simulate_round(fleet, schedule);
  const RoundBreakdown analytic = round_time(fleet, schedule);
  const double rel_diff = std::abs(timeline.makespan_s - analytic.makespan_s) /
                          std::max(std::abs(analytic.makespan_s), 1e-300);
  const bool agree = timeline.makespan_s == analytic.makespan_s || rel_diff <= kSimAgreementTolerance;

  std::string text;
  switch (cfg.format) {
    case Format::kJson: {
      Json doc = Json::object();
      doc["strategy"] = to_string(*strategy);
      doc["schedule"] = schedule_to_json(schedule);
      doc["timeline"] = timeline_to_json(timeline, cfg.events);
      doc["analytic_makespan_s"] = analytic.makespan_s;
      doc["analytic_agreement"] = agree;
      text = doc.dump(2) + "\n";
      break;
    }
    case Format::kCsv:
      text = cfg.events ? events_to_csv(timeline) : breakdown_to_csv(analytic, schedule);
      break;
    case Format::kTable: {
      std::ostringstream s;
      s << "strategy " << to_string(*strategy) << "\n";
      s << "device  cut  bandwidth_bps  completion_s\n";
      for (std::size_t i = 0; i < schedule.cuts.size(); ++i) {
        s << std::setw(6) << i << std::setw(5) << schedule.cuts[i] << "  " << std::setw(13)
          << format_short(schedule.bandwidth_bps[i]) << "  " << format_short(timeline.completion_s[i], 9)
          << "\n";
      }
      s << "makespan_s " << format_short(timeline.makespan_s, 9) << "  (analytic "
        << format_short(analytic.makespan_s, 9) << ", " << (agree ? "agree" : "DISAGREE") << ")\n";
      if (cfg.events) {
        for (const auto& e : timeline.events) {
          s << "  t=" << format_short(e.start_s, 9) << ".." << format_short(e.end_s, 9) << " dev "
            << e.device << " batch " << e.batch << " " << to_string(e.phase) << "\n";
        }
      }
      text = s.str();
      break;
    }
  }
  emit(cfg, text, out);
  if (!agree) {
    err << "error: simulated makespan " << format_number(timeline.makespan_s)
        << " disagrees with analytic " << format_number(analytic.makespan_s) << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

inline int cmd_compare(const Config& cfg, std::ostream& out) {
  const FleetProfile fleet = load_with_overrides(cfg);
  const std::vector<Strategy> strategies(std::begin(kAllStrategies), std::end(kAllStrategies));
  const ComparisonReport report =
      run_experiment(fleet, strategies, cfg.rounds, SolveOptions{cfg.max_iters});
  std::string text;
  switch (cfg.format) {
    case Format::kJson: text = comparison_to_json(report).dump(2) + "\n"; break;
    case Format::kCsv: text = comparison_to_csv(report); break;
    case Format::kTable: text = comparison_table(report); break;
  }
  emit(cfg, text, out);
  return kExitOk;
}

}  // namespace detail

/// Runs the CLI on `args` (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Split-learning schedule optimizer and round-time simulator", "splitsched"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{
      {"table", Format::kTable}, {"csv", Format::kCsv}, {"json", Format::kJson}};
  auto positive = CLI::PositiveNumber;

  auto common = [&](CLI::App* sub, bool needs_fleet) {
    if (needs_fleet) sub->add_option("--fleet", cfg.fleet_path, "Fleet profile file")->required();
    sub->add_option("--bandwidth-bps", cfg.bandwidth_bps, "Override total bandwidth B (bits/s)")
        ->check(positive);
    sub->add_option("--batches", cfg.batches, "Override batches per round b")->check(positive);
    sub->add_option("--seed", cfg.seed, "Random seed (default 0)");
    sub->add_option("--format", cfg.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    sub->add_option("--out", cfg.out_path, "Write output to this file instead of stdout");
    sub->add_option("--max-iters", cfg.max_iters, "Alternation iteration cap")->check(positive);
  };

  CLI::App* gen = app.add_subcommand("gen-profiles", "Generate a synthetic heterogeneous fleet");
  common(gen, false);
  auto* devices_opt = gen->add_option("--devices", cfg.devices, "Number of devices M")->check(positive);
  auto* classes_opt = gen->add_option("--classes", cfg.classes, "CPU-core count per device class")
                          ->delimiter(',')
                          ->check(positive);
  auto* layers_opt = gen->add_option("--layers", cfg.layers, "Number of cut layers N")->check(positive);
  gen->add_option("--server-factor", cfg.server_factor, "Server cost relative to base layer cost")
      ->check(positive);
  gen->add_option("--spec", cfg.spec_path, "Synthetic spec file (JSON)");

  CLI::App* opt = app.add_subcommand("optimize", "Choose cuts and bandwidth shares");
  common(opt, true);
  opt->add_flag("--oracle", cfg.oracle, "Also run the exhaustive search and report the gap");
  opt->add_option("--oracle-cap", cfg.oracle_cap, "Maximum N^M for --oracle")->check(positive);

  CLI::App* sim = app.add_subcommand("simulate", "Simulate one round under a strategy");
  common(sim, true);
  sim->add_option("--strategy", cfg.strategy, "edgesplit | splitfed | fedavg | adaptivefl");
  sim->add_flag("--events", cfg.events, "Emit the per-phase event log");

  CLI::App* cmp = app.add_subcommand("compare", "Compare all strategies");
  common(cmp, true);
  cmp->add_option("--rounds", cfg.rounds, "Rounds to simulate per strategy")->check(positive);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return detail::cmd_gen_profiles(cfg, out, err, devices_opt->count() > 0,
                                      classes_opt->count() > 0, layers_opt->count() > 0);
    }
    if (opt->parsed()) return detail::cmd_optimize(cfg, out);
    if (sim->parsed()) return detail::cmd_simulate(cfg, out, err);
    if (cmp->parsed()) return detail::cmd_compare(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InfeasibleSchedule& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const OutputError& e) {
    err << "output error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace splitsched::cli
