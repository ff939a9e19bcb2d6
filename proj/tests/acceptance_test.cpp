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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "splitsched/cli.hpp"
#include "splitsched/splitsched.hpp"
#include "test_support.hpp"

namespace splitsched {
namespace {

using testing::Rng;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "splitsched");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Bandwidth split equalizes completion and spends the budget.
Outcome bandwidth_split_exactness() {
  Outcome o;
  Rng rng(1001);
  double worst_equalization = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto m = static_cast<std::size_t>(rng.integer(1, 16));
    const auto n = static_cast<std::size_t>(rng.integer(1, 8));
    const CostTable t = testing::random_table(rng, m, n);
    std::vector<int> cuts(m);
    for (auto& c : cuts) c = rng.integer(1, static_cast<int>(n));
    const double budget = rng.uniform(0.1, 1000.0);
    const BandwidthSolution s = solve_bandwidth(t, cuts, budget);
    for (std::size_t i = 0; i < m; ++i) {
      const double ti = t.a(i, cuts[i]) + t.c(cuts[i]) / s.bandwidth_bps[i];
      worst_equalization = std::max(worst_equalization, std::abs(ti - s.objective_s) / s.objective_s);
    }
    const double used = sum(s.bandwidth_bps);
    o.check(used >= budget * (1 - 1e-7) && used <= budget * (1 + 1e-9),
            "budget use out of range on trial " + std::to_string(trial));
  }
  o.check(worst_equalization <= 1e-7, "equalization error " + std::to_string(worst_equalization));

  double worst_closed_form = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const double a1 = rng.uniform(0.01, 100), a2 = rng.uniform(0.01, 100);
    const double c1 = rng.uniform(0.01, 100), c2 = rng.uniform(0.01, 100);
    const double budget = rng.uniform(0.1, 100);
    // Each device gets its own cut so the two C values can differ.
    CostTable t2(2, 2);
    t2.a(0, 1) = a1;
    t2.a(1, 2) = a2;
    t2.c(1) = c1;
    t2.c(2) = c2;
    const double root = testing::two_device_root(a1, a2, c1, c2, budget);
    const double got = solve_bandwidth(t2, {1, 2}, budget).objective_s;
    worst_closed_form = std::max(worst_closed_form, std::abs(got - root) / root);
  }
  CostTable example(2, 1);
  example.a(0, 1) = 1;
  example.a(1, 1) = 3;
  example.c(1) = 4;
  const double want = 4 + std::sqrt(5.0);
  const double got = solve_bandwidth(example, {1, 1}, 2.0).objective_s;
  worst_closed_form = std::max(worst_closed_form, std::abs(got - want) / want);
  o.check(worst_closed_form <= 1e-9, "closed-form error " + std::to_string(worst_closed_form));

  char buf[160];
  std::snprintf(buf, sizeof buf, "max equalization err %.2e, max closed-form err %.2e",
                worst_equalization, worst_closed_form);
  if (o.pass) o.detail = buf;
  return o;
}

struct SmallInstance {
  CostTable table;
  double budget;
};

std::vector<SmallInstance> small_instances() {
  Rng rng(2002);
  std::vector<SmallInstance> out;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<std::size_t>(rng.integer(1, 4));
    const auto n = static_cast<std::size_t>(rng.integer(1, 6));
    out.push_back({testing::random_table(rng, m, n), rng.uniform(0.1, 100.0)});
  }
  return out;
}

// 2. oracle <= solve <= SplitFed on every small instance.
Outcome oracle_sandwich(const std::vector<SmallInstance>& instances) {
  Outcome o;
  double gap_sum = 0.0;
  double gap_max = 0.0;
  int exact = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const auto& [t, budget] = instances[k];
    const double oracle = brute_force_oracle(t, budget).objective_s;
    const double solved = solve(t, budget).schedule.objective_s;
    const double splitfed =
        makespan(t, std::vector<int>(t.num_devices(), mid_cut(t.num_cuts())),
                 equal_split(budget, t.num_devices()));
    o.check(oracle <= solved * (1 + 1e-9), "oracle above solve on instance " + std::to_string(k));
    o.check(solved <= splitfed * (1 + 1e-9), "solve above SplitFed on instance " + std::to_string(k));
    const double gap = solved / oracle - 1.0;
    gap_sum += gap;
    gap_max = std::max(gap_max, gap);
    if (gap <= 1e-9) ++exact;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean gap %.4e, max gap %.4e, optimal on %d/%zu", gap_sum / instances.size(),
                gap_max, exact, instances.size());
  if (o.pass) o.detail = buf;
  return o;
}

// 3. Alternation trace is monotone and converges by no-improvement.
Outcome alternation_behavior(const std::vector<SmallInstance>& instances) {
  Outcome o;
  int converged = 0;
  int max_iterations = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const SolveReport r = solve(instances[k].table, instances[k].budget);
    for (std::size_t s = 1; s < r.objective_trace.size(); ++s) {
      o.check(r.objective_trace[s] <= r.objective_trace[s - 1],
              "trace increases on instance " + std::to_string(k));
    }
    if (r.terminated_by == Termination::kNoImprovement && r.iterations <= 50) ++converged;
    max_iterations = std::max(max_iterations, r.iterations);
  }
  const double share = static_cast<double>(converged) / instances.size();
  o.check(share >= 0.99, "converged share " + std::to_string(share));
  if (o.pass) {
    o.detail = std::to_string(converged) + "/" + std::to_string(instances.size()) +
               " converged, max iterations " + std::to_string(max_iterations);
  }
  return o;
}

// 4. Event simulation matches the analytic round time.
Outcome simulator_equivalence() {
  Outcome o;
  Rng rng(4004);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const FleetProfile f = testing::random_fleet(rng, rng.integer(1, 10), rng.integer(1, 12));
    Schedule s;
    s.mode = trial % 4 == 0 ? ExecutionMode::kFullLocal : ExecutionMode::kSplit;
    std::vector<double> weights(f.num_devices());
    for (auto& w : weights) w = rng.uniform(0.05, 1.0);
    const double total = sum(weights);
    for (std::size_t i = 0; i < f.num_devices(); ++i) {
      s.cuts.push_back(rng.integer(1, static_cast<int>(f.num_cuts())));
      s.bandwidth_bps.push_back(f.total_bandwidth_bps * weights[i] / total);
    }
    const double simulated = simulate_round(f, s).makespan_s;
    const double analytic = round_time(f, s).makespan_s;
    worst = std::max(worst, std::abs(simulated - analytic) / analytic);
  }
  o.check(worst <= 1e-9, "relative difference " + std::to_string(worst));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max relative difference %.2e", worst);
  if (o.pass) o.detail = buf;
  return o;
}

// 5. Testbed-shaped fleet reproduces the qualitative comparison.
Outcome testbed_comparison() {
  Outcome o;
  std::string detail;
  const auto fleet_path = testing::temp_path("testbed.json");
  for (int seed = 0; seed < 10; ++seed) {
    const std::string tag = " (seed " + std::to_string(seed) + ")";
    const CliRun gen = run_cli({"gen-profiles", "--devices", "8", "--classes", "1,3,5,12", "--seed",
                                std::to_string(seed), "--out", fleet_path.string()});
    o.check(gen.code == 0, "gen-profiles failed" + tag);
    const CliRun cmp = run_cli({"compare", "--fleet", fleet_path.string(), "--format", "csv"});
    o.check(cmp.code == 0, "compare failed" + tag);
    if (!o.pass) break;

    std::map<std::string, ComparisonCsvRow> rows;
    for (auto& r : parse_comparison_csv(cmp.out)) rows[r.strategy] = r;
    const double edge = rows["edgesplit"].makespan_s;
    const double split = rows["splitfed"].makespan_s;
    const double adaptive = rows["adaptivefl"].makespan_s;
    const double fedavg = rows["fedavg"].makespan_s;
    o.check(edge < split, "edgesplit not faster than splitfed" + tag);
    o.check(split < adaptive, "splitfed not faster than adaptivefl" + tag);
    o.check(adaptive <= fedavg && adaptive >= 0.9 * fedavg, "adaptivefl not close to fedavg" + tag);
    o.check(rows["edgesplit"].acceleration_vs_fedavg > 1.5, "edgesplit acceleration <= 1.5" + tag);

    // Devices are listed weakest class first.
    const auto slowdowns = slowdowns_from_core_classes(8, {1, 3, 5, 12});
    const auto& cuts = rows["edgesplit"].cuts;
    for (std::size_t a = 0; a < cuts.size(); ++a) {
      for (std::size_t b = 0; b < cuts.size(); ++b) {
        if (slowdowns[a] > slowdowns[b]) {
          o.check(cuts[a] <= cuts[b], "weak device cut deeper than strong" + tag);
        }
      }
    }
    if (seed == 7) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "seed 7: edgesplit %.1fs [%s] %.2fx, splitfed %.1fs, adaptivefl %.1fs, fedavg %.1fs",
                    edge, join(cuts, ",").c_str(), rows["edgesplit"].acceleration_vs_fedavg, split,
                    adaptive, fedavg);
      detail = buf;
    }
  }
  std::filesystem::remove(fleet_path);
  if (o.pass) o.detail = "10/10 seeds; " + detail;
  return o;
}

// 6. On separable fleets, slower devices never get deeper oracle cuts.
Outcome partition_monotonicity() {
  Outcome o;
  Rng rng(6006);
  int violations = 0;
  const std::vector<double> classes{12, 4, 2.4, 1};
  for (int trial = 0; trial < 100; ++trial) {
    SyntheticSpec spec;
    spec.num_cuts = static_cast<std::size_t>(rng.integer(1, 6));
    spec.slowdowns.clear();
    for (int i = rng.integer(1, 4); i > 0; --i) {
      // Half the fleets reuse class factors so equal-speed pairs occur.
      spec.slowdowns.push_back(trial % 2 == 0 ? classes[rng.integer(0, 3)] : rng.uniform(1.0, 12.0));
    }
    spec.total_bandwidth_bps = std::exp(rng.uniform(std::log(1e5), std::log(1e8)));
    spec.batches_per_round = rng.integer(1, 50);
    const FleetProfile f = generate_fleet(spec, static_cast<std::uint64_t>(trial));
    const Schedule oracle = brute_force_oracle(build_cost_table(f), f.total_bandwidth_bps);
    for (std::size_t a = 0; a < f.num_devices(); ++a) {
      for (std::size_t b = 0; b < f.num_devices(); ++b) {
        if (spec.slowdowns[a] >= spec.slowdowns[b] && oracle.cuts[a] > oracle.cuts[b]) ++violations;
      }
    }
  }
  o.check(violations == 0, std::to_string(violations) + " violations");
  if (o.pass) o.detail = "0 violations over 100 fleets";
  return o;
}

// 7. Fixed seeds give byte-identical files and reports.
Outcome determinism_and_round_trip() {
  Outcome o;
  const auto a = testing::temp_path("a.json"), b = testing::temp_path("b.json");
  const std::vector<std::string> gen{"gen-profiles", "--devices", "6", "--classes", "1,2,4", "--layers", "5",
                                    "--seed", "11"};
  auto with_out = [](std::vector<std::string> args, const std::filesystem::path& p) {
    args.push_back("--out");
    args.push_back(p.string());
    return args;
  };
  o.check(run_cli(with_out(gen, a)).code == 0 && run_cli(with_out(gen, b)).code == 0, "gen-profiles failed");
  const std::string text = read_file(a);
  o.check(!text.empty() && text == read_file(b), "fleet files differ");
  o.check(serialize_fleet(load_fleet(a.string())) == text, "serialize/load/serialize not a fixed point");

  for (const std::vector<std::string>& args :
       {std::vector<std::string>{"optimize", "--fleet", a.string(), "--format", "json", "--oracle"},
        std::vector<std::string>{"simulate", "--fleet", a.string(), "--events", "--format", "json"},
        std::vector<std::string>{"compare", "--fleet", a.string(), "--format", "csv", "--rounds", "3"}}) {
    const CliRun first = run_cli(args), second = run_cli(args);
    o.check(first.code == 0 && first.out == second.out, args[0] + " output not reproducible");
  }

  Rng rng(7007);
  for (int trial = 0; trial < 50; ++trial) {
    const FleetProfile f = testing::random_fleet(rng, rng.integer(1, 6), rng.integer(1, 9));
    const std::string s1 = serialize_fleet(f);
    const FleetProfile back = parse_fleet(s1);
    o.check(back == f && serialize_fleet(back) == s1, "random fleet round trip failed");
  }
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  if (o.pass) o.detail = "fleet files, reports and 50 random round trips stable";
  return o;
}

}  // namespace
}  // namespace splitsched

int main() {
  using namespace splitsched;
  using Clock = std::chrono::steady_clock;
  const auto instances = small_instances();

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"AC1 bandwidth split exactness", 5.0, bandwidth_split_exactness},
      {"AC2 oracle <= solve <= SplitFed", 30.0, [&] { return oracle_sandwich(instances); }},
      {"AC3 alternation monotone and convergent", 30.0, [&] { return alternation_behavior(instances); }},
      {"AC4 simulator matches analytic model", 10.0, simulator_equivalence},
      {"AC5 testbed-shaped comparison ordering", 5.0, testbed_comparison},
      {"AC6 partition monotonicity", 60.0, partition_monotonicity},
      {"AC7 determinism and round trip", 60.0, determinism_and_round_trip},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (elapsed > c.budget_s) {
      o.pass = false;
      o.detail += " (took " + std::to_string(elapsed) + " s, limit " + std::to_string(c.budget_s) + " s)";
    }
    std::printf("[%s] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), elapsed);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
