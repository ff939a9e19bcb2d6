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

// Output formats: structured documents, CSV and aligned text tables.
//
// Numbers in CSV and JSON are written with 17 significant digits, enough to
// reparse every double exactly. Lists inside a CSV cell (cuts, bandwidths)
// are joined with ';'. Cuts are always 1-based.

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "splitsched/cost.hpp"
#include "splitsched/errors.hpp"
#include "splitsched/profiles.hpp"
#include "splitsched/sched.hpp"
#include "splitsched/sim.hpp"

namespace splitsched {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(double v, int digits = 6) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values, const char* sep = ";") {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += format_number(values[k]);
    } else {
      out += std::to_string(values[k]);
    }
  }
  return out;
}

// --- schedules --------------------------------------------------------------

inline Json schedule_to_json(const Schedule& s) {
  Json out = Json::object();
  out["mode"] = to_string(s.mode);
  out["cuts"] = s.cuts;
  out["bandwidth_bps"] = s.bandwidth_bps;
  out["objective_s"] = s.objective_s;
  return out;
}

inline Json solve_report_to_json(const SolveReport& r) {
  Json out = schedule_to_json(r.schedule);
  out["iterations"] = r.iterations;
  out["objective_trace"] = r.objective_trace;
  out["terminated_by"] = to_string(r.terminated_by);
  return out;
}

// --- round breakdowns -------------------------------------------------------

inline Json breakdown_to_json(const RoundBreakdown& b, const Schedule& s) {
  Json devices = Json::array();
  for (std::size_t i = 0; i < b.devices.size(); ++i) {
    const auto& d = b.devices[i];
    Json row = Json::object();
    row["device"] = i;
    row["cut"] = s.cuts[i];
    row["bandwidth_bps"] = s.bandwidth_bps[i];
    row["forward_s"] = d.forward_s;
    row["backward_s"] = d.backward_s;
    row["activation_comm_s"] = d.activation_comm_s;
    row["weight_comm_s"] = d.weight_comm_s;
    row["round_s"] = d.round_s;
    devices.push_back(std::move(row));
  }
  Json out = Json::object();
  out["batches_per_round"] = b.batches_per_round;
  out["devices"] = std::move(devices);
  out["makespan_s"] = b.makespan_s;
  return out;
}

inline constexpr const char* kBreakdownCsvHeader =
    "device,cut,bandwidth_bps,forward_s,backward_s,activation_comm_s,weight_comm_s,round_s";

/// One row per device, then a `fleet` row carrying only the makespan.
inline std::string breakdown_to_csv(const RoundBreakdown& b, const Schedule& s) {
  std::ostringstream out;
  out << kBreakdownCsvHeader << "\n";
  for (std::size_t i = 0; i < b.devices.size(); ++i) {
    const auto& d = b.devices[i];
    out << i << "," << s.cuts[i] << "," << format_number(s.bandwidth_bps[i]) << ","
        << format_number(d.forward_s) << "," << format_number(d.backward_s) << ","
        << format_number(d.activation_comm_s) << "," << format_number(d.weight_comm_s) << ","
        << format_number(d.round_s) << "\n";
  }
  out << "fleet,,,,,,," << format_number(b.makespan_s) << "\n";
  return out.str();
}

// --- timelines --------------------------------------------------------------

inline Json timeline_to_json(const SimTimeline& t, bool with_events) {
  Json out = Json::object();
  out["completion_s"] = t.completion_s;
  out["makespan_s"] = t.makespan_s;
  if (with_events) {
    Json events = Json::array();
    for (const auto& e : t.events) {
      Json row = Json::object();
      row["device"] = e.device;
      row["batch"] = e.batch;
      row["phase"] = to_string(e.phase);
      row["start_s"] = e.start_s;
      row["end_s"] = e.end_s;
      events.push_back(std::move(row));
    }
    out["events"] = std::move(events);
  }
  return out;
}

inline std::string events_to_csv(const SimTimeline& t) {
  std::ostringstream out;
  out << "device,batch,phase,start_s,end_s\n";
  for (const auto& e : t.events) {
    out << e.device << "," << e.batch << "," << to_string(e.phase) << ","
        << format_number(e.start_s) << "," << format_number(e.end_s) << "\n";
  }
  return out.str();
}

// --- comparisons ------------------------------------------------------------

inline Json comparison_to_json(const ComparisonReport& r) {
  Json out = Json::object();
  out["rounds"] = r.rounds;
  out["fedavg_mean_makespan_s"] = r.fedavg_mean_makespan_s;
  Json rows = Json::array();
  for (const auto& s : r.results) {
    Json row = Json::object();
    row["strategy"] = to_string(s.strategy);
    row["schedule"] = schedule_to_json(s.schedule);
    row["round_makespan_s"] = s.round_makespan_s;
    row["mean_makespan_s"] = s.mean_makespan_s;
    row["acceleration_vs_fedavg"] = s.acceleration_vs_fedavg;
    rows.push_back(std::move(row));
  }
  out["strategies"] = std::move(rows);
  return out;
}

inline constexpr const char* kComparisonCsvHeader =
    "strategy,round,makespan_s,acceleration_vs_fedavg,cuts,bandwidth_bps";

/// One row per strategy per round (1-based), ready for plotting.
inline std::string comparison_to_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << kComparisonCsvHeader << "\n";
  for (const auto& s : r.results) {
    for (std::size_t k = 0; k < s.round_makespan_s.size(); ++k) {
      out << to_string(s.strategy) << "," << k + 1 << "," << format_number(s.round_makespan_s[k])
          << "," << format_number(s.acceleration_vs_fedavg) << "," << join(s.schedule.cuts) << ","
          << join(s.schedule.bandwidth_bps) << "\n";
    }
  }
  return out.str();
}

struct ComparisonCsvRow {
  std::string strategy;
  int round = 0;
  double makespan_s = 0.0;
  double acceleration_vs_fedavg = 0.0;
  std::vector<int> cuts;
  std::vector<double> bandwidth_bps;

  bool operator==(const ComparisonCsvRow&) const = default;
};

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(text);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

inline std::vector<ComparisonCsvRow> parse_comparison_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kComparisonCsvHeader) {
    throw ParseError("comparison csv: unexpected header");
  }
  std::vector<ComparisonCsvRow> rows;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() != 6) throw ParseError("comparison csv: expected 6 columns: " + line);
      ComparisonCsvRow row;
      row.strategy = cells[0];
      row.round = std::stoi(cells[1]);
      row.makespan_s = std::stod(cells[2]);
      row.acceleration_vs_fedavg = std::stod(cells[3]);
      for (const auto& c : split(cells[4], ';')) row.cuts.push_back(std::stoi(c));
      for (const auto& c : split(cells[5], ';')) row.bandwidth_bps.push_back(std::stod(c));
      rows.push_back(std::move(row));
    }
  } catch (const std::logic_error& e) {
    throw ParseError(std::string("comparison csv: bad number: ") + e.what());
  }
  return rows;
}

/// Human-readable comparison in the usual layout: one row per strategy with
/// mean makespan, partition points and acceleration over FedAvg.
inline std::string comparison_table(const ComparisonReport& r) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "strategy" << std::right << std::setw(16) << "makespan_s"
      << std::setw(14) << "acceleration" << "  " << std::left << "partition_points" << "\n";
  for (const auto& s : r.results) {
    out << std::left << std::setw(12) << to_string(s.strategy) << std::right << std::setw(16)
        << format_short(s.mean_makespan_s) << std::setw(13)
        << format_short(s.acceleration_vs_fedavg, 3) << "x" << "  " << std::left << "["
        << join(s.schedule.cuts, ",") << "]" << "\n";
  }
  return out.str();
}

}  // namespace splitsched
