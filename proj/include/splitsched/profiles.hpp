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

// Input data for the round-time model: model layer statistics, per-device and
// server timing profiles, and the network budget.
//
// Units are fixed across the library: sizes in bits, bandwidth in bits per
// second, times in seconds. Parameter counts must be converted to bits
// (count x 32 for fp32) before they are written into a profile.
//
// All per-cut lists have one entry per feasible cut layer. Entry k of a list
// describes cut j = k + 1; cut j means layers 1..j run on the device and
// layers j+1..end run on the server.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "splitsched/errors.hpp"

namespace splitsched {

/// Layer statistics of the model being trained.
struct ModelProfile {
  std::string name;
  /// O_j: size of the cut layer's output for one full batch, bits.
  std::vector<double> activation_bits;
  /// P_j: total size of the parameters of layers 1..j, bits.
  std::vector<double> cum_param_bits;

  std::size_t num_cuts() const { return activation_bits.size(); }

  bool operator==(const ModelProfile&) const = default;
};

/// Local compute cost of one device, one batch.
struct DeviceProfile {
  std::string device_id;
  /// T^f_j: forward pass of layers 1..j on the device, seconds.
  std::vector<double> fwd_time_s;
  /// T^b_j: backward pass of layers j..1 on the device, seconds.
  std::vector<double> bwd_time_s;

  bool operator==(const DeviceProfile&) const = default;
};

/// Server compute cost for the part of the model above the cut, one batch.
struct ServerProfile {
  /// S^f_j: forward of layers j+1..end, seconds.
  std::vector<double> fwd_time_s;
  /// S^b_j: backward from the end down to layer j+1, seconds.
  std::vector<double> bwd_time_s;

  bool operator==(const ServerProfile&) const = default;
};

struct FleetProfile {
  ModelProfile model;
  std::vector<DeviceProfile> devices;
  /// One entry per device. A shared server profile is stored expanded.
  std::vector<ServerProfile> servers;
  double total_bandwidth_bps = 0.0;
  int batches_per_round = 1;

  std::size_t num_devices() const { return devices.size(); }
  std::size_t num_cuts() const { return model.num_cuts(); }
  const ServerProfile& server(std::size_t device) const { return servers[device]; }

  bool operator==(const FleetProfile&) const = default;
};

namespace detail {

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

inline void check_series(const std::vector<double>& values, std::size_t expected,
                         const std::string& field) {
  require(values.size() == expected, field + ": expected " + std::to_string(expected) +
                                         " entries, got " + std::to_string(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(std::isfinite(values[k]), field + "[" + std::to_string(k + 1) + "] is not finite");
    require(values[k] >= 0.0, field + "[" + std::to_string(k + 1) + "] is negative");
  }
}

inline void check_non_decreasing(const std::vector<double>& values, const std::string& field) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    require(values[k] >= values[k - 1],
            field + " not non-decreasing (at cut " + std::to_string(k + 1) + ")");
  }
}

inline void check_non_increasing(const std::vector<double>& values, const std::string& field) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    require(values[k] <= values[k - 1],
            field + " not non-increasing (at cut " + std::to_string(k + 1) + ")");
  }
}

}  // namespace detail

inline void validate(const ModelProfile& model) {
  const std::size_t n = model.num_cuts();
  detail::require(n >= 1, "model.num_cuts must be at least 1");
  detail::check_series(model.activation_bits, n, "activation_bits");
  detail::check_series(model.cum_param_bits, n, "cum_param_bits");
  detail::check_non_decreasing(model.cum_param_bits, "cum_param_bits");
}

/// Checks every profile invariant; throws ValidationError naming the field.
inline void validate(const FleetProfile& fleet) {
  validate(fleet.model);
  const std::size_t n = fleet.num_cuts();
  detail::require(!fleet.devices.empty(), "devices: at least one device required");
  detail::require(fleet.servers.size() == fleet.devices.size(),
                  "server: expected one profile per device (got " +
                      std::to_string(fleet.servers.size()) + " for " +
                      std::to_string(fleet.devices.size()) + " devices)");
  detail::require(std::isfinite(fleet.total_bandwidth_bps) && fleet.total_bandwidth_bps > 0.0,
                  "total_bandwidth_bps must be positive");
  detail::require(fleet.batches_per_round >= 1, "batches_per_round must be at least 1");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < fleet.devices.size(); ++i) {
    const auto& d = fleet.devices[i];
    const std::string where = "devices[" + std::to_string(i) + "]";
    detail::require(ids.insert(d.device_id).second,
                    where + ".device_id duplicated: '" + d.device_id + "'");
    detail::check_series(d.fwd_time_s, n, where + ".fwd_time");
    detail::check_series(d.bwd_time_s, n, where + ".bwd_time");
    detail::check_non_decreasing(d.fwd_time_s, where + ".fwd_time");
    detail::check_non_decreasing(d.bwd_time_s, where + ".bwd_time");

    const auto& s = fleet.servers[i];
    const std::string swhere = "server[" + std::to_string(i) + "]";
    detail::check_series(s.fwd_time_s, n, swhere + ".fwd_time");
    detail::check_series(s.bwd_time_s, n, swhere + ".bwd_time");
    detail::check_non_increasing(s.fwd_time_s, swhere + ".fwd_time");
    detail::check_non_increasing(s.bwd_time_s, swhere + ".bwd_time");
  }
}

// ---------------------------------------------------------------------------
// Profile file (schema 1)
//
//   {
//     "schema": 1,
//     "model": {"name": "...", "num_cuts": N,
//               "activation_bits": [O_1 .. O_N], "cum_param_bits": [P_1 .. P_N]},
//     "devices": [{"device_id": "...", "fwd_time": [...], "bwd_time": [...]}, ...],
//     "server": {"fwd_time": [...], "bwd_time": [...]}      (shared)
//            or [{"fwd_time": [...], "bwd_time": [...]}, ...] (one per device),
//     "total_bandwidth_bps": B,
//     "batches_per_round": b
//   }
// ---------------------------------------------------------------------------

inline constexpr int kProfileSchemaVersion = 1;

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
  return *it;
}

inline double number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ParseError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    out.push_back(number(v[k], where + "[" + std::to_string(k + 1) + "]"));
  }
  return out;
}

inline ServerProfile server_from_json(const Json& v, const std::string& where) {
  return ServerProfile{numbers(field(v, "fwd_time", where), where + ".fwd_time"),
                       numbers(field(v, "bwd_time", where), where + ".bwd_time")};
}

inline Json server_to_json(const ServerProfile& s) {
  Json out = Json::object();
  out["fwd_time"] = s.fwd_time_s;
  out["bwd_time"] = s.bwd_time_s;
  return out;
}

}  // namespace detail

inline Json fleet_to_json(const FleetProfile& fleet) {
  Json out = Json::object();
  out["schema"] = kProfileSchemaVersion;

  Json model = Json::object();
  model["name"] = fleet.model.name;
  model["num_cuts"] = fleet.model.num_cuts();
  model["activation_bits"] = fleet.model.activation_bits;
  model["cum_param_bits"] = fleet.model.cum_param_bits;
  out["model"] = std::move(model);

  Json devices = Json::array();
  for (const auto& d : fleet.devices) {
    Json dev = Json::object();
    dev["device_id"] = d.device_id;
    dev["fwd_time"] = d.fwd_time_s;
    dev["bwd_time"] = d.bwd_time_s;
    devices.push_back(std::move(dev));
  }
  out["devices"] = std::move(devices);

  bool shared = !fleet.servers.empty();
  for (const auto& s : fleet.servers) shared = shared && s == fleet.servers.front();
  if (shared) {
    out["server"] = detail::server_to_json(fleet.servers.front());
  } else {
    Json servers = Json::array();
    for (const auto& s : fleet.servers) servers.push_back(detail::server_to_json(s));
    out["server"] = std::move(servers);
  }

  out["total_bandwidth_bps"] = fleet.total_bandwidth_bps;
  out["batches_per_round"] = fleet.batches_per_round;
  return out;
}

/// Builds and validates a fleet from a parsed document.
inline FleetProfile fleet_from_json(const Json& doc) {
  const Json& schema = detail::field(doc, "schema", "profile");
  if (!schema.is_number_integer() || schema.get<int>() != kProfileSchemaVersion) {
    throw ParseError("profile: unsupported schema (expected " +
                     std::to_string(kProfileSchemaVersion) + ")");
  }

  FleetProfile fleet;
  const Json& model = detail::field(doc, "model", "profile");
  const Json& name = detail::field(model, "name", "model");
  if (!name.is_string()) throw ParseError("model.name: expected a string");
  fleet.model.name = name.get<std::string>();
  const Json& num_cuts = detail::field(model, "num_cuts", "model");
  if (!num_cuts.is_number_integer()) throw ParseError("model.num_cuts: expected an integer");
  fleet.model.activation_bits =
      detail::numbers(detail::field(model, "activation_bits", "model"), "activation_bits");
  fleet.model.cum_param_bits =
      detail::numbers(detail::field(model, "cum_param_bits", "model"), "cum_param_bits");
  const auto declared = num_cuts.get<long long>();
  detail::require(declared >= 1, "model.num_cuts must be at least 1");
  detail::require(static_cast<std::size_t>(declared) == fleet.model.activation_bits.size(),
                  "activation_bits: expected num_cuts = " + std::to_string(declared) +
                      " entries, got " + std::to_string(fleet.model.activation_bits.size()));

  const Json& devices = detail::field(doc, "devices", "profile");
  if (!devices.is_array()) throw ParseError("devices: expected an array");
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const std::string where = "devices[" + std::to_string(i) + "]";
    const Json& id = detail::field(devices[i], "device_id", where);
    if (!id.is_string()) throw ParseError(where + ".device_id: expected a string");
    fleet.devices.push_back(DeviceProfile{
        id.get<std::string>(),
        detail::numbers(detail::field(devices[i], "fwd_time", where), where + ".fwd_time"),
        detail::numbers(detail::field(devices[i], "bwd_time", where), where + ".bwd_time")});
  }

  const Json& server = detail::field(doc, "server", "profile");
  if (server.is_object()) {
    fleet.servers.assign(fleet.devices.size(), detail::server_from_json(server, "server"));
  } else if (server.is_array()) {
    for (std::size_t i = 0; i < server.size(); ++i) {
      fleet.servers.push_back(
          detail::server_from_json(server[i], "server[" + std::to_string(i) + "]"));
    }
  } else {
    throw ParseError("server: expected an object or an array of objects");
  }

  fleet.total_bandwidth_bps =
      detail::number(detail::field(doc, "total_bandwidth_bps", "profile"), "total_bandwidth_bps");
  const Json& batches = detail::field(doc, "batches_per_round", "profile");
  if (!batches.is_number_integer()) throw ParseError("batches_per_round: expected an integer");
  const auto b = batches.get<long long>();
  detail::require(b >= 1 && b <= 1'000'000'000, "batches_per_round must be at least 1");
  fleet.batches_per_round = static_cast<int>(b);

  validate(fleet);
  return fleet;
}

inline FleetProfile parse_fleet(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
  return fleet_from_json(doc);
}

/// Canonical text form; byte-stable for equal fleets.
inline std::string serialize_fleet(const FleetProfile& fleet) {
  return fleet_to_json(fleet).dump(2) + "\n";
}

inline FleetProfile load_fleet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open profile file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_fleet(text.str());
}

inline void save_fleet(const FleetProfile& fleet, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << serialize_fleet(fleet);
}

}  // namespace splitsched
