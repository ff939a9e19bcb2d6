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

// Synthetic heterogeneous fleets.
//
// A fleet is built from one shared set of per-layer base costs. Device i runs
// every layer s_i times slower than the base, so its cumulative forward and
// backward times are s_i x prefix sums of the base costs. The server runs
// the remaining layers server_factor times the base cost, so its times are
// server_factor x suffix sums. Activation sizes shrink with depth and
// per-layer parameter sizes grow with depth, the usual CNN shape.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "splitsched/errors.hpp"
#include "splitsched/profiles.hpp"

namespace splitsched {

struct SyntheticSpec {
  std::string model_name = "synthetic";
  std::size_t num_cuts = 16;
  /// One slowdown factor per device, relative to the base layer costs.
  std::vector<double> slowdowns = {1.0};

  /// Base forward cost per layer per batch, drawn log-uniform in [min, max].
  double layer_fwd_min_s = 0.02;
  double layer_fwd_max_s = 0.2;
  /// Backward cost of a layer = backward_ratio x its forward cost.
  double backward_ratio = 2.0;
  /// Server cost of a layer = server_factor x its base cost.
  double server_factor = 0.1;

  /// Per-batch activation size of each cut layer, log-uniform, sorted so
  /// deeper cuts carry less traffic.
  double activation_min_bits = 2e5;
  double activation_max_bits = 2e7;
  /// Parameter size of each layer, log-uniform, sorted so deeper layers are
  /// heavier; the profile stores the running sum.
  double layer_param_min_bits = 1e4;
  double layer_param_max_bits = 5e7;

  double total_bandwidth_bps = 30e6;
  int batches_per_round = 20;

  bool operator==(const SyntheticSpec&) const = default;
};

/// Slowdown factors for devices grouped into core-count classes: devices are
/// split into contiguous equal blocks, one block per class in the given
/// order, and a device with c cores runs max(cores)/c times slower than the
/// strongest class.
inline std::vector<double> slowdowns_from_core_classes(std::size_t num_devices,
                                                       const std::vector<double>& cores) {
  if (num_devices < 1) throw ValidationError("devices must be at least 1");
  if (cores.empty()) throw ValidationError("classes: at least one core class required");
  for (double c : cores) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("classes: core counts must be positive");
  }
  const double strongest = *std::max_element(cores.begin(), cores.end());
  std::vector<double> out(num_devices);
  for (std::size_t i = 0; i < num_devices; ++i) {
    out[i] = strongest / cores[i * cores.size() / num_devices];
  }
  return out;
}

inline void validate(const SyntheticSpec& spec) {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ValidationError(message);
  };
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto range = [](double lo, double hi) { return std::isfinite(lo) && std::isfinite(hi) && lo >= 0.0 && lo <= hi; };
  require(spec.num_cuts >= 1, "synthetic: num_cuts must be at least 1");
  require(!spec.slowdowns.empty(), "synthetic: at least one device required");
  for (double s : spec.slowdowns) require(positive(s), "synthetic: slowdown factors must be positive");
  require(range(spec.layer_fwd_min_s, spec.layer_fwd_max_s), "synthetic: invalid layer forward cost range");
  require(std::isfinite(spec.backward_ratio) && spec.backward_ratio >= 0.0,
          "synthetic: backward_ratio must be non-negative");
  require(positive(spec.server_factor), "synthetic: server_factor must be positive");
  require(range(spec.activation_min_bits, spec.activation_max_bits),
          "synthetic: invalid activation size range");
  require(range(spec.layer_param_min_bits, spec.layer_param_max_bits),
          "synthetic: invalid parameter size range");
  require(positive(spec.total_bandwidth_bps), "synthetic: total_bandwidth_bps must be positive");
  require(spec.batches_per_round >= 1, "synthetic: batches_per_round must be at least 1");
}

namespace detail {

// Unit-interval draw built directly from the engine's bits; the standard
// distributions are not specified bit-for-bit across library vendors.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = unit_draw(rng);
  if (lo == hi) return lo;
  if (lo == 0.0) return u * hi;
  return std::exp(std::log(lo) + u * (std::log(hi) - std::log(lo)));
}

}  // namespace detail

inline FleetProfile generate_fleet(const SyntheticSpec& spec, std::uint64_t seed) {
  validate(spec);
  const std::size_t n = spec.num_cuts;
  std::mt19937_64 rng(seed);

  std::vector<double> layer_fwd(n), layer_bwd(n);
  for (std::size_t k = 0; k < n; ++k) {
    layer_fwd[k] = detail::log_uniform(rng, spec.layer_fwd_min_s, spec.layer_fwd_max_s);
    layer_bwd[k] = spec.backward_ratio * layer_fwd[k];
  }

  FleetProfile fleet;
  fleet.model.name = spec.model_name;
  fleet.model.activation_bits.resize(n);
  for (auto& o : fleet.model.activation_bits) {
    o = detail::log_uniform(rng, spec.activation_min_bits, spec.activation_max_bits);
  }
  std::sort(fleet.model.activation_bits.begin(), fleet.model.activation_bits.end(),
            std::greater<>());
  std::vector<double> layer_params(n);
  for (auto& p : layer_params) {
    p = detail::log_uniform(rng, spec.layer_param_min_bits, spec.layer_param_max_bits);
  }
  std::sort(layer_params.begin(), layer_params.end());
  fleet.model.cum_param_bits.resize(n);
  double params = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    params += layer_params[k];
    fleet.model.cum_param_bits[k] = params;
  }

  // Base prefix sums (layers 1..j) and suffix sums (layers j+1..N).
  std::vector<double> fwd_prefix(n), bwd_prefix(n), fwd_suffix(n), bwd_suffix(n);
  double f = 0.0, b = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    f += layer_fwd[k];
    b += layer_bwd[k];
    fwd_prefix[k] = f;
    bwd_prefix[k] = b;
  }
  f = 0.0;
  b = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    fwd_suffix[k] = f;
    bwd_suffix[k] = b;
    f += layer_fwd[k];
    b += layer_bwd[k];
  }

  ServerProfile server;
  server.fwd_time_s.resize(n);
  server.bwd_time_s.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    server.fwd_time_s[k] = spec.server_factor * fwd_suffix[k];
    server.bwd_time_s[k] = spec.server_factor * bwd_suffix[k];
  }

  for (std::size_t i = 0; i < spec.slowdowns.size(); ++i) {
    DeviceProfile d;
    d.device_id = "dev" + std::to_string(i + 1);
    d.fwd_time_s.resize(n);
    d.bwd_time_s.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      d.fwd_time_s[k] = spec.slowdowns[i] * fwd_prefix[k];
      d.bwd_time_s[k] = spec.slowdowns[i] * bwd_prefix[k];
    }
    fleet.devices.push_back(std::move(d));
  }
  fleet.servers.assign(fleet.devices.size(), server);
  fleet.total_bandwidth_bps = spec.total_bandwidth_bps;
  fleet.batches_per_round = spec.batches_per_round;
  validate(fleet);
  return fleet;
}

inline Json synthetic_spec_to_json(const SyntheticSpec& spec) {
  Json out = Json::object();
  out["model_name"] = spec.model_name;
  out["num_cuts"] = spec.num_cuts;
  out["slowdowns"] = spec.slowdowns;
  out["layer_fwd_min_s"] = spec.layer_fwd_min_s;
  out["layer_fwd_max_s"] = spec.layer_fwd_max_s;
  out["backward_ratio"] = spec.backward_ratio;
  out["server_factor"] = spec.server_factor;
  out["activation_min_bits"] = spec.activation_min_bits;
  out["activation_max_bits"] = spec.activation_max_bits;
  out["layer_param_min_bits"] = spec.layer_param_min_bits;
  out["layer_param_max_bits"] = spec.layer_param_max_bits;
  out["total_bandwidth_bps"] = spec.total_bandwidth_bps;
  out["batches_per_round"] = spec.batches_per_round;
  return out;
}

/// Reads a synthetic spec document. Missing keys keep their defaults.
inline SyntheticSpec synthetic_spec_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("synthetic spec: expected an object");
  SyntheticSpec spec;
  try {
    auto read = [&](const char* key, auto& target) {
      if (auto it = doc.find(key); it != doc.end()) it->get_to(target);
    };
    read("model_name", spec.model_name);
    long long num_cuts = static_cast<long long>(spec.num_cuts);
    read("num_cuts", num_cuts);
    if (num_cuts < 1) throw ValidationError("synthetic: num_cuts must be at least 1");
    spec.num_cuts = static_cast<std::size_t>(num_cuts);
    read("slowdowns", spec.slowdowns);
    read("layer_fwd_min_s", spec.layer_fwd_min_s);
    read("layer_fwd_max_s", spec.layer_fwd_max_s);
    read("backward_ratio", spec.backward_ratio);
    read("server_factor", spec.server_factor);
    read("activation_min_bits", spec.activation_min_bits);
    read("activation_max_bits", spec.activation_max_bits);
    read("layer_param_min_bits", spec.layer_param_min_bits);
    read("layer_param_max_bits", spec.layer_param_max_bits);
    read("total_bandwidth_bps", spec.total_bandwidth_bps);
    read("batches_per_round", spec.batches_per_round);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

}  // namespace splitsched
