// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The cfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cfsim/channel.hpp"
#include "cfsim/rng.hpp"

namespace cfsim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_double(const std::string& key, std::string_view v) {
  // std::from_chars for double is available in libstdc++ 11.
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
    throw ConfigError(key, "expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

long long parse_integer(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    // accept integral values written in floating notation, e.g. "1e2"
    const double d = parse_double(key, v);
    if (std::floor(d) != d || std::abs(d) > 9.0e15) {
      throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
    }
    return static_cast<long long>(d);
  }
  return out;
}

int parse_int(const std::string& key, std::string_view v) {
  const long long x = parse_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(key, "expected an unsigned 64-bit integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, std::string_view v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "expected a boolean, got '" + std::string(v) + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct KeyBinding {
  std::string key;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define CFSIM_DOUBLE(name, member)                                                        \
  KeyBinding {                                                                            \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = parse_double(name, v); }, \
        [](const ScenarioConfig& c) { return fmt_double(c.member); }                      \
  }
#define CFSIM_INT(name, member)                                                        \
  KeyBinding {                                                                         \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = parse_int(name, v); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.member); }               \
  }
#define CFSIM_BOOL(name, member)                                                        \
  KeyBinding {                                                                          \
    name, [](ScenarioConfig& c, std::string_view v) { c.member = parse_bool(name, v); }, \
        [](const ScenarioConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }

const std::vector<KeyBinding>& bindings() {
  static const std::vector<KeyBinding> table = {
      CFSIM_DOUBLE("f0_hz", carrier_hz),
      CFSIM_DOUBLE("bandwidth_hz", bandwidth_hz),
      CFSIM_DOUBLE("area_side_m", area_side_m),
      CFSIM_INT("num_aps", num_aps),
      CFSIM_INT("num_ms", num_ms),
      CFSIM_INT("n_ap", n_ap),
      CFSIM_INT("n_ms", n_ms),
      CFSIM_INT("mux_order", mux_order),
      CFSIM_INT("uc_cluster_size", uc_cluster_size),
      KeyBinding{"mode",
                 [](ScenarioConfig& c, std::string_view v) {
                   const std::string s = lower(v);
                   if (s == "cf") c.mode = AccessMode::CellFree;
                   else if (s == "uc") c.mode = AccessMode::UserCentric;
                   else throw ConfigError("mode", "expected cf or uc, got '" + std::string(v) + "'");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.mode == AccessMode::CellFree ? "cf" : "uc");
                 }},
      CFSIM_INT("tau_p", tau_p),
      CFSIM_INT("tau_c", tau_c),
      CFSIM_DOUBLE("p_ul_w", p_ul_w),
      CFSIM_DOUBLE("noise_psd_dbm_hz", noise_psd_dbm_hz),
      CFSIM_DOUBLE("noise_figure_db", noise_figure_db),
      CFSIM_DOUBLE("p_max_w", p_max_w),
      CFSIM_DOUBLE("delta", delta),
      CFSIM_DOUBLE("p_circuit_w", p_circuit_w),
      KeyBinding{"power_model",
                 [](ScenarioConfig& c, std::string_view v) {
                   const std::string s = lower(v);
                   if (s == "basic") c.power_model = PowerModelKind::Basic;
                   else if (s == "idle_aware") c.power_model = PowerModelKind::IdleAware;
                   else
                     throw ConfigError("power_model",
                                       "expected basic or idle_aware, got '" + std::string(v) + "'");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.power_model == PowerModelKind::Basic ? "basic"
                                                                             : "idle_aware");
                 }},
      CFSIM_DOUBLE("idle_fraction", idle_fraction),
      CFSIM_INT("n_cl", n_cl),
      CFSIM_INT("n_ray", n_ray),
      CFSIM_INT("n_rf", n_rf),
      CFSIM_INT("drops", drops),
      KeyBinding{"master_seed",
                 [](ScenarioConfig& c, std::string_view v) {
                   c.master_seed = parse_u64("master_seed", v);
                 },
                 [](const ScenarioConfig& c) { return std::to_string(c.master_seed); }},
      CFSIM_DOUBLE("pl0_db_offset", path_loss.pl0_db_offset),
      CFSIM_DOUBLE("pl_exp_los", path_loss.exp_los),
      CFSIM_DOUBLE("pl_exp_nlos", path_loss.exp_nlos),
      CFSIM_DOUBLE("shadow_sigma_db", path_loss.shadow_sigma_db),
      CFSIM_DOUBLE("los_d0_m", path_loss.los_d0_m),
      CFSIM_DOUBLE("los_d1_m", path_loss.los_d1_m),
      CFSIM_DOUBLE("ray_spread_deg", path_loss.ray_spread_deg),
      CFSIM_DOUBLE("zf_ridge_rel", zf_ridge_rel),
      KeyBinding{"zf_scope",
                 [](ScenarioConfig& c, std::string_view v) {
                   const std::string s = lower(v);
                   if (s == "global") c.zf_scope = ZfScope::Global;
                   else if (s == "per_ap") c.zf_scope = ZfScope::PerAp;
                   else
                     throw ConfigError("zf_scope",
                                       "expected global or per_ap, got '" + std::string(v) + "'");
                 },
                 [](const ScenarioConfig& c) {
                   return std::string(c.zf_scope == ZfScope::Global ? "global" : "per_ap");
                 }},
      CFSIM_INT("bcd_sweeps", bcd_sweeps),
      CFSIM_BOOL("orthogonal_pilots", orthogonal_pilots),
      CFSIM_DOUBLE("opt_tol_outer", optimizer.tol_outer),
      CFSIM_INT("opt_max_sweeps", optimizer.max_sweeps),
      CFSIM_INT("sca_iters_per_ap", optimizer.sca_iters_per_ap),
      CFSIM_DOUBLE("dinkelbach_tol", optimizer.dinkelbach_tol),
      CFSIM_INT("dinkelbach_max", optimizer.dinkelbach_max),
      CFSIM_INT("pg_max_iters", optimizer.pg_max_iters),
      CFSIM_DOUBLE("pg_tol", optimizer.pg_tol),
      CFSIM_DOUBLE("sqrt_floor", optimizer.sqrt_floor),
      CFSIM_BOOL("warm_start", optimizer.warm_start),
  };
  return table;
}

#undef CFSIM_DOUBLE
#undef CFSIM_INT
#undef CFSIM_BOOL

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

void validate(const ScenarioConfig& c) {
  require(c.carrier_hz > 0, "f0_hz", "must be positive");
  require(c.bandwidth_hz > 0, "bandwidth_hz", "must be positive");
  require(c.area_side_m > 0, "area_side_m", "must be positive");
  require(c.num_aps > 0, "num_aps", "must be positive");
  require(c.num_ms > 0, "num_ms", "must be positive");
  require(c.n_ap > 0, "n_ap", "must be positive");
  require(c.n_ms > 0, "n_ms", "must be positive");
  require(c.mux_order > 0, "mux_order", "must be positive");
  require(c.mux_order <= kMaxStreams, "mux_order",
          "at most " + std::to_string(kMaxStreams) + " streams are supported");
  require(c.n_ms % c.mux_order == 0, "mux_order",
          "P must divide N_MS (n_ms=" + std::to_string(c.n_ms) +
              ", mux_order=" + std::to_string(c.mux_order) + ")");
  require(c.uc_cluster_size > 0, "uc_cluster_size", "must be positive");
  if (c.mode == AccessMode::UserCentric) {
    require(c.uc_cluster_size <= c.num_ms, "uc_cluster_size", "N must not exceed K in UC mode");
  }
  require(c.tau_p > 0, "tau_p", "must be positive");
  require(c.tau_c > 0, "tau_c", "must be positive");
  require(c.tau_p < c.tau_c, "tau_p",
          "tau_p < tau_c is required (tau_p=" + std::to_string(c.tau_p) +
              ", tau_c=" + std::to_string(c.tau_c) + ")");
  require(c.tau_p >= c.mux_order, "tau_p", "pilot length must be at least mux_order");
  require(c.p_ul_w > 0, "p_ul_w", "must be positive");
  require(c.p_max_w > 0, "p_max_w", "must be positive");
  require(c.delta >= 1.0, "delta", "amplifier inefficiency must be >= 1");
  require(c.p_circuit_w > 0, "p_circuit_w", "must be positive");
  require(c.idle_fraction > 0 && c.idle_fraction <= 1, "idle_fraction", "must lie in (0, 1]");
  require(c.n_cl > 0, "n_cl", "must be positive");
  require(c.n_ray > 0, "n_ray", "must be positive");
  require(c.n_rf >= 1 && c.n_rf <= c.n_ap, "n_rf", "must satisfy 1 <= n_rf <= n_ap");
  require(c.drops > 0, "drops", "must be positive");
  require(c.path_loss.shadow_sigma_db >= 0, "shadow_sigma_db", "must be non-negative");
  require(c.path_loss.los_d0_m > 0, "los_d0_m", "must be positive");
  require(c.path_loss.los_d1_m > 0, "los_d1_m", "must be positive");
  require(c.path_loss.ray_spread_deg >= 0, "ray_spread_deg", "must be non-negative");
  require(c.zf_ridge_rel >= 0, "zf_ridge_rel", "must be non-negative");
  require(c.bcd_sweeps >= 1, "bcd_sweeps", "must be at least 1");
  const auto& o = c.optimizer;
  require(o.tol_outer > 0, "opt_tol_outer", "must be positive");
  require(o.max_sweeps >= 1, "opt_max_sweeps", "must be at least 1");
  require(o.sca_iters_per_ap >= 1, "sca_iters_per_ap", "must be at least 1");
  require(o.dinkelbach_tol > 0, "dinkelbach_tol", "must be positive");
  require(o.dinkelbach_max >= 1, "dinkelbach_max", "must be at least 1");
  require(o.pg_max_iters >= 1, "pg_max_iters", "must be at least 1");
  require(o.pg_tol > 0, "pg_tol", "must be positive");
  require(o.sqrt_floor > 0, "sqrt_floor", "must be positive");
}

ScenarioConfig load_config(std::string_view text) {
  std::map<std::string, const KeyBinding*, std::less<>> by_key;
  for (const auto& b : bindings()) by_key.emplace(b.key, &b);

  ScenarioConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value', got '" + std::string(line) + "'");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(key, "unknown configuration key");
    if (!seen.insert(key).second) throw ConfigError(key, "key given more than once");
    if (value.empty()) throw ConfigError(key, "missing value");
    it->second->set(cfg, value);
  }
  validate(cfg);
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string to_config_text(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& b : bindings()) out += b.key + " = " + b.get(cfg) + "\n";
  return out;
}

double derive_noise_power(const ScenarioConfig& cfg) {
  const double dbm =
      cfg.noise_psd_dbm_hz + 10.0 * std::log10(cfg.bandwidth_hz) + cfg.noise_figure_db;
  return std::pow(10.0, (dbm - 30.0) / 10.0);
}

NetworkGeometry drop_realization(const ScenarioConfig& cfg, std::uint64_t drop_index) {
  Rng rng = make_stream(cfg.master_seed, drop_index, StreamTag::Geometry);
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
  std::normal_distribution<double> shadow(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  NetworkGeometry g;
  g.num_aps = cfg.num_aps;
  g.num_ms = cfg.num_ms;
  g.ap_positions.resize(cfg.num_aps);
  g.ms_positions.resize(cfg.num_ms);
  for (auto& p : g.ap_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  for (auto& p : g.ms_positions) {
    p.x = coord(rng);
    p.y = coord(rng);
  }

  const std::size_t links = static_cast<std::size_t>(cfg.num_aps) * cfg.num_ms;
  g.los_flag.resize(links);
  g.shadowing_db.resize(links);
  g.distances.resize(links);
  for (int m = 0; m < cfg.num_aps; ++m) {
    for (int k = 0; k < cfg.num_ms; ++k) {
      const auto i = g.link(m, k);
      const double d = std::hypot(g.ap_positions[m].x - g.ms_positions[k].x,
                                  g.ap_positions[m].y - g.ms_positions[k].y);
      g.distances[i] = d;
      g.shadowing_db[i] = cfg.path_loss.shadow_sigma_db * shadow(rng);
      g.los_flag[i] = unit(rng) < los_probability(d, cfg.path_loss);
    }
  }
  return g;
}

}  // namespace cfsim
