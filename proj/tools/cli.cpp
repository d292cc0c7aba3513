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

#include "cli.hpp"

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfsim/harness.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim {
namespace {

std::vector<double> parse_dbm_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error("--pmax-dbm: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error("--pmax-dbm: empty list");
  return out;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Downlink cell-free / user-centric mmWave massive MIMO simulator", "cfsim"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string pmax_list;
  std::string mode_list;
  int drops = 0;
  std::uint64_t seed = 0;
  int threads = 0;
  bool traces = false;
  bool wall_time = false;

  auto* run = app.add_subcommand("run", "Run a Monte Carlo campaign and write CSV results");
  run->add_option("--config", config_path, "Configuration file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--pmax-dbm", pmax_list, "Comma-separated per-AP P_max values in dBm");
  run->add_option("--modes", mode_list,
                  "Comma-separated MODE:BF:CSI:ALG[:POWER_MODEL] templates, e.g. UC:FD:PERFECT:OPT_GEE");
  auto* drops_opt = run->add_option("--drops", drops, "Number of drops (overrides config)");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides config)");
  run->add_option("--threads", threads, "Worker threads (default: $CELLFREE_SIM_THREADS or 1)");
  run->add_flag("--traces", traces, "Write trace_<row>.csv for optimized rows");
  run->add_flag("--record-wall-time", wall_time, "Fill the wall_ms column (makes output non-reproducible)");

  auto* val = app.add_subcommand("validate", "Check a configuration file against all invariants");
  val->add_option("--config", config_path, "Configuration file")->required();

  app.add_subcommand("selftest", "Run the built-in oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*val) {
      const ScenarioConfig cfg = load_config_file(config_path);
      out << "config OK: " << cfg.num_aps << " APs, " << cfg.num_ms << " MSs, "
          << cfg.n_ap << "x" << cfg.n_ms << " antennas, " << cfg.drops << " drops\n";
      return 0;
    }
    if (app.got_subcommand("selftest")) {
      return run_selftest(out) ? 0 : 1;
    }

    ScenarioConfig cfg = load_config_file(config_path);
    if (drops_opt->count() > 0) cfg.drops = drops;
    if (seed_opt->count() > 0) cfg.master_seed = seed;
    validate(cfg);

    const std::vector<double> sweep = pmax_list.empty() ? default_pmax_sweep_dbm() : parse_dbm_list(pmax_list);
    const std::vector<ModeTemplate> modes =
        mode_list.empty() ? default_mode_templates(cfg) : parse_mode_list(mode_list, cfg.power_model);

    CampaignOptions opts;
    opts.threads = resolve_threads(threads);
    opts.record_wall_time = wall_time;
    const CampaignResults res = run_campaign(cfg, sweep, modes, opts);
    write_results(res, out_dir, traces);

    std::size_t failed = 0;
    for (const auto& r : res.rows) failed += r.error.empty() ? 0 : 1;
    out << "wrote " << res.rows.size() << " rows to " << out_dir << "/results.csv";
    if (failed) out << " (" << failed << " rows failed)";
    out << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cfsim
