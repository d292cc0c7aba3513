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

#include "cfsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include "cfsim/channel.hpp"
#include "cfsim/protocol.hpp"
#include "cfsim/rate.hpp"

namespace cfsim {
namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void mode_columns(std::ostream& out, const ModeTemplate& t) {
  out << to_string(t.mode) << ',' << to_string(t.beamforming) << ',' << to_string(t.csi) << ','
      << to_string(t.power_alg) << ',' << to_string(t.power_model);
}

struct DropContext {
  ChannelSet channels;
  CMat combiner;
  EffectiveChannelSet true_s;
  EffectiveChannelSet est_s;
  double noise_w = 0.0;
};

DropContext realize_drop(const ScenarioConfig& cfg, int drop, bool need_estimates) {
  DropContext ctx;
  const NetworkGeometry geom = drop_realization(cfg, static_cast<std::uint64_t>(drop));
  ctx.channels = synth_drop_channels(cfg, geom, static_cast<std::uint64_t>(drop));
  ctx.combiner = ms_combiner(cfg.n_ms, cfg.mux_order);
  ctx.true_s = true_effective(ctx.channels, ctx.combiner);
  ctx.noise_w = derive_noise_power(cfg);
  if (need_estimates) {
    Rng rng = make_stream(cfg.master_seed, static_cast<std::uint64_t>(drop), StreamTag::Pilot);
    const PilotBook pilots =
        generate_pilots(cfg.num_ms, cfg.mux_order, cfg.tau_p, rng, cfg.orthogonal_pilots);
    const auto noise = draw_training_noise(cfg.num_aps, cfg.n_ap, cfg.tau_p, ctx.noise_w,
                                           cfg.master_seed, static_cast<std::uint64_t>(drop));
    ctx.est_s = uplink_train(ctx.channels, ctx.combiner, pilots, cfg.p_ul_w, noise);
  }
  return ctx;
}

std::vector<ResultRow> run_drop(const ScenarioConfig& cfg, int drop, const std::vector<double>& sweep,
                                const std::vector<ModeTemplate>& modes, const CampaignOptions& opts) {
  using clock = std::chrono::steady_clock;
  const bool need_est = std::any_of(modes.begin(), modes.end(),
                                    [](const ModeTemplate& t) { return t.csi == CsiKind::Estimated; });

  std::vector<ResultRow> rows;
  rows.reserve(modes.size() * sweep.size());
  auto blank_row = [&](const ModeTemplate& t, double pmax_dbm) {
    ResultRow r;
    r.desc.tmpl = t;
    r.desc.pmax_dbm = pmax_dbm;
    r.desc.drop = drop;
    return r;
  };

  DropContext ctx;
  try {
    ctx = realize_drop(cfg, drop, need_est);
  } catch (const Error& e) {
    for (const auto& t : modes)
      for (double p : sweep) {
        ResultRow r = blank_row(t, p);
        r.error = e.what();
        rows.push_back(std::move(r));
      }
    return rows;
  }

  for (const ModeTemplate& t : modes) {
    const bool perfect = t.csi == CsiKind::Perfect;
    const EffectiveChannelSet& design = perfect ? ctx.true_s : ctx.est_s;

    GainTensor true_gains;
    GainTensor design_gains;
    try {
      const Eigen::MatrixXd metric =
          perfect ? association_metric(ctx.channels) : association_metric(ctx.est_s);
      const Association assoc = associate(metric, t.mode, cfg.uc_cluster_size);
      PrecoderSet prec = zf_precoders(design, assoc, cfg.zf_ridge_rel, cfg.zf_scope);
      if (t.beamforming == Beamforming::Hybrid) {
        prec = hybridize(prec, assoc, cfg.n_rf, cfg.bcd_sweeps, cfg.master_seed,
                         static_cast<std::uint64_t>(drop));
      }
      true_gains = effective_gains(ctx.true_s, prec, assoc, ctx.noise_w, ctx.combiner);
      if (!perfect) design_gains = effective_gains(ctx.est_s, prec, assoc, ctx.noise_w, ctx.combiner);
    } catch (const Error& e) {
      for (double p : sweep) {
        ResultRow r = blank_row(t, p);
        r.error = e.what();
        rows.push_back(std::move(r));
      }
      continue;
    }
    const GainTensor& opt_gains = perfect ? true_gains : design_gains;
    const PowerModel model = make_power_model(cfg, t.power_model);

    std::optional<PowerAllocation> warm;
    for (double pmax_dbm : sweep) {
      ResultRow r = blank_row(t, pmax_dbm);
      const auto start = clock::now();
      try {
        const double pmax = dbm_to_watts(pmax_dbm);
        switch (t.power_alg) {
          case PowerAlgorithm::Uniform:
            r.alloc = uniform_allocation(true_gains.assoc, pmax);
            break;
          case PowerAlgorithm::OptGee:
          case PowerAlgorithm::OptAse: {
            const PowerAllocation* w = warm ? &*warm : nullptr;
            OptimizationResult res =
                t.power_alg == PowerAlgorithm::OptGee
                    ? maximize_gee(opt_gains, pmax, model, cfg.bandwidth_hz, cfg.optimizer, w)
                    : maximize_ase(opt_gains, pmax, model, cfg.bandwidth_hz, cfg.optimizer, w);
            r.alloc = std::move(res.alloc);
            r.trace = std::move(res.trace);
            warm = r.alloc;
            break;
          }
        }
        const GeeReport rep = gee(true_gains, r.alloc, model, cfg.bandwidth_hz);
        r.gee_mbit_per_joule = rep.gee_mbit_per_joule;
        r.sum_ase_bit_s_hz = rep.sum_ase_bit_s_hz;
        r.power_w = rep.power_w;
        r.per_user_ase = rep.per_user_ase_bit_s_hz;
      } catch (const Error& e) {
        r.error = e.what();
        warm.reset();
      }
      if (opts.record_wall_time) {
        r.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  return s;
}

}  // namespace

std::string_view to_string(AccessMode v) { return v == AccessMode::CellFree ? "CF" : "UC"; }
std::string_view to_string(Beamforming v) { return v == Beamforming::FullyDigital ? "FD" : "HYBRID"; }
std::string_view to_string(CsiKind v) { return v == CsiKind::Perfect ? "PERFECT" : "ESTIMATED"; }
std::string_view to_string(PowerAlgorithm v) {
  switch (v) {
    case PowerAlgorithm::OptGee: return "OPT_GEE";
    case PowerAlgorithm::OptAse: return "OPT_ASE";
    case PowerAlgorithm::Uniform: return "UNI";
  }
  return "?";
}
std::string_view to_string(PowerModelKind v) { return v == PowerModelKind::Basic ? "BASIC" : "IDLE_AWARE"; }

ModeTemplate parse_mode_template(std::string_view text, PowerModelKind fallback) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(upper(cur));
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  parts.push_back(upper(cur));
  if (parts.size() != 4 && parts.size() != 5) {
    throw Error("mode '" + std::string(text) + "': expected MODE:BF:CSI:ALG[:POWER_MODEL]");
  }
  auto bad = [&](const std::string& what) {
    return Error("mode '" + std::string(text) + "': unknown " + what);
  };
  ModeTemplate t;
  if (parts[0] == "CF") t.mode = AccessMode::CellFree;
  else if (parts[0] == "UC") t.mode = AccessMode::UserCentric;
  else throw bad("access mode '" + parts[0] + "'");
  if (parts[1] == "FD") t.beamforming = Beamforming::FullyDigital;
  else if (parts[1] == "HYBRID" || parts[1] == "HY") t.beamforming = Beamforming::Hybrid;
  else throw bad("beamforming '" + parts[1] + "'");
  if (parts[2] == "PERFECT") t.csi = CsiKind::Perfect;
  else if (parts[2] == "ESTIMATED") t.csi = CsiKind::Estimated;
  else throw bad("CSI kind '" + parts[2] + "'");
  if (parts[3] == "OPT_GEE" || parts[3] == "OPT") t.power_alg = PowerAlgorithm::OptGee;
  else if (parts[3] == "OPT_ASE") t.power_alg = PowerAlgorithm::OptAse;
  else if (parts[3] == "UNI") t.power_alg = PowerAlgorithm::Uniform;
  else throw bad("power algorithm '" + parts[3] + "'");
  t.power_model = fallback;
  if (parts.size() == 5) {
    if (parts[4] == "BASIC") t.power_model = PowerModelKind::Basic;
    else if (parts[4] == "IDLE_AWARE") t.power_model = PowerModelKind::IdleAware;
    else throw bad("power model '" + parts[4] + "'");
  }
  return t;
}

std::vector<ModeTemplate> parse_mode_list(std::string_view csv, PowerModelKind fallback) {
  std::vector<ModeTemplate> out;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    const std::string_view item = csv.substr(0, comma);
    if (!item.empty()) out.push_back(parse_mode_template(item, fallback));
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error("mode list is empty");
  return out;
}

std::vector<ModeTemplate> default_mode_templates(const ScenarioConfig& cfg) {
  std::vector<ModeTemplate> out;
  for (auto mode : {AccessMode::CellFree, AccessMode::UserCentric})
    for (auto bf : {Beamforming::FullyDigital, Beamforming::Hybrid})
      for (auto csi : {CsiKind::Perfect, CsiKind::Estimated})
        for (auto alg : {PowerAlgorithm::OptGee, PowerAlgorithm::Uniform})
          out.push_back(ModeTemplate{mode, bf, csi, alg, cfg.power_model});
  return out;
}

std::vector<double> default_pmax_sweep_dbm() {
  std::vector<double> out;
  for (int d = -10; d <= 30; d += 5) out.push_back(d);
  return out;
}

CampaignResults run_campaign(const ScenarioConfig& cfg, std::vector<double> sweep,
                             const std::vector<ModeTemplate>& modes, const CampaignOptions& opts) {
  validate(cfg);
  if (sweep.empty()) throw Error("run_campaign: the P_max sweep is empty");
  if (modes.empty()) throw Error("run_campaign: no modes requested");
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());

  const int drops = cfg.drops;
  std::vector<std::vector<ResultRow>> per_drop(drops);
  const int threads = std::clamp(opts.threads, 1, drops);
  if (threads == 1) {
    for (int d = 0; d < drops; ++d) per_drop[d] = run_drop(cfg, opts.first_drop + d, sweep, modes, opts);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int d = next++; d < drops; d = next++) {
          per_drop[d] = run_drop(cfg, opts.first_drop + d, sweep, modes, opts);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  CampaignResults res;
  res.rows.reserve(static_cast<std::size_t>(drops) * modes.size() * sweep.size());
  for (auto& rows : per_drop)
    for (auto& r : rows) res.rows.push_back(std::move(r));
  res.summary = summarize(res.rows);
  return res;
}

std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows) {
  struct Acc {
    ModeTemplate tmpl;
    double pmax = 0.0;
    std::vector<double> gee;
    std::vector<double> ase;
  };
  std::vector<Acc> cells;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Acc& a) {
      return a.tmpl == r.desc.tmpl && a.pmax == r.desc.pmax_dbm;
    });
    if (it == cells.end()) {
      cells.push_back(Acc{r.desc.tmpl, r.desc.pmax_dbm, {}, {}});
      it = std::prev(cells.end());
    }
    if (!r.error.empty()) continue;
    it->gee.push_back(r.gee_mbit_per_joule);
    it->ase.push_back(r.sum_ase_bit_s_hz);
  }
  auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {std::nan(""), std::nan("")};
    double s = 0.0;
    for (double x : v) s += x;
    const double mean = s / static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };
  std::vector<CellSummary> out;
  out.reserve(cells.size());
  for (const auto& a : cells) {
    CellSummary c;
    c.tmpl = a.tmpl;
    c.pmax_dbm = a.pmax;
    c.count = static_cast<int>(a.gee.size());
    std::tie(c.gee_mean, c.gee_std) = mean_std(a.gee);
    std::tie(c.sum_ase_mean, c.sum_ase_std) = mean_std(a.ase);
    out.push_back(c);
  }
  return out;
}

void write_results_csv(const CampaignResults& results, std::ostream& out) {
  out << kResultsHeader << '\n';
  for (const auto& r : results.rows) {
    out << r.desc.drop << ',';
    mode_columns(out, r.desc.tmpl);
    out << ',' << short_num(r.desc.pmax_dbm) << ',';
    if (!r.error.empty()) {
      out << "nan,nan,error:" << sanitize(r.error) << ',';
    } else {
      out << num(r.gee_mbit_per_joule) << ',' << num(r.sum_ase_bit_s_hz) << ',';
      for (std::size_t i = 0; i < r.per_user_ase.size(); ++i) {
        if (i) out << ';';
        out << num(r.per_user_ase[i]);
      }
      out << ',';
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
    out << buf << '\n';
  }
}

void write_summary_csv(const CampaignResults& results, std::ostream& out) {
  out << kSummaryHeader << '\n';
  for (const auto& c : results.summary) {
    mode_columns(out, c.tmpl);
    out << ',' << short_num(c.pmax_dbm) << ',' << c.count << ',' << num(c.gee_mean) << ','
        << num(c.gee_std) << ',' << num(c.sum_ase_mean) << ',' << num(c.sum_ase_std) << '\n';
  }
}

void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& e : trace.entries) {
    out << e.sweep << ',' << e.ap << ',' << num(e.true_gee) << ',' << num(e.surrogate) << ','
        << num(e.lambda) << '\n';
  }
}

void write_results(const CampaignResults& results, const std::filesystem::path& out_dir,
                   bool with_traces) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  auto write_file = [](const std::filesystem::path& path, auto&& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    body(f);
    f.flush();
    if (!f) throw Error("failed writing '" + path.string() + "'");
  };
  write_file(out_dir / "results.csv", [&](std::ostream& o) { write_results_csv(results, o); });
  write_file(out_dir / "summary.csv", [&](std::ostream& o) { write_summary_csv(results, o); });
  if (with_traces) {
    for (std::size_t i = 0; i < results.rows.size(); ++i) {
      const auto& tr = results.rows[i].trace;
      if (tr.entries.empty()) continue;
      write_file(out_dir / ("trace_" + std::to_string(i) + ".csv"),
                 [&](std::ostream& o) { write_trace_csv(tr, o); });
    }
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CELLFREE_SIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace cfsim
