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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cfsim/optimizer.hpp"
#include "cfsim/scenario.hpp"

namespace cfsim {

/// One simulated configuration, repeated over drops and the P_max sweep.
struct ModeTemplate {
  AccessMode mode = AccessMode::UserCentric;
  Beamforming beamforming = Beamforming::FullyDigital;
  CsiKind csi = CsiKind::Perfect;
  PowerAlgorithm power_alg = PowerAlgorithm::OptGee;
  PowerModelKind power_model = PowerModelKind::Basic;

  bool operator==(const ModeTemplate&) const = default;
};

std::string_view to_string(AccessMode v);
std::string_view to_string(Beamforming v);
std::string_view to_string(CsiKind v);
std::string_view to_string(PowerAlgorithm v);
std::string_view to_string(PowerModelKind v);

/// Parses `MODE:BF:CSI:ALG[:POWER_MODEL]`, e.g. `UC:HYBRID:ESTIMATED:OPT_GEE:IDLE_AWARE`.
/// Case-insensitive; `HY` is accepted for HYBRID. The power model defaults to `fallback`.
ModeTemplate parse_mode_template(std::string_view text, PowerModelKind fallback);
std::vector<ModeTemplate> parse_mode_list(std::string_view csv, PowerModelKind fallback);

/// {CF, UC} x {FD, HYBRID} x {PERFECT, ESTIMATED} x {OPT_GEE, UNI} with the config's power model.
std::vector<ModeTemplate> default_mode_templates(const ScenarioConfig& cfg);

/// -10 to 30 dBm in 5 dB steps.
std::vector<double> default_pmax_sweep_dbm();

struct RunDescriptor {
  ModeTemplate tmpl;
  double pmax_dbm = 0.0;
  int drop = 0;
};

struct ResultRow {
  RunDescriptor desc;
  double gee_mbit_per_joule = 0.0;
  double sum_ase_bit_s_hz = 0.0;
  double power_w = 0.0;
  std::vector<double> per_user_ase;
  double wall_ms = 0.0;
  std::string error;  ///< non-empty when the row aborted
  ConvergenceTrace trace;
  PowerAllocation alloc;
};

struct CellSummary {
  ModeTemplate tmpl;
  double pmax_dbm = 0.0;
  int count = 0;
  double gee_mean = 0.0;
  double gee_std = 0.0;
  double sum_ase_mean = 0.0;
  double sum_ase_std = 0.0;
};

struct CampaignResults {
  std::vector<ResultRow> rows;
  std::vector<CellSummary> summary;
};

struct CampaignOptions {
  int threads = 1;
  bool record_wall_time = false;  ///< otherwise wall_ms is written as 0 so output is reproducible
  int first_drop = 0;
};

/// Rows come out ordered by (drop, template, ascending P_max) whatever the thread count.
/// Channels are realized once per drop and shared by every template.
CampaignResults run_campaign(const ScenarioConfig& cfg, std::vector<double> sweep_pmax_dbm,
                             const std::vector<ModeTemplate>& modes,
                             const CampaignOptions& opts = {});

/// Per (template, P_max) mean and sample standard deviation over non-error rows.
std::vector<CellSummary> summarize(const std::vector<ResultRow>& rows);

inline constexpr std::string_view kResultsHeader =
    "drop,mode,beamforming,csi,power_alg,power_model,pmax_dbm,gee_mbit_per_joule,"
    "sum_ase_bit_s_hz,per_user_ase,wall_ms";
inline constexpr std::string_view kSummaryHeader =
    "mode,beamforming,csi,power_alg,power_model,pmax_dbm,drops,gee_mean,gee_std,"
    "sum_ase_mean,sum_ase_std";
inline constexpr std::string_view kTraceHeader = "sweep,ap,true_gee,surrogate,lambda";

void write_results_csv(const CampaignResults& results, std::ostream& out);
void write_summary_csv(const CampaignResults& results, std::ostream& out);
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out);

/// results.csv, summary.csv and (optionally) trace_<row>.csv for every row with a trace.
void write_results(const CampaignResults& results, const std::filesystem::path& out_dir,
                   bool with_traces = false);

/// `requested` if positive, else CELLFREE_SIM_THREADS, else 1.
int resolve_threads(int requested);

/// Built-in oracle checks; prints one line per check, returns true if all pass.
bool run_selftest(std::ostream& out);

}  // namespace cfsim
