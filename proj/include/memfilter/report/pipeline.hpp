// Copyright 2026 The Memfilter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MEMFILTER_REPORT_PIPELINE_HPP_
#define MEMFILTER_REPORT_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memfilter/core/types.hpp"
#include "memfilter/mcs/composite.hpp"
#include "memfilter/mia/mia.hpp"
#include "memfilter/portfolio/portfolio.hpp"
#include "memfilter/stats/stats.hpp"

namespace memfilter::report {

using Path = std::filesystem::path;

struct RunContext {
  Path out_dir;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool strict = false;
  std::ostream* log = nullptr;  // progress and warnings; null = silent
};

struct RunStatus {
  std::size_t errors = 0;    // per-record failures
  std::size_t warnings = 0;
};

// Features and membership labels for score rows, using each model's cutoff.
struct LabeledFeatures {
  std::vector<mcs::RawFeatures> features;
  std::vector<bool> labels;
};
LabeledFeatures label_scores(const std::vector<mia::ScoreRow>& scores,
                             const ModelRegistry& registry);

std::vector<mcs::McsRow> apply_model(const mcs::McsModel& model,
                                     const std::vector<mia::ScoreRow>& scores,
                                     const ModelRegistry& registry);

// Quintile inputs from signals joined to MCS and realized next-day returns.
std::vector<stats::QuintileInput> quintile_inputs(
    const std::vector<SignalRecord>& signals,
    const std::vector<mcs::McsRow>& mcs_rows, const ModelRegistry& registry,
    const portfolio::ReturnTable& forward);

struct SimulateOptions {
  std::optional<Path> plan;  // defaults when absent
};
RunStatus run_simulate(const SimulateOptions& opt, const RunContext& ctx);

struct ScoreOptions {
  Path corpus;
  Path registry;
  double k_percent = mia::kDefaultKPercent;
  std::string ref_model_id;  // empty: first model in the registry
};
RunStatus run_score(const ScoreOptions& opt, const RunContext& ctx);

struct FitCommandOptions {
  Path scores;
  Path registry;
  double lambda = mcs::kDefaultLambda;
  std::string variant = "full";
};
RunStatus run_fit(const FitCommandOptions& opt, const RunContext& ctx);

struct CmmdOptions {
  Path scores;
  Path registry;
  Path model;
  Path signals;
};
RunStatus run_cmmd(const CmmdOptions& opt, const RunContext& ctx);

struct BacktestOptions {
  Path signals;
  Path prices;
  std::optional<Path> mcs;
  std::optional<Path> partitions;
  std::optional<Path> registry;
  std::vector<std::string> strategies;  // empty: every runnable strategy
  double tc_bps = portfolio::kDefaultTcBps;
  int momentum_window = 20;
  std::int64_t resamples = portfolio::kDefaultResamples;
  bool winsorize = true;
  double winsor_low = 0.5;
  double winsor_high = 99.5;
  std::vector<double> sweep{std::begin(portfolio::kDefaultSweep),
                            std::end(portfolio::kDefaultSweep)};
};
RunStatus run_backtest(const BacktestOptions& opt, const RunContext& ctx);

struct ParseOptions {
  Path signals;
  std::optional<Path> rules;
};
RunStatus run_parse(const ParseOptions& opt, const RunContext& ctx);

// Full pipeline into <out>/{simulate,score,fit,cmmd,backtest} plus an MCS
// variant ablation table in <out>.
struct ReportOptions {
  std::optional<Path> plan;  // simulate first when set
  std::optional<Path> corpus;
  std::optional<Path> registry;
  std::optional<Path> signals;
  std::optional<Path> prices;
  double k_percent = mia::kDefaultKPercent;
  std::string ref_model_id;
  double lambda = mcs::kDefaultLambda;
  std::string variant = "full";
  double tc_bps = portfolio::kDefaultTcBps;
  std::int64_t resamples = portfolio::kDefaultResamples;
};
RunStatus run_report(const ReportOptions& opt, const RunContext& ctx);

}  // namespace memfilter::report

#endif  // MEMFILTER_REPORT_PIPELINE_HPP_
