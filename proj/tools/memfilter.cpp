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

// memfilter: score, fit, partition, and backtest memorization-filtered
// trading signals.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/report/manifest.hpp"
#include "memfilter/report/pipeline.hpp"

namespace {

namespace rp = memfilter::report;

std::optional<rp::Path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return rp::Path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memorization-aware signal filtering pipeline", "memfilter"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(rp::version()));

  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string out_dir = "out";
  bool strict = false;
  bool quiet = false;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw");
  app.add_option("--jobs", jobs, "Worker threads for scoring and bootstrap")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "Output directory");
  app.add_flag("--strict", strict, "Exit nonzero on any per-record error");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  // simulate
  std::string plan;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic world");
  sim->add_option("--plan", plan, "Plan JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);

  // score
  rp::ScoreOptions score;
  std::string corpus, registry;
  auto* sc = app.add_subcommand("score", "Compute MIA scores for a corpus");
  sc->add_option("--corpus", corpus)->required()->check(CLI::ExistingFile);
  sc->add_option("--registry", registry)->required()->check(CLI::ExistingFile);
  sc->add_option("--k-percent", score.k_percent)->check(CLI::Range(0.0, 100.0));
  sc->add_option("--ref-model", score.ref_model_id,
                 "Reference model id (default: first in registry)");

  // fit
  rp::FitCommandOptions fit;
  std::string scores;
  auto* ft = app.add_subcommand("fit", "Fit the composite score");
  ft->add_option("--scores", scores)->required()->check(CLI::ExistingFile);
  ft->add_option("--registry", registry)->required()->check(CLI::ExistingFile);
  ft->add_option("--lambda", fit.lambda)->check(CLI::NonNegativeNumber);
  ft->add_option("--variant", fit.variant,
                 "full | mia_only | temporal_only | single_method:<name>");

  // cmmd
  std::string model, signals;
  auto* cm = app.add_subcommand("cmmd", "Partition models per stock-date");
  cm->add_option("--scores", scores)->required()->check(CLI::ExistingFile);
  cm->add_option("--registry", registry)->required()->check(CLI::ExistingFile);
  cm->add_option("--model", model)->required()->check(CLI::ExistingFile);
  cm->add_option("--signals", signals)->required()->check(CLI::ExistingFile);

  // backtest
  rp::BacktestOptions bt;
  std::string prices, mcs, partitions;
  bool no_winsorize = false;
  auto* bk = app.add_subcommand("backtest", "Run strategies and report tables");
  bk->add_option("--signals", signals)->required()->check(CLI::ExistingFile);
  bk->add_option("--prices", prices)->required()->check(CLI::ExistingFile);
  bk->add_option("--mcs", mcs)->check(CLI::ExistingFile);
  bk->add_option("--partitions", partitions)->check(CLI::ExistingFile);
  bk->add_option("--registry", registry)->check(CLI::ExistingFile);
  bk->add_option("--strategy", bt.strategies, "Repeatable; default all runnable");
  bk->add_option("--tc-bps", bt.tc_bps)->check(CLI::NonNegativeNumber);
  bk->add_option("--momentum-window", bt.momentum_window)
      ->check(CLI::PositiveNumber);
  bk->add_option("--resamples", bt.resamples)->check(CLI::PositiveNumber);
  bk->add_option("--sweep", bt.sweep, "Threshold percentiles");
  bk->add_flag("--no-winsorize", no_winsorize);

  // parse
  std::string rules;
  auto* ps = app.add_subcommand("parse", "Re-derive alpha from raw generations");
  ps->add_option("--signals", signals)->required()->check(CLI::ExistingFile);
  ps->add_option("--rules", rules)->check(CLI::ExistingFile);

  // report
  rp::ReportOptions rep;
  auto* rt = app.add_subcommand("report", "Run the whole pipeline");
  rt->add_option("--plan", plan)->check(CLI::ExistingFile);
  rt->add_option("--corpus", corpus)->check(CLI::ExistingFile);
  rt->add_option("--registry", registry)->check(CLI::ExistingFile);
  rt->add_option("--signals", signals)->check(CLI::ExistingFile);
  rt->add_option("--prices", prices)->check(CLI::ExistingFile);
  rt->add_option("--k-percent", rep.k_percent)->check(CLI::Range(0.0, 100.0));
  rt->add_option("--ref-model", rep.ref_model_id);
  rt->add_option("--lambda", rep.lambda)->check(CLI::NonNegativeNumber);
  rt->add_option("--variant", rep.variant);
  rt->add_option("--tc-bps", rep.tc_bps)->check(CLI::NonNegativeNumber);
  rt->add_option("--resamples", rep.resamples)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  rp::RunContext ctx;
  ctx.out_dir = out_dir;
  if (seed_opt->count() > 0) ctx.seed = seed;
  ctx.jobs = jobs;
  ctx.strict = strict;
  ctx.log = quiet ? nullptr : &std::cerr;

  try {
    rp::RunStatus status;
    if (*sim) {
      status = rp::run_simulate({opt_path(plan)}, ctx);
    } else if (*sc) {
      score.corpus = corpus;
      score.registry = registry;
      status = rp::run_score(score, ctx);
    } else if (*ft) {
      fit.scores = scores;
      fit.registry = registry;
      status = rp::run_fit(fit, ctx);
    } else if (*cm) {
      status = rp::run_cmmd({scores, registry, model, signals}, ctx);
    } else if (*bk) {
      bt.signals = signals;
      bt.prices = prices;
      bt.mcs = opt_path(mcs);
      bt.partitions = opt_path(partitions);
      bt.registry = opt_path(registry);
      bt.winsorize = !no_winsorize;
      status = rp::run_backtest(bt, ctx);
    } else if (*ps) {
      status = rp::run_parse({signals, opt_path(rules)}, ctx);
    } else if (*rt) {
      rep.plan = opt_path(plan);
      rep.corpus = opt_path(corpus);
      rep.registry = opt_path(registry);
      rep.signals = opt_path(signals);
      rep.prices = opt_path(prices);
      status = rp::run_report(rep, ctx);
    }
    if (status.errors > 0 || status.warnings > 0) {
      std::cerr << "memfilter: " << status.errors << " error(s), "
                << status.warnings << " warning(s)\n";
    }
    if (strict && status.errors > 0) return 1;
  } catch (const memfilter::Error& e) {
    std::cerr << "memfilter: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "memfilter: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
