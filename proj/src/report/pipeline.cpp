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

#include "memfilter/report/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "memfilter/cmmd/cmmd.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/core/io.hpp"
#include "memfilter/parser/signal_parser.hpp"
#include "memfilter/report/manifest.hpp"
#include "memfilter/synth/synthetic.hpp"

namespace memfilter::report {
namespace {

std::ifstream open_in(const Path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

// Prefixes any library error with the offending file.
template <typename F>
auto in_file(const Path& path, F&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

template <typename F>
auto read_file(const Path& path, F&& reader) {
  auto in = open_in(path);
  return in_file(path, [&] { return reader(in); });
}

void log_line(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << '\n';
}

void warn(const RunContext& ctx, RunStatus* status, const std::string& msg) {
  ++status->warnings;
  log_line(ctx, "warning: " + msg);
}

std::string fmt(double v) { return format_double(v); }

std::string fmt(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<mia::ScoreRow> load_scores(const Path& p) {
  return read_file(p, [](std::istream& in) { return mia::read_scores(in); });
}

std::vector<mcs::McsRow> load_mcs(const Path& p) {
  return read_file(p, [](std::istream& in) { return mcs::read_mcs(in); });
}

std::vector<cmmd::CmmdPartition> load_partitions(const Path& p) {
  return read_file(p,
                   [](std::istream& in) { return cmmd::read_partitions(in); });
}

mcs::McsModel load_model(const Path& p) {
  return read_file(p, [](std::istream& in) { return mcs::read_model(in); });
}

void write_separation_row(std::ostream& out, const std::string& model,
                          const std::string& method,
                          const std::vector<double>& scores,
                          const std::vector<bool>& labels,
                          const RunContext& ctx, RunStatus* status) {
  const auto n_is = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), true));
  const std::size_t n_oos = labels.size() - n_is;
  out << model << ',' << method << ',' << n_is << ',' << n_oos << ',';
  try {
    const auto s = mcs::separation_report(scores, labels);
    out << fmt(s.is_mean) << ',' << fmt(s.oos_mean) << ',' << fmt(s.cohens_d)
        << ',' << fmt(s.ks_p) << ',' << fmt(s.t_p) << ',' << fmt(s.auc) << '\n';
  } catch (const Error& e) {
    out << ",,,,,\n";
    warn(ctx, status, "separation " + model + "/" + method + ": " + e.what());
  }
}

std::optional<double> method_value(const mia::MiaScoreVector& s,
                                   std::size_t m) {
  switch (m) {
    case 0: return s.loss;
    case 1: return s.min_k;
    case 2: return s.min_k_pp;
    case 3: return s.zlib_ratio;
    default: return s.ref_ratio;
  }
}

std::vector<std::string> model_order(const ModelRegistry& registry) {
  std::vector<std::string> ids;
  for (const auto& m : registry.models()) ids.push_back(m.model_id);
  return ids;
}

void write_days_csv(std::ostream& out, const std::vector<Date>& dates,
                    const std::vector<double>& a, const std::vector<double>& b,
                    const char* header) {
  out << header << '\n';
  for (std::size_t i = 0; i < dates.size(); ++i) {
    out << dates[i].iso() << ',' << fmt(a[i]) << ',' << fmt(b[i]) << '\n';
  }
}

}  // namespace

LabeledFeatures label_scores(const std::vector<mia::ScoreRow>& scores,
                             const ModelRegistry& registry) {
  LabeledFeatures lf;
  lf.features.reserve(scores.size());
  lf.labels.reserve(scores.size());
  for (const auto& row : scores) {
    const ModelSpec& spec = registry.at(row.model_id);
    lf.features.push_back(mcs::make_features(row.scores, row.date, spec));
    lf.labels.push_back(label_membership(row.date, spec).is_member);
  }
  return lf;
}

std::vector<mcs::McsRow> apply_model(const mcs::McsModel& model,
                                     const std::vector<mia::ScoreRow>& scores,
                                     const ModelRegistry& registry) {
  std::vector<mcs::McsRow> out;
  out.reserve(scores.size());
  for (const auto& row : scores) {
    const ModelSpec& spec = registry.at(row.model_id);
    const auto raw = mcs::make_features(row.scores, row.date, spec);
    out.push_back({row.prompt_id, row.model_id, row.ticker, row.date,
                   mcs::mcs_predict(model, raw), raw.tau});
  }
  return out;
}

std::vector<stats::QuintileInput> quintile_inputs(
    const std::vector<SignalRecord>& signals,
    const std::vector<mcs::McsRow>& mcs_rows, const ModelRegistry& registry,
    const portfolio::ReturnTable& forward) {
  const auto joined = cmmd::join_signals(signals, mcs_rows);
  std::vector<stats::QuintileInput> out;
  out.reserve(joined.votes.size());
  for (const auto& v : joined.votes) {
    const ModelSpec* spec = registry.find(v.model_id);
    if (!spec) continue;
    auto t = forward.find(v.ticker);
    if (t == forward.end()) continue;
    auto d = t->second.find(v.date);
    if (d == t->second.end()) continue;
    out.push_back({v.mcs, v.alpha, d->second,
                   label_membership(v.date, *spec).is_member});
  }
  return out;
}

RunStatus run_simulate(const SimulateOptions& opt, const RunContext& ctx) {
  synth::SyntheticPlan plan;
  if (opt.plan) {
    plan = read_file(*opt.plan,
                     [](std::istream& in) { return synth::read_plan(in); });
  }
  if (ctx.seed) plan.seed = *ctx.seed;
  const auto world = synth::generate(plan);
  OutputDir od(ctx.out_dir, "simulate");
  if (opt.plan) od.add_input("plan", *opt.plan);
  od.set_seed(plan.seed);
  od.config()["records"] = world.corpus.size();
  od.write("plan.json", [&](std::ostream& o) { synth::write_plan(o, plan); });
  od.write("registry.jsonl",
           [&](std::ostream& o) { write_registry(o, world.registry); });
  od.write("corpus.jsonl",
           [&](std::ostream& o) { write_corpus(o, world.corpus); });
  od.write("signals.jsonl",
           [&](std::ostream& o) { write_signals(o, world.signals); });
  od.write("prices.csv", [&](std::ostream& o) { write_prices(o, world.prices); });
  od.write("oracle.json", [&](std::ostream& o) {
    nlohmann::ordered_json j;
    j["expected_loss_effect"] = synth::expected_effect(plan);
    j["up_fraction"] = world.up_fraction;
    o << j.dump(2) << '\n';
  });
  od.finish(0, 0);
  log_line(ctx, "simulate: " + std::to_string(world.corpus.size()) +
                    " records, " + std::to_string(world.signals.size()) +
                    " signals");
  return {};
}

RunStatus run_score(const ScoreOptions& opt, const RunContext& ctx) {
  RunStatus status;
  Corpus corpus;
  corpus.registry =
      in_file(opt.registry, [&] { return load_registry(opt.registry); });
  corpus.records = read_file(opt.corpus, [&](std::istream& in) {
    return read_corpus(in, corpus.registry);
  });
  std::string ref = opt.ref_model_id;
  if (ref.empty()) {
    if (corpus.registry.size() == 0) throw ConfigError("registry is empty");
    ref = corpus.registry.models().front().model_id;
  } else if (!corpus.registry.contains(ref)) {
    throw ConfigError("reference model " + ref + " is not in the registry");
  }
  if (!(opt.k_percent > 0.0 && opt.k_percent <= 100.0)) {
    throw ConfigError("k_percent must be in (0, 100]");
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto batch = mia::score_corpus(corpus.records, ref, opt.k_percent,
                                 std::max(1u, ctx.jobs));
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  for (const auto& w : batch.warnings) warn(ctx, &status, w);
  for (const auto& e : batch.errors) {
    ++status.errors;
    log_line(ctx, "error: " + e);
  }
  std::ostringstream rate;
  rate << "score: " << batch.rows.size() << " rows in " << secs << " s ("
       << (secs > 0 ? static_cast<double>(batch.rows.size()) / secs : 0.0)
       << " rows/s)";
  log_line(ctx, rate.str());

  OutputDir od(ctx.out_dir, "score");
  od.add_input("corpus", opt.corpus);
  od.add_input("registry", opt.registry);
  od.set_seed(ctx.seed.value_or(0));
  od.config()["k_percent"] = opt.k_percent;
  od.config()["ref_model_id"] = ref;
  od.write("scores.jsonl",
           [&](std::ostream& o) { mia::write_scores(o, batch.rows); });
  od.finish(status.errors, status.warnings);
  return status;
}

RunStatus run_fit(const FitCommandOptions& opt, const RunContext& ctx) {
  RunStatus status;
  if (!(opt.lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  const auto variant = mcs::Variant::parse(opt.variant);
  const auto registry = in_file(opt.registry, [&] { return load_registry(opt.registry); });
  const auto scores = load_scores(opt.scores);
  const auto lf = label_scores(scores, registry);

  mcs::FitOptions fo;
  fo.lambda = opt.lambda;
  fo.variant = variant;
  const auto model = mcs::fit_mcs(lf.features, lf.labels, fo);
  if (!model.converged) {
    warn(ctx, &status, "fit stopped at the iteration limit");
  }
  log_line(ctx, "fit: " + std::to_string(model.iterations) + " iterations");
  const auto rows = apply_model(model, scores, registry);

  OutputDir od(ctx.out_dir, "fit");
  od.add_input("scores", opt.scores);
  od.add_input("registry", opt.registry);
  od.set_seed(ctx.seed.value_or(0));
  od.config()["lambda"] = opt.lambda;
  od.config()["variant"] = variant.name();
  const std::string fp = fingerprint_file(opt.scores);
  od.write("mcs_model.json",
           [&](std::ostream& o) { mcs::write_model(o, model, fp); });
  od.write("mcs.jsonl", [&](std::ostream& o) { mcs::write_mcs(o, rows); });

  od.write("separation_report.csv", [&](std::ostream& o) {
    o << "model,method,n_is,n_oos,is_mean,oos_mean,d,ks_p,t_p,auc\n";
    for (const auto& id : model_order(registry)) {
      for (std::size_t m = 0; m <= mcs::kNumMia; ++m) {
        std::vector<double> values;
        std::vector<bool> labels;
        for (std::size_t i = 0; i < scores.size(); ++i) {
          if (scores[i].model_id != id) continue;
          const auto v = m < mcs::kNumMia ? method_value(scores[i].scores, m)
                                          : std::optional<double>(rows[i].mcs);
          if (!v) continue;
          values.push_back(*v);
          labels.push_back(lf.labels[i]);
        }
        const char* method = m < mcs::kNumMia ? mcs::kMethodNames[m] : "mcs";
        if (values.empty()) {
          // The reference model has no reference ratio of its own.
          o << id << ',' << method << ",0,0,,,,,,\n";
          continue;
        }
        write_separation_row(o, id, method, values, labels, ctx, &status);
      }
    }
    std::vector<double> all;
    for (const auto& r : rows) all.push_back(r.mcs);
    write_separation_row(o, "all", "mcs", all, lf.labels, ctx, &status);
  });

  od.write("correlations.csv", [&](std::ostream& o) {
    o << "method";
    for (const char* name : mcs::kMethodNames) o << ',' << name;
    o << '\n';
    for (std::size_t a = 0; a < mcs::kNumMia; ++a) {
      o << mcs::kMethodNames[a];
      for (std::size_t b = 0; b < mcs::kNumMia; ++b) {
        std::vector<double> xa, xb;
        for (const auto& s : scores) {
          const auto va = method_value(s.scores, a);
          const auto vb = method_value(s.scores, b);
          if (va && vb) {
            xa.push_back(*va);
            xb.push_back(*vb);
          }
        }
        o << ',';
        try {
          if (xa.size() >= 2) o << fmt(stats::pearson(xa, xb));
        } catch (const DomainError&) {
        }
      }
      o << '\n';
    }
  });
  od.finish(status.errors, status.warnings);
  return status;
}

RunStatus run_cmmd(const CmmdOptions& opt, const RunContext& ctx) {
  RunStatus status;
  const auto registry = in_file(opt.registry, [&] { return load_registry(opt.registry); });
  const auto scores = load_scores(opt.scores);
  const auto model = load_model(opt.model);
  const auto signals = in_file(opt.signals, [&] { return load_signals(opt.signals); });
  const auto rows = apply_model(model, scores, registry);
  const auto joined = cmmd::join_signals(signals, rows);
  if (joined.missing_mcs > 0) {
    warn(ctx, &status,
         std::to_string(joined.missing_mcs) + " signals have no MCS row");
  }
  const auto series = cmmd::cmmd_signal_series(joined.votes);
  for (const auto& e : series.errors) {
    ++status.errors;
    log_line(ctx, "error: " + e);
  }
  if (series.skipped > 0) {
    warn(ctx, &status,
         std::to_string(series.skipped) + " stock-dates have fewer than 2 models");
  }

  OutputDir od(ctx.out_dir, "cmmd");
  od.add_input("scores", opt.scores);
  od.add_input("registry", opt.registry);
  od.add_input("model", opt.model);
  od.add_input("signals", opt.signals);
  od.set_seed(ctx.seed.value_or(0));
  od.write("mcs.jsonl", [&](std::ostream& o) { mcs::write_mcs(o, rows); });
  od.write("partitions.jsonl", [&](std::ostream& o) {
    cmmd::write_partitions(o, series.partitions);
  });
  od.write("disagreement.csv", [&](std::ostream& o) {
    o << "partitions,with_delta,count_abs_delta_gt_half,fraction,skipped\n";
    o << series.partitions.size() << ',';
    try {
      const auto d = cmmd::disagreement_stats(series.partitions);
      o << d.with_delta << ',' << d.count_gt_half << ',' << fmt(d.fraction);
    } catch (const Error&) {
      o << ",,";
    }
    o << ',' << series.skipped << '\n';
  });
  od.finish(status.errors, status.warnings);
  return status;
}

RunStatus run_backtest(const BacktestOptions& opt, const RunContext& ctx) {
  using portfolio::StrategyKind;
  RunStatus status;
  const std::uint64_t seed = ctx.seed.value_or(0);
  const auto signals = in_file(opt.signals, [&] { return load_signals(opt.signals); });
  const auto prices = in_file(opt.prices, [&] { return load_prices(opt.prices); });
  std::vector<mcs::McsRow> mcs_rows;
  if (opt.mcs) mcs_rows = load_mcs(*opt.mcs);
  std::vector<cmmd::CmmdPartition> partitions;
  if (opt.partitions) partitions = load_partitions(*opt.partitions);
  std::optional<ModelRegistry> registry;
  if (opt.registry) registry = in_file(*opt.registry, [&] { return load_registry(*opt.registry); });

  const auto raw_forward = portfolio::forward_returns(prices);
  auto forward = opt.winsorize ? portfolio::winsorize(raw_forward, opt.winsor_low,
                                                      opt.winsor_high)
                               : raw_forward;
  const auto data = portfolio::make_backtest_data(signals, mcs_rows, partitions,
                                                  &prices, forward);

  std::vector<StrategyKind> kinds;
  if (opt.strategies.empty()) {
    for (StrategyKind k : portfolio::kAllStrategies) {
      if (k == StrategyKind::kDebiasedAlpha && !data.votes_have_mcs) continue;
      if (k == StrategyKind::kCmmd && !data.has_partitions) continue;
      kinds.push_back(k);
    }
  } else {
    for (const auto& name : opt.strategies) {
      kinds.push_back(portfolio::strategy_from_name(name));
    }
  }

  OutputDir od(ctx.out_dir, "backtest");
  od.add_input("signals", opt.signals);
  od.add_input("prices", opt.prices);
  if (opt.mcs) od.add_input("mcs", *opt.mcs);
  if (opt.partitions) od.add_input("partitions", *opt.partitions);
  if (opt.registry) od.add_input("registry", *opt.registry);
  od.set_seed(seed);
  auto& cfg = od.config();
  cfg["tc_bps"] = opt.tc_bps;
  cfg["momentum_window"] = opt.momentum_window;
  cfg["resamples"] = opt.resamples;
  cfg["winsorize"] = opt.winsorize;
  cfg["winsor_low"] = opt.winsor_low;
  cfg["winsor_high"] = opt.winsor_high;
  auto names = nlohmann::ordered_json::array();
  for (auto k : kinds) names.push_back(portfolio::strategy_name(k));
  cfg["strategies"] = names;

  struct Run {
    StrategyKind kind;
    std::vector<portfolio::DailyPortfolioResult> days;
    std::vector<double> net;
  };
  std::vector<Run> runs;
  for (StrategyKind k : kinds) {
    portfolio::StrategyConfig sc;
    sc.kind = k;
    sc.tc_bps = opt.tc_bps;
    sc.momentum_window = opt.momentum_window;
    sc.rng_seed = seed;
    Run r{k, portfolio::run_strategy(sc, data), {}};
    r.net = portfolio::net_returns(r.days);
    od.write("equity_" + portfolio::strategy_name(k) + ".csv",
             [&](std::ostream& o) { portfolio::write_equity_curve(o, r.days); });
    runs.push_back(std::move(r));
  }

  od.write("summary.csv", [&](std::ostream& o) {
    o << "strategy,total_return,ann_return,ann_vol,sharpe,max_drawdown,n_days\n";
    for (const auto& r : runs) {
      const auto s = portfolio::summarize(r.days);
      o << portfolio::strategy_name(r.kind) << ',' << fmt(s.total_return) << ','
        << fmt(s.ann_return) << ',' << fmt(s.ann_vol) << ',' << fmt(s.sharpe)
        << ',' << fmt(s.max_drawdown) << ',' << s.n_days << '\n';
    }
  });

  const Run* raw = nullptr;
  for (const auto& r : runs) {
    if (r.kind == StrategyKind::kRawAlpha) raw = &r;
  }
  if (raw) {
    od.write("bootstrap.csv", [&](std::ostream& o) {
      o << "strategy,baseline,sharpe_diff,ci_low,ci_high,p_two_sided,"
           "p_one_sided,resamples\n";
      for (const auto& r : runs) {
        if (&r == raw) continue;
        try {
          const auto b = stats::paired_bootstrap_sharpe_diff(
              r.net, raw->net, opt.resamples, seed, std::max(1u, ctx.jobs));
          o << portfolio::strategy_name(r.kind) << ",raw_alpha,"
            << fmt(b.point_estimate) << ',' << fmt(b.ci_low) << ','
            << fmt(b.ci_high) << ',' << fmt(b.p_value_two_sided) << ','
            << fmt(b.p_value_one_sided) << ',' << b.resamples << '\n';
        } catch (const Error& e) {
          warn(ctx, &status, "bootstrap " + portfolio::strategy_name(r.kind) +
                                 ": " + e.what());
        }
      }
    });
  }

  od.write("strategy_correlations.csv", [&](std::ostream& o) {
    o << "strategy_a,strategy_b,pearson\n";
    for (std::size_t a = 0; a < runs.size(); ++a) {
      for (std::size_t b = a + 1; b < runs.size(); ++b) {
        o << portfolio::strategy_name(runs[a].kind) << ','
          << portfolio::strategy_name(runs[b].kind) << ',';
        try {
          if (runs[a].net.size() == runs[b].net.size() && runs[a].net.size() >= 2) {
            o << fmt(stats::pearson(runs[a].net, runs[b].net));
          }
        } catch (const DomainError&) {
        }
        o << '\n';
      }
    }
  });

  od.write("diagnostics.csv", [&](std::ostream& o) {
    o << "strategy,autocorr_lag1\n";
    for (const auto& r : runs) {
      o << portfolio::strategy_name(r.kind) << ',';
      try {
        o << fmt(stats::autocorr_lag1(r.net));
      } catch (const Error&) {
      }
      o << '\n';
    }
  });

  if (data.votes_have_mcs) {
    try {
      const auto sweep = portfolio::threshold_sweep(opt.sweep, data, opt.tc_bps,
                                                    opt.resamples, seed);
      od.write("sweep.csv", [&](std::ostream& o) {
        o << "percentile,threshold,sharpe,ci_low,ci_high,p_value\n";
        for (const auto& s : sweep) {
          o << fmt(s.percentile) << ',' << fmt(s.threshold) << ','
            << fmt(s.sharpe) << ',' << fmt(s.ci_low) << ',' << fmt(s.ci_high)
            << ',' << fmt(s.p_value) << '\n';
        }
      });
    } catch (const Error& e) {
      warn(ctx, &status, std::string("threshold sweep: ") + e.what());
    }

    std::vector<std::string> models;
    if (registry) {
      models = model_order(*registry);
    } else {
      std::set<std::string> ids;
      for (const auto& s : signals) ids.insert(s.model_id);
      models.assign(ids.begin(), ids.end());
    }
    try {
      const auto loo = portfolio::leave_one_out(models, data, opt.tc_bps);
      od.write("leave_one_out.csv", [&](std::ostream& o) {
        o << "excluded_model,cmmd_sharpe\n";
        for (const auto& r : loo) {
          o << r.excluded_model << ',' << fmt(r.cmmd_sharpe) << '\n';
        }
      });
    } catch (const Error& e) {
      warn(ctx, &status, std::string("leave-one-out: ") + e.what());
    }

    if (registry) {
      const auto inputs = quintile_inputs(signals, mcs_rows, *registry, raw_forward);
      try {
        const auto table = stats::quintile_accuracy(inputs);
        od.write("quintiles.csv", [&](std::ostream& o) {
          o << "quintile,is_accuracy,oos_accuracy,is_count,oos_count\n";
          for (const auto& q : table) {
            o << q.quintile << ',' << fmt(q.is_accuracy) << ','
              << fmt(q.oos_accuracy) << ',' << q.is_count << ',' << q.oos_count
              << '\n';
          }
        });
      } catch (const Error& e) {
        warn(ctx, &status, std::string("quintiles: ") + e.what());
      }
    }
  }

  if (!partitions.empty()) {
    const auto g = portfolio::group_returns(partitions, forward);
    od.write("group_returns.csv", [&](std::ostream& o) {
      write_days_csv(o, g.dates, g.clean, g.tainted, "date,clean,tainted");
    });
    od.write("decomposition.csv", [&](std::ostream& o) {
      o << "clean_mean_bps,tainted_mean_bps,diff_bps,ci_low_bps,ci_high_bps,"
           "p_two_sided,n_days\n";
      try {
        const auto b = stats::paired_bootstrap_mean_diff(g.clean, g.tainted,
                                                         opt.resamples, seed);
        o << fmt(stats::mean(g.clean) * 1e4) << ','
          << fmt(stats::mean(g.tainted) * 1e4) << ','
          << fmt(b.point_estimate * 1e4) << ',' << fmt(b.ci_low * 1e4) << ','
          << fmt(b.ci_high * 1e4) << ',' << fmt(b.p_value_two_sided) << ','
          << g.dates.size() << '\n';
      } catch (const Error& e) {
        warn(ctx, &status, std::string("decomposition: ") + e.what());
      }
    });
  }

  od.finish(status.errors, status.warnings);
  return status;
}

RunStatus run_parse(const ParseOptions& opt, const RunContext& ctx) {
  RunStatus status;
  const auto rules = opt.rules ? in_file(*opt.rules, [&] { return parser::load_rules(*opt.rules); })
                               : parser::ParseRule::defaults();
  auto signals = in_file(opt.signals, [&] { return load_signals(opt.signals); });
  parser::ParseDiagnostics diag;
  std::size_t changed = 0;
  for (auto& s : signals) {
    if (s.raw_text.empty()) continue;
    const auto p = parser::parse_signal(s.raw_text, rules);
    diag.add(p);
    if (p.status == parser::ParseStatus::kUnparsed) ++status.warnings;
    if (p.alpha != s.alpha || p.confidence != s.confidence) ++changed;
    s.alpha = p.alpha;
    s.confidence = p.confidence;
  }
  if (diag.unparsed > 0) {
    log_line(ctx, "warning: " + std::to_string(diag.unparsed) +
                      " generations had no direction marker");
  }
  OutputDir od(ctx.out_dir, "parse");
  od.add_input("signals", opt.signals);
  if (opt.rules) od.add_input("rules", *opt.rules);
  od.set_seed(ctx.seed.value_or(0));
  od.write("signals.jsonl", [&](std::ostream& o) { write_signals(o, signals); });
  od.write("parse_diagnostics.csv", [&](std::ostream& o) {
    o << "total,bullish,bearish,neutral,unparsed,changed\n"
      << diag.total << ',' << diag.bullish << ',' << diag.bearish << ','
      << diag.neutral << ',' << diag.unparsed << ',' << changed << '\n';
  });
  od.finish(status.errors, status.warnings);
  return status;
}

RunStatus run_report(const ReportOptions& opt, const RunContext& ctx) {
  RunStatus total;
  auto add = [&](const RunStatus& s) {
    total.errors += s.errors;
    total.warnings += s.warnings;
  };
  auto sub = [&](const char* name) {
    RunContext c = ctx;
    c.out_dir = ctx.out_dir / name;
    return c;
  };

  Path corpus, registry_path, signals_path, prices_path;
  if (opt.plan || !opt.corpus) {
    add(run_simulate({opt.plan}, sub("simulate")));
    const Path dir = ctx.out_dir / "simulate";
    corpus = dir / "corpus.jsonl";
    registry_path = dir / "registry.jsonl";
    signals_path = dir / "signals.jsonl";
    prices_path = dir / "prices.csv";
  } else {
    if (!opt.registry || !opt.signals || !opt.prices) {
      throw ConfigError("report needs --registry, --signals and --prices with --corpus");
    }
    corpus = *opt.corpus;
    registry_path = *opt.registry;
    signals_path = *opt.signals;
    prices_path = *opt.prices;
  }

  add(run_score({corpus, registry_path, opt.k_percent, opt.ref_model_id},
                sub("score")));
  const Path scores_path = ctx.out_dir / "score" / "scores.jsonl";
  add(run_fit({scores_path, registry_path, opt.lambda, opt.variant}, sub("fit")));
  const Path model_path = ctx.out_dir / "fit" / "mcs_model.json";
  add(run_cmmd({scores_path, registry_path, model_path, signals_path},
               sub("cmmd")));

  BacktestOptions bo;
  bo.signals = signals_path;
  bo.prices = prices_path;
  bo.mcs = ctx.out_dir / "cmmd" / "mcs.jsonl";
  bo.partitions = ctx.out_dir / "cmmd" / "partitions.jsonl";
  bo.registry = registry_path;
  bo.tc_bps = opt.tc_bps;
  bo.resamples = opt.resamples;
  add(run_backtest(bo, sub("backtest")));

  // Variant ablation over the same scores.
  const auto registry = in_file(registry_path, [&] { return load_registry(registry_path); });
  const auto scores = load_scores(scores_path);
  const auto signals = in_file(signals_path, [&] { return load_signals(signals_path); });
  const auto prices = in_file(prices_path, [&] { return load_prices(prices_path); });
  const auto forward = portfolio::winsorize(portfolio::forward_returns(prices));
  const auto lf = label_scores(scores, registry);
  std::vector<std::string> variants = {"full", "mia_only", "temporal_only"};
  for (const char* m : mcs::kMethodNames) {
    variants.push_back(std::string("single_method:") + m);
  }

  OutputDir od(ctx.out_dir, "report");
  if (opt.plan) od.add_input("plan", *opt.plan);
  od.add_input("corpus", corpus);
  od.add_input("registry", registry_path);
  od.add_input("signals", signals_path);
  od.add_input("prices", prices_path);
  od.set_seed(ctx.seed.value_or(0));
  od.config()["k_percent"] = opt.k_percent;
  od.config()["lambda"] = opt.lambda;
  od.config()["variant"] = opt.variant;
  od.config()["tc_bps"] = opt.tc_bps;
  od.config()["resamples"] = opt.resamples;

  RunStatus local;
  od.write("ablation.csv", [&](std::ostream& o) {
    o << "variant,d,ks_p,t_p,auc,debiased_sharpe,cmmd_sharpe\n";
    for (const auto& name : variants) {
      mcs::FitOptions fo;
      fo.lambda = opt.lambda;
      fo.variant = mcs::Variant::parse(name);
      const auto model = mcs::fit_mcs(lf.features, lf.labels, fo);
      const auto rows = apply_model(model, scores, registry);
      std::vector<double> values;
      values.reserve(rows.size());
      for (const auto& r : rows) values.push_back(r.mcs);
      o << name << ',';
      try {
        const auto s = mcs::separation_report(values, lf.labels);
        o << fmt(s.cohens_d) << ',' << fmt(s.ks_p) << ',' << fmt(s.t_p) << ','
          << fmt(s.auc);
      } catch (const Error& e) {
        o << ",,,";
        warn(ctx, &local, "ablation " + name + ": " + e.what());
      }
      const auto joined = cmmd::join_signals(signals, rows);
      const auto series = cmmd::cmmd_signal_series(joined.votes);
      const auto data = portfolio::make_backtest_data(
          signals, rows, series.partitions, &prices, forward);
      portfolio::StrategyConfig sc;
      sc.tc_bps = opt.tc_bps;
      sc.kind = portfolio::StrategyKind::kDebiasedAlpha;
      const auto deb = portfolio::summarize(portfolio::run_strategy(sc, data));
      sc.kind = portfolio::StrategyKind::kCmmd;
      const auto cm = portfolio::summarize(portfolio::run_strategy(sc, data));
      o << ',' << fmt(deb.sharpe) << ',' << fmt(cm.sharpe) << '\n';
    }
  });
  add(local);
  od.finish(total.errors, total.warnings);
  return total;
}

}  // namespace memfilter::report
