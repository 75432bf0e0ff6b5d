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

#include "memfilter/portfolio/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include "memfilter/core/error.hpp"
#include "memfilter/core/io.hpp"
#include "memfilter/simd/kernels.hpp"
#include "memfilter/stats/rng.hpp"

namespace memfilter::portfolio {
namespace {

using VoteIndex =
    std::map<std::pair<Date, std::string>, std::vector<const cmmd::SignalVote*>>;

VoteIndex index_votes(std::span<const cmmd::SignalVote> votes) {
  VoteIndex idx;
  for (const auto& v : votes) idx[{v.date, v.ticker}].push_back(&v);
  return idx;
}

int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

double momentum_signal(const PriceTable* prices, const std::string& ticker,
                       Date date, int window) {
  auto it = prices->find(ticker);
  if (it == prices->end()) return 0.0;
  const auto& bars = it->second.bars;
  auto pos = std::lower_bound(
      bars.begin(), bars.end(), date,
      [](const PriceBar& b, Date d) { return b.date < d; });
  if (pos == bars.end() || pos->date != date) return 0.0;
  const auto i = static_cast<std::size_t>(pos - bars.begin());
  if (i < static_cast<std::size_t>(window)) return 0.0;
  return static_cast<double>(
      sign(bars[i].adjusted_close / bars[i - window].adjusted_close - 1.0));
}

}  // namespace

ReturnTable forward_returns(const PriceTable& prices) {
  ReturnTable out;
  for (const auto& [ticker, series] : prices) {
    auto& row = out[ticker];
    for (std::size_t i = 0; i + 1 < series.bars.size(); ++i) {
      row.emplace(series.bars[i].date, series.bars[i + 1].adjusted_close /
                                               series.bars[i].adjusted_close -
                                           1.0);
    }
  }
  return out;
}

std::vector<double> winsorize(std::span<const double> values, double low_pct,
                              double high_pct) {
  if (values.size() < 2) return {values.begin(), values.end()};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = stats::percentile_sorted(sorted, low_pct);
  const double hi = stats::percentile_sorted(sorted, high_pct);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::clamp(values[i], lo, hi);
  }
  return out;
}

ReturnTable winsorize(const ReturnTable& returns, double low_pct,
                      double high_pct) {
  ReturnTable out;
  for (const auto& [ticker, series] : returns) {
    std::vector<double> values;
    values.reserve(series.size());
    for (const auto& [date, r] : series) values.push_back(r);
    const auto clamped = winsorize(values, low_pct, high_pct);
    auto& row = out[ticker];
    std::size_t i = 0;
    for (const auto& [date, r] : series) row.emplace(date, clamped[i++]);
  }
  return out;
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kRawAlpha:
      return "raw_alpha";
    case StrategyKind::kDebiasedAlpha:
      return "debiased_alpha";
    case StrategyKind::kCmmd:
      return "cmmd";
    case StrategyKind::kEwBuyHold:
      return "ew_buy_hold";
    case StrategyKind::kMomentum20d:
      return "momentum_20d";
    case StrategyKind::kRandom:
      return "random";
  }
  return "raw_alpha";
}

StrategyKind strategy_from_name(const std::string& name) {
  for (auto kind : kAllStrategies) {
    if (strategy_name(kind) == name) return kind;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

DailyPortfolioResult daily_return(const Positions& positions,
                                  const Positions& prev_positions,
                                  const std::map<std::string, double>& fwd,
                                  double tc_bps) {
  if (positions.empty()) throw ValidationError("daily_return: empty positions");
  if (!(tc_bps >= 0.0)) throw ValidationError("tc_bps must be >= 0");
  const double n = static_cast<double>(positions.size());

  std::vector<double> a, r;
  a.reserve(positions.size());
  r.reserve(positions.size());
  for (const auto& [ticker, weight] : positions) {
    auto it = fwd.find(ticker);
    if (it == fwd.end()) continue;
    a.push_back(weight);
    r.push_back(it->second);
  }

  double change = 0.0;
  for (const auto& [ticker, weight] : positions) {
    auto it = prev_positions.find(ticker);
    change += std::fabs(weight - (it == prev_positions.end() ? 0.0 : it->second));
  }
  for (const auto& [ticker, weight] : prev_positions) {
    if (!positions.contains(ticker)) change += std::fabs(weight);
  }

  DailyPortfolioResult d;
  d.gross_return = simd::dot(a, r) / n;
  d.turnover = change / n;
  d.cost = tc_bps * 1e-4 * d.turnover;
  d.net_return = d.gross_return - d.cost;
  d.positions = positions;
  return d;
}

BacktestData make_backtest_data(std::span<const SignalRecord> signals,
                                std::span<const mcs::McsRow> mcs,
                                std::span<const cmmd::CmmdPartition> partitions,
                                const PriceTable* prices, ReturnTable forward) {
  BacktestData data;
  data.prices = prices;
  data.forward = std::move(forward);

  using Key = std::tuple<std::string, std::string, Date>;
  std::map<Key, std::pair<double, int>> mcs_by_key;
  for (const auto& r : mcs) {
    auto& slot = mcs_by_key[Key{r.model_id, r.ticker, r.date}];
    slot.first += r.mcs;
    slot.second += 1;
    data.mcs_pool.push_back(r.mcs);
  }
  data.votes_have_mcs = !mcs.empty();

  std::set<Date> dates;
  std::map<Date, std::set<std::string>> universe;
  for (const auto& s : signals) {
    double value = std::numeric_limits<double>::quiet_NaN();
    auto it = mcs_by_key.find(Key{s.model_id, s.ticker, s.date});
    if (it != mcs_by_key.end()) value = it->second.first / it->second.second;
    data.votes.push_back({s.model_id, s.ticker, s.date, value, s.alpha});
    dates.insert(s.date);
    universe[s.date].insert(s.ticker);
  }
  data.calendar.assign(dates.begin(), dates.end());
  for (auto& [date, tickers] : universe) {
    data.universe[date].assign(tickers.begin(), tickers.end());
  }
  if (!partitions.empty()) set_partitions(&data, partitions);
  return data;
}

void set_partitions(BacktestData* data,
                    std::span<const cmmd::CmmdPartition> partitions) {
  data->cmmd_alpha.clear();
  for (const auto& p : partitions) {
    data->cmmd_alpha[{p.ticker, p.date}] = p.alpha_cmmd;
  }
  data->has_partitions = true;
}

std::vector<DailyPortfolioResult> run_strategy(const StrategyConfig& config,
                                               const BacktestData& data) {
  if (config.momentum_window < 1) throw ConfigError("momentum_window must be >= 1");
  if (!(config.tc_bps >= 0.0)) throw ConfigError("tc_bps must be >= 0");
  const StrategyKind kind = config.kind;
  const std::string name = strategy_name(kind);
  if ((kind == StrategyKind::kRawAlpha || kind == StrategyKind::kDebiasedAlpha) &&
      data.votes.empty()) {
    throw ConfigError(name + " requires signals");
  }
  double threshold = 0.0;
  if (kind == StrategyKind::kDebiasedAlpha) {
    if (!data.votes_have_mcs) throw ConfigError(name + " requires MCS scores");
    if (config.mcs_threshold) {
      threshold = *config.mcs_threshold;
    } else {
      if (data.mcs_pool.empty()) throw ConfigError(name + " requires an MCS pool");
      threshold = stats::percentile(data.mcs_pool, 50.0);
    }
  }
  if (kind == StrategyKind::kCmmd && !data.has_partitions) {
    throw ConfigError(name + " requires CMMD partitions");
  }
  if (kind == StrategyKind::kMomentum20d && data.prices == nullptr) {
    throw ConfigError(name + " requires prices");
  }

  const VoteIndex votes = index_votes(data.votes);
  stats::Xoshiro256 rng(config.rng_seed);
  std::vector<DailyPortfolioResult> out;
  Positions prev;

  for (const Date date : data.calendar) {
    auto uit = data.universe.find(date);
    if (uit == data.universe.end()) continue;
    std::map<std::string, double> fwd;
    for (const auto& ticker : uit->second) {
      auto rit = data.forward.find(ticker);
      if (rit == data.forward.end()) continue;
      auto dit = rit->second.find(date);
      if (dit != rit->second.end()) fwd.emplace(ticker, dit->second);
    }
    if (fwd.empty()) continue;

    Positions pos;
    for (const auto& [ticker, r] : fwd) {
      double a = 0.0;
      switch (kind) {
        case StrategyKind::kRawAlpha:
        case StrategyKind::kDebiasedAlpha: {
          auto vit = votes.find({date, ticker});
          if (vit == votes.end()) break;
          int total = 0;
          for (const auto* v : vit->second) {
            const bool zeroed = kind == StrategyKind::kDebiasedAlpha &&
                                v->mcs > threshold;
            if (!zeroed) total += v->alpha;
          }
          a = static_cast<double>(total) /
              static_cast<double>(vit->second.size());
          break;
        }
        case StrategyKind::kCmmd: {
          auto cit = data.cmmd_alpha.find({ticker, date});
          a = cit == data.cmmd_alpha.end() ? 0.0 : cit->second;
          break;
        }
        case StrategyKind::kEwBuyHold:
          a = 1.0;
          break;
        case StrategyKind::kMomentum20d:
          a = momentum_signal(data.prices, ticker, date, config.momentum_window);
          break;
        case StrategyKind::kRandom:
          a = static_cast<double>(stats::uniform_index(rng, 3)) - 1.0;
          break;
      }
      pos.emplace(ticker, a);
    }
    auto day = daily_return(pos, prev, fwd, config.tc_bps);
    day.date = date;
    prev = pos;
    out.push_back(std::move(day));
  }
  return out;
}

std::vector<double> net_returns(std::span<const DailyPortfolioResult> days) {
  std::vector<double> out;
  out.reserve(days.size());
  for (const auto& d : days) out.push_back(d.net_return);
  return out;
}

PerformanceSummary summarize_returns(std::span<const double> net,
                                     double periods_per_year) {
  if (net.size() < 2) {
    throw InsufficientDataError("summarize: need at least 2 days");
  }
  PerformanceSummary s;
  s.n_days = net.size();
  double equity = 1.0;
  double peak = 1.0;
  for (double r : net) {
    equity *= 1.0 + r;
    peak = std::max(peak, equity);
    s.max_drawdown = std::min(s.max_drawdown, equity / peak - 1.0);
  }
  s.total_return = equity - 1.0;
  s.ann_return = std::pow(equity, periods_per_year /
                                      static_cast<double>(net.size())) - 1.0;
  s.ann_vol = stats::sample_stddev(net) * std::sqrt(periods_per_year);
  if (s.ann_vol > 0.0) {
    s.sharpe = s.ann_return / s.ann_vol;
  } else if (s.ann_return == 0.0) {
    s.sharpe = 0.0;
  }
  return s;
}

PerformanceSummary summarize(std::span<const DailyPortfolioResult> days,
                             double periods_per_year) {
  const auto net = net_returns(days);
  return summarize_returns(net, periods_per_year);
}

std::vector<SweepRow> threshold_sweep(std::span<const double> percentiles,
                                      const BacktestData& data, double tc_bps,
                                      std::int64_t resamples,
                                      std::uint64_t seed) {
  if (data.mcs_pool.empty()) throw ConfigError("threshold sweep requires MCS");
  StrategyConfig raw_cfg;
  raw_cfg.kind = StrategyKind::kRawAlpha;
  raw_cfg.tc_bps = tc_bps;
  const auto raw = run_strategy(raw_cfg, data);
  const auto raw_net = net_returns(raw);

  std::vector<double> pool(data.mcs_pool);
  std::sort(pool.begin(), pool.end());
  std::vector<SweepRow> rows;
  for (double p : percentiles) {
    if (!(p > 0.0 && p <= 100.0)) {
      throw DomainError("sweep percentiles must be in (0, 100]");
    }
    SweepRow row;
    row.percentile = p;
    row.threshold = stats::percentile_sorted(pool, p);
    StrategyConfig cfg;
    cfg.kind = StrategyKind::kDebiasedAlpha;
    cfg.tc_bps = tc_bps;
    cfg.mcs_threshold = row.threshold;
    row.days = run_strategy(cfg, data);
    const auto net = net_returns(row.days);
    row.sharpe = summarize_returns(net).sharpe;
    const auto boot =
        stats::paired_bootstrap_sharpe_diff(net, raw_net, resamples, seed);
    row.ci_low = boot.ci_low;
    row.ci_high = boot.ci_high;
    row.p_value = boot.p_value_two_sided;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LeaveOneOutRow> leave_one_out(std::span<const std::string> models,
                                          const BacktestData& data,
                                          double tc_bps) {
  if (models.size() < 3) {
    throw InsufficientDataError("leave-one-out needs an ensemble of >= 3 models");
  }
  if (!data.votes_have_mcs) throw ConfigError("leave-one-out requires MCS scores");
  std::vector<LeaveOneOutRow> rows;
  for (const auto& excluded : models) {
    std::vector<cmmd::SignalVote> kept;
    for (const auto& v : data.votes) {
      if (v.model_id != excluded && !std::isnan(v.mcs)) kept.push_back(v);
    }
    const auto series = cmmd::cmmd_signal_series(kept);
    BacktestData reduced = data;
    set_partitions(&reduced, series.partitions);
    StrategyConfig cfg;
    cfg.kind = StrategyKind::kCmmd;
    cfg.tc_bps = tc_bps;
    const auto days = run_strategy(cfg, reduced);
    rows.push_back({excluded, summarize(days).sharpe});
  }
  return rows;
}

GroupReturns group_returns(std::span<const cmmd::CmmdPartition> partitions,
                           const ReturnTable& forward) {
  std::map<Date, std::pair<std::vector<double>, std::vector<double>>> by_date;
  for (const auto& p : partitions) {
    const auto tainted = p.tainted_alpha();
    if (!tainted) continue;
    auto rit = forward.find(p.ticker);
    if (rit == forward.end()) continue;
    auto dit = rit->second.find(p.date);
    if (dit == rit->second.end()) continue;
    auto& slot = by_date[p.date];
    slot.first.push_back(p.alpha_cmmd * dit->second);
    slot.second.push_back(*tainted * dit->second);
  }
  GroupReturns g;
  for (const auto& [date, slot] : by_date) {
    g.dates.push_back(date);
    g.clean.push_back(stats::mean(slot.first));
    g.tainted.push_back(stats::mean(slot.second));
  }
  return g;
}

void write_equity_curve(std::ostream& out,
                        std::span<const DailyPortfolioResult> days) {
  out << "date,gross,turnover,cost,net,equity\n";
  double equity = 1.0;
  for (const auto& d : days) {
    equity *= 1.0 + d.net_return;
    out << d.date.iso() << ',' << format_double(d.gross_return) << ','
        << format_double(d.turnover) << ',' << format_double(d.cost) << ','
        << format_double(d.net_return) << ',' << format_double(equity) << '\n';
  }
}

}  // namespace memfilter::portfolio
