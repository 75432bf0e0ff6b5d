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

#ifndef MEMFILTER_PORTFOLIO_PORTFOLIO_HPP_
#define MEMFILTER_PORTFOLIO_PORTFOLIO_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memfilter/cmmd/cmmd.hpp"
#include "memfilter/core/types.hpp"
#include "memfilter/stats/stats.hpp"

namespace memfilter::portfolio {

inline constexpr double kDefaultTcBps = 15.0;
inline constexpr double kPeriodsPerYear = 252.0;
inline constexpr std::int64_t kDefaultResamples = 2000;

// ticker -> (date -> one-day forward return r(s, t+1))
using ReturnTable = std::map<std::string, std::map<Date, double>>;

// r(s, t+1) = P(s, t+1) / P(s, t) - 1, keyed by t. The last bar of each
// series has no entry.
ReturnTable forward_returns(const PriceTable& prices);

// Clamp to the [low_pct, high_pct] percentiles of the sample itself
// (linear interpolation).
std::vector<double> winsorize(std::span<const double> values,
                              double low_pct = 0.5, double high_pct = 99.5);
// Applies winsorize() per ticker over that ticker's full return history.
ReturnTable winsorize(const ReturnTable& returns, double low_pct = 0.5,
                      double high_pct = 99.5);

enum class StrategyKind {
  kRawAlpha,
  kDebiasedAlpha,
  kCmmd,
  kEwBuyHold,
  kMomentum20d,
  kRandom,
};

inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::kCmmd,      StrategyKind::kRawAlpha,
    StrategyKind::kDebiasedAlpha, StrategyKind::kEwBuyHold,
    StrategyKind::kMomentum20d,   StrategyKind::kRandom};

std::string strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::kRawAlpha;
  double tc_bps = kDefaultTcBps;
  int momentum_window = 20;
  std::uint64_t rng_seed = 0;
  // Debiased alpha only: zero signals with MCS above this instead of the
  // global median.
  std::optional<double> mcs_threshold;
};

struct DailyPortfolioResult {
  Date date;
  double gross_return = 0.0;
  double turnover = 0.0;
  double cost = 0.0;
  double net_return = 0.0;
  std::map<std::string, double> positions;
};

using Positions = std::map<std::string, double>;

// One day of the signal-weighted portfolio:
//   gross = (1/N) sum_s a(s,t) r(s,t+1), N = |positions|
//   turnover = (1/N) sum_s |a(s,t) - a(s,t-1)|  (over tickers held either day)
//   cost = tc_bps * 1e-4 * turnover
// Tickers in `positions` without a forward return contribute nothing to
// gross. Throws ValidationError on an empty position map.
DailyPortfolioResult daily_return(const Positions& positions,
                                  const Positions& prev_positions,
                                  const std::map<std::string, double>& fwd,
                                  double tc_bps);

// Everything a strategy may need. Build with make_backtest_data().
struct BacktestData {
  std::vector<Date> calendar;                         // sorted signal dates
  std::map<Date, std::vector<std::string>> universe;  // tickers per date
  ReturnTable forward;
  const PriceTable* prices = nullptr;                 // momentum only
  std::vector<cmmd::SignalVote> votes;                // every model signal
  bool votes_have_mcs = false;
  std::vector<double> mcs_pool;  // global MCS sample (debiased / sweep)
  std::map<std::pair<std::string, Date>, double> cmmd_alpha;
  bool has_partitions = false;
};

// `mcs` may be empty (raw/benchmark strategies only). Signals without an
// MCS row keep NaN and are never zeroed by the debiased filter.
BacktestData make_backtest_data(std::span<const SignalRecord> signals,
                                std::span<const mcs::McsRow> mcs,
                                std::span<const cmmd::CmmdPartition> partitions,
                                const PriceTable* prices, ReturnTable forward);

void set_partitions(BacktestData* data,
                    std::span<const cmmd::CmmdPartition> partitions);

// Runs one strategy over data.calendar. Days whose universe has no forward
// return are skipped. Throws ConfigError if the kind's inputs are missing.
std::vector<DailyPortfolioResult> run_strategy(const StrategyConfig& config,
                                               const BacktestData& data);

std::vector<double> net_returns(std::span<const DailyPortfolioResult> days);

struct PerformanceSummary {
  double total_return = 0.0;
  double ann_return = 0.0;
  double ann_vol = 0.0;
  std::optional<double> sharpe;  // empty: zero vol with nonzero return
  double max_drawdown = 0.0;
  std::size_t n_days = 0;
};

PerformanceSummary summarize(std::span<const DailyPortfolioResult> days,
                             double periods_per_year = kPeriodsPerYear);
// Same arithmetic over a bare net-return series.
PerformanceSummary summarize_returns(std::span<const double> net,
                                     double periods_per_year = kPeriodsPerYear);

struct SweepRow {
  double percentile = 0.0;
  double threshold = 0.0;
  std::optional<double> sharpe;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  std::vector<DailyPortfolioResult> days;
};

inline constexpr double kDefaultSweep[] = {10, 25, 50, 75, 90, 95};

// For each percentile p: zero signals with MCS above the p-th percentile of
// data.mcs_pool, run the debiased strategy, and bootstrap its Sharpe
// difference against raw alpha.
std::vector<SweepRow> threshold_sweep(std::span<const double> percentiles,
                                      const BacktestData& data, double tc_bps,
                                      std::int64_t resamples,
                                      std::uint64_t seed);

struct LeaveOneOutRow {
  std::string excluded_model;
  std::optional<double> cmmd_sharpe;
};

// Re-partitions without each model in turn and reruns the CMMD strategy.
// Requires votes with MCS and at least 3 models.
std::vector<LeaveOneOutRow> leave_one_out(std::span<const std::string> models,
                                          const BacktestData& data,
                                          double tc_bps);

// Daily gross return of the clean-consensus and tainted-consensus signals,
// over stock-dates whose partition has a tainted set.
struct GroupReturns {
  std::vector<Date> dates;
  std::vector<double> clean;
  std::vector<double> tainted;
};

GroupReturns group_returns(std::span<const cmmd::CmmdPartition> partitions,
                           const ReturnTable& forward);

void write_equity_curve(std::ostream& out,
                        std::span<const DailyPortfolioResult> days);

}  // namespace memfilter::portfolio

#endif  // MEMFILTER_PORTFOLIO_PORTFOLIO_HPP_
