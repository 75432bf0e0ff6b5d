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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memfilter/core/error.hpp"
#include "memfilter/core/io.hpp"
#include "memfilter/mia/mia.hpp"
#include "memfilter/parser/signal_parser.hpp"
#include "memfilter/portfolio/portfolio.hpp"
#include "memfilter/stats/stats.hpp"
#include "memfilter/synth/synthetic.hpp"

namespace memfilter::synth {
namespace {

SyntheticPlan small_plan() {
  SyntheticPlan p;
  p.n_models = 3;
  p.n_tickers = 6;
  p.n_dates = 30;
  p.tokens_per_prompt = 20;
  return p;
}

double loss_effect(const SyntheticWorld& w) {
  std::vector<double> is, oos;
  for (const auto& r : w.corpus) {
    const double loss = mia::score_loss(r.tokens);
    (label_membership(r.date, w.registry.at(r.model_id)).is_member ? is : oos)
        .push_back(loss);
  }
  return stats::cohens_d(is, oos);
}

TEST(ExpectedEffect, Examples) {
  SyntheticPlan p;
  EXPECT_NEAR(expected_effect(p), -1.373, 5e-4);
  p.is_loss_shift = 0.0;
  EXPECT_EQ(expected_effect(p), 0.0);
  p.is_loss_shift = p.loss_sigma;
  EXPECT_EQ(expected_effect(p), -1.0);
}

TEST(Plan, ValidationAndRoundTrip) {
  SyntheticPlan p = small_plan();
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.loss_sigma = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = p;
  bad.accuracy_coupling = 1.5;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = p;
  bad.n_tickers = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = p;
  bad.cutoffs = {Date::from_ymd(2020, 1, 1)};
  EXPECT_THROW(bad.validate(), ValidationError);

  p.cutoffs = {Date::from_ymd(2019, 3, 1), Date::from_ymd(2019, 4, 1),
               Date::from_ymd(2019, 5, 1)};
  p.oos_skill = 0.05;
  std::ostringstream out;
  write_plan(out, p);
  std::istringstream in(out.str());
  const auto back = read_plan(in);
  std::ostringstream again;
  write_plan(again, back);
  EXPECT_EQ(again.str(), out.str());
  EXPECT_EQ(back.cutoffs, p.cutoffs);
  EXPECT_EQ(back.oos_skill, 0.05);
}

std::string serialize(const SyntheticWorld& w) {
  std::ostringstream out;
  write_registry(out, w.registry);
  write_corpus(out, w.corpus);
  write_signals(out, w.signals);
  write_prices(out, w.prices);
  return out.str();
}

TEST(Generate, SameSeedSameBytes) {
  const auto plan = small_plan();
  EXPECT_EQ(serialize(generate(plan)), serialize(generate(plan)));
  auto other = plan;
  other.seed += 1;
  EXPECT_NE(serialize(generate(plan)), serialize(generate(other)));
}

TEST(Generate, ShapeAndFullValidation) {
  const auto plan = small_plan();
  const auto w = generate(plan);
  const std::size_t n = static_cast<std::size_t>(plan.n_models) * plan.n_tickers *
                        plan.n_dates;
  ASSERT_EQ(w.corpus.size(), n);
  ASSERT_EQ(w.signals.size(), n);
  ASSERT_EQ(w.familiarity.size(), n);
  EXPECT_EQ(w.signal_dates.size(), static_cast<std::size_t>(plan.n_dates));
  EXPECT_EQ(w.prices.size(), static_cast<std::size_t>(plan.n_tickers));

  std::ostringstream reg, corpus, signals, prices;
  write_registry(reg, w.registry);
  write_corpus(corpus, w.corpus);
  write_signals(signals, w.signals);
  write_prices(prices, w.prices);
  std::istringstream reg_in(reg.str()), corpus_in(corpus.str()),
      signals_in(signals.str()), prices_in(prices.str());
  const auto registry = read_registry(reg_in);
  EXPECT_EQ(read_corpus(corpus_in, registry).size(), n);
  EXPECT_EQ(read_signals(signals_in).size(), n);
  EXPECT_EQ(read_prices(prices_in).size(), static_cast<std::size_t>(plan.n_tickers));

  // Every signal date has a next bar, so every signal has a forward return.
  const auto fwd = portfolio::forward_returns(w.prices);
  for (const auto& s : w.signals) EXPECT_TRUE(fwd.at(s.ticker).contains(s.date));
  for (const auto& r : w.corpus) {
    EXPECT_EQ(r.tokens.size(), static_cast<std::size_t>(plan.tokens_per_prompt));
  }
}

TEST(Generate, DefaultCutoffsGiveBothLabels) {
  const auto w = generate(small_plan());
  for (const auto& m : w.registry.models()) {
    int members = 0;
    for (const Date d : w.signal_dates) members += label_membership(d, m).is_member;
    EXPECT_GT(members, 0) << m.model_id;
    EXPECT_LT(members, static_cast<int>(w.signal_dates.size())) << m.model_id;
  }
}

TEST(Generate, NullShiftGivesNoEffect) {
  SyntheticPlan p;  // 5 x 50 x 160 = 40,000 prompts
  p.is_loss_shift = 0.0;
  p.tokens_per_prompt = 12;
  EXPECT_NEAR(loss_effect(generate(p)), 0.0, 0.05);
}

TEST(Generate, PlantedShiftGivesExpectedEffect) {
  SyntheticPlan p;
  p.tokens_per_prompt = 12;
  EXPECT_NEAR(loss_effect(generate(p)), expected_effect(p), 0.1);
}

TEST(Generate, MeasuredEffectConvergesWithSize) {
  double small_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto p = small_plan();
    p.seed = seed;
    p.n_tickers = 2;
    p.n_dates = 20;
    p.tokens_per_prompt = 8;
    small_gap += std::fabs(loss_effect(generate(p)) - expected_effect(p)) / 5.0;
  }
  SyntheticPlan big;
  big.tokens_per_prompt = 8;
  const double big_gap = std::fabs(loss_effect(generate(big)) - expected_effect(big));
  EXPECT_LT(big_gap, small_gap);
}

struct Accuracy {
  double is = 0.0, oos = 0.0;
};

Accuracy directional_accuracy(const SyntheticWorld& w) {
  const auto fwd = portfolio::forward_returns(w.prices);
  double hit[2] = {0, 0}, total[2] = {0, 0};
  for (const auto& s : w.signals) {
    if (s.alpha == 0) continue;
    const double r = fwd.at(s.ticker).at(s.date);
    const int m = label_membership(s.date, w.registry.at(s.model_id)).is_member;
    total[m] += 1;
    hit[m] += (r > 0) == (s.alpha > 0);
  }
  return {hit[1] / total[1], hit[0] / total[0]};
}

TEST(Generate, FullCouplingCopiesOutcomes) {
  SyntheticPlan p;
  p.n_models = 3;
  p.accuracy_coupling = 1.0;
  p.familiarity_slope = 0.0;
  p.base_accuracy = 0.5;
  const auto a = directional_accuracy(generate(p));
  EXPECT_NEAR(a.is, 1.0, 1e-12);
  EXPECT_NEAR(a.oos, 0.5, 0.02);
}

TEST(Generate, UncoupledSignalsFollowMarginalMix) {
  SyntheticPlan p;
  p.n_models = 3;
  p.accuracy_coupling = 0.0;
  p.familiarity_slope = 0.0;
  const auto w = generate(p);
  double bull = 0, bear = 0, neutral = 0;
  for (const auto& s : w.signals) {
    (s.alpha > 0 ? bull : (s.alpha < 0 ? bear : neutral)) += 1;
  }
  const double n = static_cast<double>(w.signals.size());
  EXPECT_NEAR(bull / n, 0.60, 0.01);
  EXPECT_NEAR(bear / n, 0.18, 0.01);
  EXPECT_NEAR(neutral / n, 0.22, 0.01);
}

TEST(Generate, MeanAlphaMatchesExpectedAlpha) {
  SyntheticPlan p;
  p.n_models = 4;
  p.familiarity_slope = 0.0;
  p.accuracy_coupling = 0.4;
  p.oos_skill = 0.1;
  const auto w = generate(p);
  const auto fwd = portfolio::forward_returns(w.prices);
  std::map<std::pair<bool, int>, std::pair<double, double>> acc;
  for (const auto& s : w.signals) {
    const double r = fwd.at(s.ticker).at(s.date);
    const int sign = r > 0 ? 1 : -1;
    const bool m = label_membership(s.date, w.registry.at(s.model_id)).is_member;
    auto& slot = acc[{m, sign}];
    slot.first += s.alpha;
    slot.second += 1;
  }
  for (const auto& [key, slot] : acc) {
    const double expected = expected_alpha(p, w.up_fraction, key.first, 0.5, key.second);
    EXPECT_NEAR(slot.first / slot.second, expected, 0.03)
        << "member " << key.first << " sign " << key.second;
  }
}

TEST(Generate, RawTextParsesBackToSignal) {
  const auto w = generate(small_plan());
  const auto rules = parser::ParseRule::defaults();
  for (const auto& s : w.signals) {
    const auto parsed = parser::parse_signal(s.raw_text, rules);
    ASSERT_EQ(parsed.status, parser::ParseStatus::kOk) << s.raw_text;
    EXPECT_EQ(parsed.alpha, s.alpha) << s.raw_text;
    EXPECT_EQ(parsed.confidence, s.confidence) << s.raw_text;
  }
}

}  // namespace
}  // namespace memfilter::synth
