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

#ifndef MEMFILTER_SYNTH_SYNTHETIC_HPP_
#define MEMFILTER_SYNTH_SYNTHETIC_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "memfilter/core/date.hpp"
#include "memfilter/core/types.hpp"

namespace memfilter::synth {

// Parameters of a synthetic world with a planted memorization effect.
//
// Each (ticker, signal date) gets one prompt, scored by every model. A
// record is a member when its date is on or before the model's cutoff.
// Per-prompt loss is Normal(base_loss - is_loss_shift, loss_sigma) for
// members and Normal(base_loss, loss_sigma) otherwise; the standardized
// draw z also defines the record's familiarity 1 - Phi(z).
//
// Member signals copy the realized next-day direction with probability
// accuracy_coupling (tilted by familiarity_slope, mean preserved). All
// other signals are neutral with probability neutral_rate and otherwise
// correct with probability base_accuracy (+ oos_skill for non-members,
// tilted down by familiarity_slope for non-members), while keeping the
// bullish share of directional calls at bullish_rate / (1 - neutral_rate).
struct SyntheticPlan {
  std::uint64_t seed = 20240501;
  int n_models = 5;
  std::vector<Date> cutoffs;  // one per model; empty = spread over the calendar
  int n_tickers = 50;
  int n_dates = 160;
  int date_stride = 3;        // trading days between signal dates
  int warmup_days = 25;       // price history before the first signal date
  Date start_date = Date::from_ymd(2019, 1, 2);
  int tokens_per_prompt = 45;

  double base_loss = 4.0;     // nats
  double is_loss_shift = 0.453;
  double loss_sigma = 0.33;

  double accuracy_coupling = 0.3;
  double base_accuracy = 0.5;
  double familiarity_slope = 0.2;
  double oos_skill = 0.0;
  double bullish_rate = 0.60;
  double neutral_rate = 0.22;

  double bullish_drift = 0.0005;  // mean daily log return
  double daily_vol = 0.015;

  // Throws ValidationError on non-positive counts, probabilities outside
  // [0, 1], loss_sigma <= 0, or a cutoff list of the wrong length.
  void validate() const;
};

SyntheticPlan read_plan(std::istream& in);
void write_plan(std::ostream& out, const SyntheticPlan& plan);

struct SyntheticWorld {
  ModelRegistry registry;            // first model plays the reference
  std::vector<PromptRecord> corpus;  // model-major, then ticker, then date
  std::vector<double> familiarity;   // parallel to corpus
  std::vector<SignalRecord> signals; // parallel to corpus
  PriceTable prices;
  std::vector<Date> signal_dates;
  double up_fraction = 0.5;          // share of positive next-day returns
};

SyntheticWorld generate(const SyntheticPlan& plan);

// Asymptotic Cohen's d of loss scores, members vs. non-members: -shift / sigma.
double expected_effect(const SyntheticPlan& plan);

// E[alpha | membership, familiarity, sign of the realized return] under the
// plan's signal model; `up_fraction` is SyntheticWorld::up_fraction.
double expected_alpha(const SyntheticPlan& plan, double up_fraction,
                      bool is_member, double familiarity, int return_sign);

}  // namespace memfilter::synth

#endif  // MEMFILTER_SYNTH_SYNTHETIC_HPP_
