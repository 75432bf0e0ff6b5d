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

#include "memfilter/synth/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/stats/rng.hpp"

namespace memfilter::synth {
namespace {

using stats::Xoshiro256;

// Stream families; each work item draws from its own stream.
constexpr std::uint64_t kPriceFamily = 0x5052494345ULL;
constexpr std::uint64_t kTextFamily = 0x54455854ULL;
constexpr std::uint64_t kLossFamily = 0x4C4F5353ULL;
constexpr std::uint64_t kSignalFamily = 0x5349474EULL;

constexpr std::array<const char*, 24> kWords = {
    "revenue", "guidance", "margin",   "quarter", "earnings", "demand",
    "supply",  "pricing",  "volume",   "outlook", "segment",  "growth",
    "capital", "dividend", "backlog",  "orders",  "inventory", "costs",
    "analyst", "consensus", "estimate", "filing", "shares",   "market"};

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::string ticker_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "SYN%03d", i);
  return buf;
}

std::vector<Date> business_days(Date start, int count) {
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(count));
  Date d = start;
  while (static_cast<int>(out.size()) < count) {
    if (!d.is_weekend()) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

std::string prompt_text(const std::string& ticker, Date date,
                        Xoshiro256& g) {
  std::string text = "Context for " + ticker + " as of " + date.iso() + ":";
  const int n_words = 18 + static_cast<int>(stats::uniform_index(g, 12));
  for (int i = 0; i < n_words; ++i) {
    text += ' ';
    text += kWords[stats::uniform_index(g, kWords.size())];
  }
  text += ". Predict the next-day direction.";
  return text;
}

double coupling_probability(const SyntheticPlan& plan, double familiarity) {
  const double c = plan.accuracy_coupling;
  const double slope =
      std::min({plan.familiarity_slope, 2.0 * c, 2.0 * (1.0 - c)});
  return clamp01(c + slope * (familiarity - 0.5));
}

double uncoupled_accuracy(const SyntheticPlan& plan, bool is_member,
                          double familiarity) {
  if (is_member) return clamp01(plan.base_accuracy);
  return clamp01(plan.base_accuracy + plan.oos_skill -
                 plan.familiarity_slope * (familiarity - 0.5));
}

// P(bullish | directional, sign of return) that hits the target accuracy
// while keeping the unconditional bullish share fixed.
double bullish_given(const SyntheticPlan& plan, double up_fraction,
                     double accuracy, int return_sign) {
  const double pb = plan.bullish_rate / (1.0 - plan.neutral_rate);
  const double q = std::clamp(up_fraction, 1e-9, 1.0 - 1e-9);
  const double x = (accuracy - 1.0 + pb + q) / 2.0;
  return return_sign > 0 ? clamp01(x / q) : clamp01((pb - x) / (1.0 - q));
}

std::string signal_text(const std::string& ticker, Date date, int alpha,
                        double confidence) {
  const char* word = alpha > 0 ? "bullish" : alpha < 0 ? "bearish" : "neutral";
  char conf[16];
  std::snprintf(conf, sizeof conf, "%.2f", confidence);
  return "Reviewed " + ticker + " for " + date.iso() +
         ". Prediction: " + word + " with confidence " + conf + ".";
}

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string(name) + " must be in [0, 1]");
  }
}

}  // namespace

void SyntheticPlan::validate() const {
  if (n_models < 1) throw ValidationError("n_models must be >= 1");
  if (n_tickers < 1) throw ValidationError("n_tickers must be >= 1");
  if (n_dates < 1) throw ValidationError("n_dates must be >= 1");
  if (date_stride < 1) throw ValidationError("date_stride must be >= 1");
  if (warmup_days < 0) throw ValidationError("warmup_days must be >= 0");
  if (tokens_per_prompt < 1) {
    throw ValidationError("tokens_per_prompt must be >= 1");
  }
  if (!(loss_sigma > 0.0)) throw ValidationError("loss_sigma must be > 0");
  if (!(base_loss > 0.0)) throw ValidationError("base_loss must be > 0");
  if (!std::isfinite(is_loss_shift)) {
    throw ValidationError("is_loss_shift must be finite");
  }
  if (!(daily_vol >= 0.0)) throw ValidationError("daily_vol must be >= 0");
  if (!std::isfinite(bullish_drift)) {
    throw ValidationError("bullish_drift must be finite");
  }
  require_probability(accuracy_coupling, "accuracy_coupling");
  require_probability(base_accuracy, "base_accuracy");
  require_probability(neutral_rate, "neutral_rate");
  require_probability(bullish_rate, "bullish_rate");
  if (neutral_rate >= 1.0) throw ValidationError("neutral_rate must be < 1");
  if (bullish_rate > 1.0 - neutral_rate) {
    throw ValidationError("bullish_rate must be <= 1 - neutral_rate");
  }
  if (!(familiarity_slope >= 0.0)) {
    throw ValidationError("familiarity_slope must be >= 0");
  }
  if (!std::isfinite(oos_skill)) throw ValidationError("oos_skill must be finite");
  if (!cutoffs.empty() && static_cast<int>(cutoffs.size()) != n_models) {
    throw ValidationError("cutoffs must list one date per model");
  }
}

SyntheticPlan read_plan(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what(), 0);
  }
  if (!j.is_object()) throw ParseError("plan: expected a JSON object", 0);
  SyntheticPlan p;
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(std::string("plan field ") + key +
                            " has the wrong type");
    }
  };
  get("seed", p.seed);
  get("n_models", p.n_models);
  get("n_tickers", p.n_tickers);
  get("n_dates", p.n_dates);
  get("date_stride", p.date_stride);
  get("warmup_days", p.warmup_days);
  get("tokens_per_prompt", p.tokens_per_prompt);
  get("base_loss", p.base_loss);
  get("is_loss_shift", p.is_loss_shift);
  get("loss_sigma", p.loss_sigma);
  get("accuracy_coupling", p.accuracy_coupling);
  get("base_accuracy", p.base_accuracy);
  get("familiarity_slope", p.familiarity_slope);
  get("oos_skill", p.oos_skill);
  get("bullish_rate", p.bullish_rate);
  get("neutral_rate", p.neutral_rate);
  get("bullish_drift", p.bullish_drift);
  get("daily_vol", p.daily_vol);
  if (j.contains("start_date")) {
    p.start_date = Date::parse(j.at("start_date").get<std::string>());
  }
  if (j.contains("cutoffs")) {
    for (const auto& c : j.at("cutoffs")) {
      p.cutoffs.push_back(Date::parse(c.get<std::string>()));
    }
  }
  p.validate();
  return p;
}

void write_plan(std::ostream& out, const SyntheticPlan& p) {
  nlohmann::ordered_json j;
  j["seed"] = p.seed;
  j["n_models"] = p.n_models;
  j["n_tickers"] = p.n_tickers;
  j["n_dates"] = p.n_dates;
  j["date_stride"] = p.date_stride;
  j["warmup_days"] = p.warmup_days;
  j["start_date"] = p.start_date.iso();
  j["tokens_per_prompt"] = p.tokens_per_prompt;
  j["base_loss"] = p.base_loss;
  j["is_loss_shift"] = p.is_loss_shift;
  j["loss_sigma"] = p.loss_sigma;
  j["accuracy_coupling"] = p.accuracy_coupling;
  j["base_accuracy"] = p.base_accuracy;
  j["familiarity_slope"] = p.familiarity_slope;
  j["oos_skill"] = p.oos_skill;
  j["bullish_rate"] = p.bullish_rate;
  j["neutral_rate"] = p.neutral_rate;
  j["bullish_drift"] = p.bullish_drift;
  j["daily_vol"] = p.daily_vol;
  auto cutoffs = nlohmann::ordered_json::array();
  for (Date d : p.cutoffs) cutoffs.push_back(d.iso());
  j["cutoffs"] = cutoffs;
  out << j.dump(2) << '\n';
}

SyntheticWorld generate(const SyntheticPlan& plan) {
  plan.validate();
  SyntheticWorld w;

  // Calendar: warmup bars, the signal grid, and one trailing bar so the
  // last signal date has a next-day return.
  const int span = (plan.n_dates - 1) * plan.date_stride + 1;
  const auto bars = business_days(plan.start_date, plan.warmup_days + span + 1);
  for (int i = 0; i < plan.n_dates; ++i) {
    w.signal_dates.push_back(bars[plan.warmup_days + i * plan.date_stride]);
  }

  std::vector<std::string> tickers;
  for (int t = 0; t < plan.n_tickers; ++t) tickers.push_back(ticker_name(t));

  // Forward return per (ticker, signal date index).
  std::vector<double> fwd(static_cast<std::size_t>(plan.n_tickers) *
                          plan.n_dates);
  std::size_t ups = 0;
  for (int t = 0; t < plan.n_tickers; ++t) {
    auto g = Xoshiro256::stream(plan.seed ^ kPriceFamily, t);
    PriceSeries s;
    s.ticker = tickers[t];
    double log_p = std::log(100.0) + stats::uniform(g, -0.5, 0.5);
    for (Date d : bars) {
      s.bars.push_back({d, std::exp(log_p)});
      log_p += plan.bullish_drift + plan.daily_vol * stats::standard_normal(g);
    }
    for (int i = 0; i < plan.n_dates; ++i) {
      const std::size_t b = plan.warmup_days + i * plan.date_stride;
      const double r = s.bars[b + 1].adjusted_close / s.bars[b].adjusted_close - 1.0;
      fwd[static_cast<std::size_t>(t) * plan.n_dates + i] = r;
      if (r > 0.0) ++ups;
    }
    w.prices.emplace(s.ticker, std::move(s));
  }
  w.up_fraction = static_cast<double>(ups) / static_cast<double>(fwd.size());

  for (int k = 0; k < plan.n_models; ++k) {
    ModelSpec m;
    char id[32];
    std::snprintf(id, sizeof id, "model-%d", k);
    m.model_id = id;
    m.param_count = static_cast<std::int64_t>(125'000'000) << std::min(k, 20);
    m.family = "synthetic";
    if (!plan.cutoffs.empty()) {
      m.cutoff_date = plan.cutoffs[k];
    } else {
      const int idx = (k + 1) * plan.n_dates / (plan.n_models + 1);
      m.cutoff_date = w.signal_dates[std::min(idx, plan.n_dates - 1)];
    }
    w.registry.add(std::move(m));
  }

  std::vector<std::string> texts(fwd.size());
  for (int t = 0; t < plan.n_tickers; ++t) {
    for (int i = 0; i < plan.n_dates; ++i) {
      const std::size_t cell = static_cast<std::size_t>(t) * plan.n_dates + i;
      auto g = Xoshiro256::stream(plan.seed ^ kTextFamily, cell);
      texts[cell] = prompt_text(tickers[t], w.signal_dates[i], g);
    }
  }

  const std::size_t total = fwd.size() * static_cast<std::size_t>(plan.n_models);
  w.corpus.reserve(total);
  w.familiarity.reserve(total);
  w.signals.reserve(total);
  const int n_tok = plan.tokens_per_prompt;
  std::vector<double> jitter(static_cast<std::size_t>(n_tok));
  for (int k = 0; k < plan.n_models; ++k) {
    const ModelSpec& model = w.registry.models()[k];
    for (int t = 0; t < plan.n_tickers; ++t) {
      for (int i = 0; i < plan.n_dates; ++i) {
        const std::size_t cell = static_cast<std::size_t>(t) * plan.n_dates + i;
        const std::size_t idx = static_cast<std::size_t>(k) * fwd.size() + cell;
        const Date date = w.signal_dates[i];
        const bool member = label_membership(date, model).is_member;

        auto g = Xoshiro256::stream(plan.seed ^ kLossFamily, idx);
        const double z = stats::standard_normal(g);
        const double loss = plan.base_loss -
                            (member ? plan.is_loss_shift : 0.0) +
                            plan.loss_sigma * z;
        double jmean = 0.0;
        for (auto& j : jitter) {
          j = stats::uniform(g, -0.5, 0.5);
          jmean += j;
        }
        jmean /= n_tok;
        PromptRecord r;
        r.prompt_id = tickers[t] + "-" + date.iso() + "-fwd";
        r.model_id = model.model_id;
        r.text = texts[cell];
        r.byte_len = static_cast<std::int64_t>(r.text.size());
        r.ticker = tickers[t];
        r.date = date;
        r.prompt_type = PromptType::kForward;
        r.tokens.reserve(jitter.size());
        for (double j : jitter) {
          TokenObservation obs;
          obs.logp = std::min(0.0, -(loss + j - jmean));
          obs.vocab_mu = stats::uniform(g, -9.0, -4.0);
          obs.vocab_sigma = stats::uniform(g, 1.0, 3.0);
          r.tokens.push_back(obs);
        }
        const double familiarity = 1.0 - normal_cdf(z);

        auto s = Xoshiro256::stream(plan.seed ^ kSignalFamily, idx);
        const double ret = fwd[cell];
        const int ret_sign = ret > 0.0 ? 1 : ret < 0.0 ? -1 : 0;
        SignalRecord sig;
        sig.model_id = model.model_id;
        sig.ticker = tickers[t];
        sig.date = date;
        const double u_couple = stats::uniform01(s);
        const double u_neutral = stats::uniform01(s);
        const double u_dir = stats::uniform01(s);
        const double u_conf = stats::uniform01(s);
        if (member && u_couple < coupling_probability(plan, familiarity)) {
          sig.alpha = ret_sign;
          sig.confidence = std::round((0.70 + 0.25 * u_conf) * 100.0) / 100.0;
        } else if (u_neutral < plan.neutral_rate) {
          sig.alpha = 0;
          sig.confidence = std::round((0.40 + 0.30 * u_conf) * 100.0) / 100.0;
        } else {
          const double acc = uncoupled_accuracy(plan, member, familiarity);
          const double p_bull = bullish_given(plan, w.up_fraction, acc, ret_sign);
          sig.alpha = u_dir < p_bull ? 1 : -1;
          sig.confidence = std::round((0.50 + 0.40 * u_conf) * 100.0) / 100.0;
        }
        sig.raw_text = signal_text(sig.ticker, date, sig.alpha, sig.confidence);

        w.corpus.push_back(std::move(r));
        w.familiarity.push_back(familiarity);
        w.signals.push_back(std::move(sig));
      }
    }
  }
  return w;
}

double expected_effect(const SyntheticPlan& plan) {
  return -plan.is_loss_shift / plan.loss_sigma;
}

double expected_alpha(const SyntheticPlan& plan, double up_fraction,
                      bool is_member, double familiarity, int return_sign) {
  const double acc = uncoupled_accuracy(plan, is_member, familiarity);
  const double p_bull = bullish_given(plan, up_fraction, acc, return_sign);
  const double uncoupled = (1.0 - plan.neutral_rate) * (2.0 * p_bull - 1.0);
  if (!is_member) return uncoupled;
  const double pc = coupling_probability(plan, familiarity);
  return pc * return_sign + (1.0 - pc) * uncoupled;
}

}  // namespace memfilter::synth
