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

#include "memfilter/core/types.hpp"

#include <cmath>

#include "memfilter/core/error.hpp"

namespace memfilter {

void validate(const ModelSpec& spec) {
  if (spec.model_id.empty()) throw ValidationError("model_id must be non-empty");
  if (spec.param_count <= 0) {
    throw ValidationError("param_count must be > 0 for model " + spec.model_id);
  }
}

TokenTrack::TokenTrack(std::span<const TokenObservation> tokens) {
  reserve(tokens.size());
  for (const auto& t : tokens) push_back(t);
}

void TokenTrack::push_back(const TokenObservation& t) {
  logp_.push_back(t.logp);
  vocab_mu_.push_back(t.vocab_mu);
  vocab_sigma_.push_back(t.vocab_sigma);
}

void TokenTrack::reserve(std::size_t n) {
  logp_.reserve(n);
  vocab_mu_.reserve(n);
  vocab_sigma_.reserve(n);
}

std::string_view to_string(PromptType t) {
  switch (t) {
    case PromptType::kPriceRecall:
      return "price_recall";
    case PromptType::kSentiment:
      return "sentiment";
    case PromptType::kForward:
      return "forward";
  }
  return "forward";
}

PromptType prompt_type_from_string(std::string_view name) {
  if (name == "price_recall") return PromptType::kPriceRecall;
  if (name == "sentiment") return PromptType::kSentiment;
  if (name == "forward") return PromptType::kForward;
  throw ValidationError("prompt_type: unknown value '" + std::string(name) +
                        "'");
}

void validate(const PromptRecord& r) {
  if (r.prompt_id.empty()) throw ValidationError("prompt_id must be non-empty");
  if (r.model_id.empty()) throw ValidationError("model_id must be non-empty");
  if (r.byte_len <= 0) throw ValidationError("byte_len must be > 0");
  if (r.tokens.empty()) throw ValidationError("tokens must be non-empty");
  for (std::size_t i = 0; i < r.tokens.size(); ++i) {
    const auto t = r.tokens[i];
    const std::string at = "tokens[" + std::to_string(i) + "].";
    if (!std::isfinite(t.logp) || t.logp > 0.0) {
      throw ValidationError(at + "logp must be finite and <= 0");
    }
    if (!std::isfinite(t.vocab_mu)) {
      throw ValidationError(at + "vocab_mu must be finite");
    }
    if (!std::isfinite(t.vocab_sigma) || t.vocab_sigma <= 0.0) {
      throw ValidationError(at + "vocab_sigma must be > 0");
    }
  }
}

TemporalLabel label_membership(Date prompt_date, const ModelSpec& spec) {
  return TemporalLabel{prompt_date <= spec.cutoff_date};
}

void validate(const SignalRecord& s) {
  if (s.alpha < -1 || s.alpha > 1) {
    throw ValidationError("alpha must be in {-1, 0, +1}");
  }
  if (!(s.confidence >= 0.0 && s.confidence <= 1.0)) {
    throw ValidationError("confidence must be in [0, 1]");
  }
}

void validate(const PriceSeries& series) {
  for (std::size_t i = 0; i < series.bars.size(); ++i) {
    const auto& bar = series.bars[i];
    if (!(bar.adjusted_close > 0.0) || !std::isfinite(bar.adjusted_close)) {
      throw ValidationError("adj_close must be > 0 for " + series.ticker +
                            " on " + bar.date.iso());
    }
    if (i > 0 && !(series.bars[i - 1].date < bar.date)) {
      throw ValidationError("dates must be strictly increasing for " +
                            series.ticker);
    }
  }
}

void ModelRegistry::add(ModelSpec spec) {
  validate(spec);
  if (index_.contains(spec.model_id)) {
    throw ValidationError("duplicate model_id '" + spec.model_id + "'");
  }
  index_.emplace(spec.model_id, models_.size());
  models_.push_back(std::move(spec));
}

const ModelSpec* ModelRegistry::find(std::string_view model_id) const {
  auto it = index_.find(model_id);
  return it == index_.end() ? nullptr : &models_[it->second];
}

const ModelSpec& ModelRegistry::at(std::string_view model_id) const {
  const ModelSpec* spec = find(model_id);
  if (spec == nullptr) {
    throw ReferentialError("unknown model_id '" + std::string(model_id) + "'");
  }
  return *spec;
}

}  // namespace memfilter
