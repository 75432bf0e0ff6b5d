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

#ifndef MEMFILTER_CORE_TYPES_HPP_
#define MEMFILTER_CORE_TYPES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memfilter/core/date.hpp"

namespace memfilter {

struct ModelSpec {
  std::string model_id;
  std::int64_t param_count = 0;
  std::string family;
  Date cutoff_date;  // last day whose data may be in the training corpus
};

// Throws ValidationError if param_count <= 0 or the id is empty.
void validate(const ModelSpec& spec);

// One scored position of a prompt under one model.
struct TokenObservation {
  double logp = 0.0;         // nats, <= 0
  double vocab_mu = 0.0;     // mean log-prob over the vocabulary, nats
  double vocab_sigma = 1.0;  // std of log-probs over the vocabulary, > 0
};

// Token observations stored column-wise so the scoring kernels can run
// over contiguous arrays.
class TokenTrack {
 public:
  TokenTrack() = default;
  explicit TokenTrack(std::span<const TokenObservation> tokens);

  void push_back(const TokenObservation& t);
  void reserve(std::size_t n);

  std::size_t size() const { return logp_.size(); }
  bool empty() const { return logp_.empty(); }
  TokenObservation operator[](std::size_t i) const {
    return {logp_[i], vocab_mu_[i], vocab_sigma_[i]};
  }

  std::span<const double> logp() const { return logp_; }
  std::span<const double> vocab_mu() const { return vocab_mu_; }
  std::span<const double> vocab_sigma() const { return vocab_sigma_; }

  friend bool operator==(const TokenTrack&, const TokenTrack&) = default;

 private:
  std::vector<double> logp_;
  std::vector<double> vocab_mu_;
  std::vector<double> vocab_sigma_;
};

enum class PromptType { kPriceRecall, kSentiment, kForward };

std::string_view to_string(PromptType t);
// Throws ValidationError on an unknown name.
PromptType prompt_type_from_string(std::string_view name);

struct PromptRecord {
  std::string prompt_id;
  std::string model_id;
  std::string text;
  std::int64_t byte_len = 0;  // stored, not recomputed from text
  TokenTrack tokens;
  std::string ticker;
  Date date;
  PromptType prompt_type = PromptType::kForward;
};

// Checks every token and field invariant. The message names the offending
// field, e.g. "tokens[3].vocab_sigma must be > 0".
void validate(const PromptRecord& record);

struct TemporalLabel {
  bool is_member = false;
};

// Membership is inclusive of the cutoff day itself.
TemporalLabel label_membership(Date prompt_date, const ModelSpec& spec);

struct SignalRecord {
  std::string model_id;
  std::string ticker;
  Date date;
  int alpha = 0;           // -1 bearish, 0 neutral, +1 bullish
  double confidence = 0;   // [0, 1]
  std::string raw_text;
};

void validate(const SignalRecord& signal);

struct PriceBar {
  Date date;
  double adjusted_close = 0.0;
};

struct PriceSeries {
  std::string ticker;
  std::vector<PriceBar> bars;  // strictly increasing dates
};

void validate(const PriceSeries& series);

using PriceTable = std::map<std::string, PriceSeries>;

// Registry keyed by model id. Insertion rejects duplicates.
class ModelRegistry {
 public:
  void add(ModelSpec spec);
  const ModelSpec& at(std::string_view model_id) const;
  const ModelSpec* find(std::string_view model_id) const;
  bool contains(std::string_view model_id) const {
    return find(model_id) != nullptr;
  }
  std::size_t size() const { return models_.size(); }
  // Models in insertion order.
  const std::vector<ModelSpec>& models() const { return models_; }

 private:
  std::vector<ModelSpec> models_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace memfilter

#endif  // MEMFILTER_CORE_TYPES_HPP_
