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

#ifndef MEMFILTER_MIA_MIA_HPP_
#define MEMFILTER_MIA_MIA_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memfilter/core/types.hpp"

namespace memfilter::mia {

inline constexpr double kDefaultKPercent = 20.0;
// DEFLATE level used for the compression-entropy denominator.
inline constexpr int kZlibLevel = 6;

// The five membership-inference scores for one (prompt, model) pair.
// loss and min_k are negated mean log-probs (nats/token); min_k_pp keeps
// the sign of the calibrated z-scores, so familiar text tends negative.
struct MiaScoreVector {
  double loss = 0.0;
  double min_k = 0.0;
  double min_k_pp = 0.0;
  double zlib_ratio = 0.0;
  std::optional<double> ref_ratio;
  double k_percent = kDefaultKPercent;

  friend bool operator==(const MiaScoreVector&,
                         const MiaScoreVector&) = default;
};

// Number of tokens in the "hardest" subset: max(1, ceil(n * k / 100)).
std::size_t subset_size(std::size_t n, double k_percent);

// Indices of the m smallest values, ordered by (value, position).
std::vector<std::size_t> hardest_indices(std::span<const double> values,
                                         double k_percent);

double score_loss(std::span<const double> logp);
double score_loss(const TokenTrack& tokens);

double score_min_k(std::span<const double> logp, double k_percent);
double score_min_k(const TokenTrack& tokens, double k_percent);

double score_min_k_pp(const TokenTrack& tokens, double k_percent);

// Length of `text` after zlib compression (level 6, 32 KiB window).
std::size_t compressed_length(std::string_view text);
// Compression entropy in nats per original byte.
double zlib_entropy(std::string_view text, std::int64_t byte_len);
double score_zlib_ratio(double loss, std::string_view text,
                        std::int64_t byte_len);

double score_ref_ratio(double target_loss, double ref_loss);

// `ref` must describe the same prompt (id and text). ref_ratio is left
// empty when `ref` is null or when `record` is the reference model itself.
MiaScoreVector score_all(const PromptRecord& record, const PromptRecord* ref,
                         double k_percent = kDefaultKPercent);

// One line of the score file. ticker and date ride along so later stages
// can join on them without rereading the corpus.
struct ScoreRow {
  std::string prompt_id;
  std::string model_id;
  std::string ticker;
  Date date;
  MiaScoreVector scores;
};

struct ScoreBatch {
  std::vector<ScoreRow> rows;  // sorted by (prompt_id, model_id)
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

// Scores every record; per-record failures are collected, not thrown.
// `jobs` > 1 fans out across threads; output order does not depend on it.
ScoreBatch score_corpus(const std::vector<PromptRecord>& records,
                        std::string_view ref_model_id, double k_percent,
                        unsigned jobs = 1);

void write_scores(std::ostream& out, const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> read_scores(std::istream& in);

}  // namespace memfilter::mia

#endif  // MEMFILTER_MIA_MIA_HPP_
