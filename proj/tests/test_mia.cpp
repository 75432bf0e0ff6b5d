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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "memfilter/core/error.hpp"
#include "memfilter/mia/mia.hpp"
#include "memfilter/simd/kernels.hpp"
#include "memfilter/stats/rng.hpp"

namespace memfilter::mia {
namespace {

TokenTrack track(std::vector<double> logp, std::vector<double> mu = {},
                 std::vector<double> sigma = {}) {
  TokenTrack t;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    t.push_back({logp[i], mu.empty() ? -5.0 : mu[i],
                 sigma.empty() ? 2.0 : sigma[i]});
  }
  return t;
}

PromptRecord record(const std::string& model, std::vector<double> logp) {
  PromptRecord r;
  r.prompt_id = "p";
  r.model_id = model;
  r.text = "The quick brown fox jumps over the lazy dog";
  r.byte_len = static_cast<std::int64_t>(r.text.size());
  r.ticker = "AAA";
  r.date = Date::from_ymd(2022, 3, 1);
  r.tokens = track(std::move(logp));
  return r;
}

TEST(Loss, Examples) {
  EXPECT_EQ(score_loss(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_FALSE(std::signbit(score_loss(std::vector<double>{0, 0, 0})));
  EXPECT_EQ(score_loss(std::vector<double>{-2.0}), 2.0);
  EXPECT_EQ(score_loss(std::vector<double>{-1, -2, -3}), 2.0);
  EXPECT_THROW(score_loss(std::vector<double>{}), DomainError);
}

TEST(MinK, Examples) {
  EXPECT_EQ(score_min_k(std::vector<double>{-1, -2, -3, -4, -5}, 20), 5.0);
  EXPECT_EQ(score_min_k(std::vector<double>{-3, -3, -3, -3}, 37), 3.0);
  EXPECT_EQ(score_min_k(std::vector<double>{-0.5, -10}, 100), 5.25);
  EXPECT_THROW(score_min_k(std::vector<double>{-1}, 0), DomainError);
  EXPECT_THROW(score_min_k(std::vector<double>{-1}, 100.5), DomainError);
}

TEST(MinK, SubsetSize) {
  EXPECT_EQ(subset_size(5, 20), 1u);
  EXPECT_EQ(subset_size(6, 20), 2u);
  EXPECT_EQ(subset_size(3, 1), 1u);
  EXPECT_EQ(subset_size(10, 100), 10u);
}

TEST(MinK, NeverBelowLoss) {
  auto g = stats::Xoshiro256(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> l(1 + stats::uniform_index(g, 60));
    for (auto& x : l) x = -stats::uniform(g, 0.0, 12.0);
    const double k = stats::uniform(g, 0.5, 100.0);
    EXPECT_GE(score_min_k(l, k), score_loss(l) - 1e-12);
  }
}

TEST(MinKpp, Examples) {
  EXPECT_EQ(score_min_k_pp(track({-3}, {-5}, {2}), 20), 1.0);
  EXPECT_EQ(score_min_k_pp(track({-4, -6, -7}, {-4, -6, -7}, {1, 2, 3}), 50), 0.0);
  EXPECT_THROW(score_min_k_pp(track({-3}, {-5}, {0}), 20), DomainError);
}

TEST(MinKpp, MatchesSortOracle) {
  const std::vector<double> l = {-2.1, -0.3, -7.4, -3.3, -1.0, -5.5, -0.9, -4.2, -6.6, -2.8};
  const std::vector<double> mu = {-5, -6, -4.5, -7, -5.5, -8, -4, -6.5, -5, -9};
  const std::vector<double> sd = {2, 1.5, 1, 2.5, 3, 1.2, 2.2, 1.8, 1.1, 2.9};
  std::vector<double> z(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) z[i] = (l[i] - mu[i]) / sd[i];
  std::sort(z.begin(), z.end());
  const double oracle = (z[0] + z[1]) / 2.0;
  EXPECT_NEAR(score_min_k_pp(track(l, mu, sd), 20), oracle, 1e-15);
}

TEST(Zlib, FrozenCompressedLengths) {
  const std::string fixture =
      "The quick brown fox jumps over the lazy dog; the dog sleeps on..";
  ASSERT_EQ(fixture.size(), 64u);
  EXPECT_EQ(compressed_length(fixture), 64u);
  std::string rep;
  for (int i = 0; i < 64; ++i) rep += "abcd";
  EXPECT_EQ(compressed_length(rep), 15u);
  EXPECT_NEAR(zlib_entropy(fixture, 64), 5.545177444479562, 1e-15);
  EXPECT_NEAR(score_zlib_ratio(2.0, fixture, 64), 0.36067376022224085, 1e-15);
}

TEST(Zlib, Edges) {
  EXPECT_EQ(score_zlib_ratio(0.0, "anything", 8), 0.0);
  EXPECT_THROW(zlib_entropy("", 1), DomainError);
  EXPECT_THROW(zlib_entropy("abc", 0), DomainError);
  EXPECT_GT(score_zlib_ratio(1.0, "x", 1), 0.0);
}

TEST(RefRatio, Examples) {
  EXPECT_EQ(score_ref_ratio(3.0, 3.0), 1.0);
  EXPECT_NEAR(score_ref_ratio(0.607 * 4.2, 4.2), 0.607, 1e-15);
  EXPECT_EQ(score_ref_ratio(2.0, 4.0), 0.5);
  EXPECT_THROW(score_ref_ratio(1.0, 0.0), DomainError);
}

TEST(ScoreAll, ComposesSingleOps) {
  const auto target = record("tiny", {-1.2, -3.4, -0.2, -5.0, -2.2});
  const auto ref = record("gpt2", {-2.0, -4.0, -1.0, -6.0, -3.0});
  const auto v = score_all(target, &ref, 20);
  EXPECT_EQ(v.loss, score_loss(target.tokens));
  EXPECT_EQ(v.min_k, 5.0);
  EXPECT_EQ(v.min_k_pp, score_min_k_pp(target.tokens, 20));
  EXPECT_EQ(v.zlib_ratio, score_zlib_ratio(v.loss, target.text, target.byte_len));
  ASSERT_TRUE(v.ref_ratio.has_value());
  EXPECT_EQ(*v.ref_ratio, v.loss / 3.2);
}

TEST(ScoreAll, AllZeroLogps) {
  const auto v = score_all(record("tiny", {0, 0, 0}), nullptr, 20);
  EXPECT_EQ(v.loss, 0.0);
  EXPECT_EQ(v.min_k, 0.0);
  EXPECT_EQ(v.zlib_ratio, 0.0);
  EXPECT_FALSE(v.ref_ratio.has_value());
}

TEST(ScoreAll, SelfReferenceHasNoRatio) {
  const auto ref = record("gpt2", {-2.0, -4.0});
  EXPECT_FALSE(score_all(ref, &ref, 20).ref_ratio.has_value());
}

TEST(ScoreAll, PairingMismatch) {
  const auto target = record("tiny", {-1.0});
  auto ref = record("gpt2", {-2.0});
  ref.prompt_id = "other";
  EXPECT_THROW(score_all(target, &ref, 20), PairingError);
  ref.prompt_id = "p";
  ref.text = "different";
  EXPECT_THROW(score_all(target, &ref, 20), PairingError);
}

TEST(ScoreAll, IdenticalAcrossInstructionSets) {
  if (!simd::isa_supported(simd::Isa::kAvx2)) GTEST_SKIP();
  auto g = stats::Xoshiro256(3);
  std::vector<double> l(97);
  for (auto& x : l) x = -stats::uniform(g, 0.0, 9.0);
  const auto r = record("tiny", l);
  MiaScoreVector a, b;
  {
    simd::ScopedIsa s(simd::Isa::kScalar);
    a = score_all(r, nullptr, 20);
  }
  {
    simd::ScopedIsa s(simd::Isa::kAvx2);
    b = score_all(r, nullptr, 20);
  }
  EXPECT_NEAR(a.loss, b.loss, 1e-13);
  EXPECT_EQ(a.min_k_pp, b.min_k_pp);
}

std::vector<PromptRecord> small_corpus(int n) {
  std::vector<PromptRecord> out;
  auto g = stats::Xoshiro256(99);
  for (int i = 0; i < n; ++i) {
    for (const char* m : {"gpt2", "tiny"}) {
      std::vector<double> l(10);
      for (auto& x : l) x = -stats::uniform(g, 0.1, 8.0);
      auto r = record(m, l);
      r.prompt_id = "p" + std::to_string(i);
      out.push_back(std::move(r));
    }
  }
  return out;
}

TEST(ScoreCorpus, OneRowPerRecordSorted) {
  const auto recs = small_corpus(50);
  const auto batch = score_corpus(recs, "gpt2", 20, 1);
  ASSERT_EQ(batch.rows.size(), 100u);
  EXPECT_TRUE(batch.errors.empty());
  EXPECT_TRUE(batch.warnings.empty());
  for (std::size_t i = 1; i < batch.rows.size(); ++i) {
    EXPECT_LE(std::tie(batch.rows[i - 1].prompt_id, batch.rows[i - 1].model_id),
              std::tie(batch.rows[i].prompt_id, batch.rows[i].model_id));
  }
  for (const auto& row : batch.rows) {
    EXPECT_EQ(row.scores.ref_ratio.has_value(), row.model_id == "tiny");
  }
}

TEST(ScoreCorpus, MissingReferenceWarnsAndNullsRatios) {
  auto recs = small_corpus(5);
  std::erase_if(recs, [](const PromptRecord& r) { return r.model_id == "gpt2"; });
  const auto batch = score_corpus(recs, "gpt2", 20, 1);
  ASSERT_EQ(batch.warnings.size(), 1u);
  for (const auto& row : batch.rows) EXPECT_FALSE(row.scores.ref_ratio.has_value());
}

TEST(ScoreCorpus, ThreadCountDoesNotChangeOutput) {
  const auto recs = small_corpus(40);
  std::ostringstream a, b;
  write_scores(a, score_corpus(recs, "gpt2", 20, 1).rows);
  write_scores(b, score_corpus(recs, "gpt2", 20, 4).rows);
  EXPECT_EQ(a.str(), b.str());
}

TEST(ScoreCorpus, PerRecordFailuresAreCollected) {
  auto recs = small_corpus(3);
  recs[2].byte_len = 0;  // zlib ratio domain error for one record
  const auto batch = score_corpus(recs, "gpt2", 20, 1);
  EXPECT_EQ(batch.rows.size(), 5u);
  EXPECT_EQ(batch.errors.size(), 1u);
}

TEST(ScoreFile, RoundTrip) {
  const auto batch = score_corpus(small_corpus(4), "gpt2", 20, 1);
  std::ostringstream out;
  write_scores(out, batch.rows);
  std::istringstream in(out.str());
  const auto back = read_scores(in);
  ASSERT_EQ(back.size(), batch.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].scores, batch.rows[i].scores);
    EXPECT_EQ(back[i].date, batch.rows[i].date);
  }
}

}  // namespace
}  // namespace memfilter::mia
