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

#include <cstdio>
#include <sstream>
#include <string>

#include "memfilter/core/error.hpp"
#include "memfilter/parser/signal_parser.hpp"
#include "memfilter/stats/rng.hpp"

namespace memfilter::parser {
namespace {

const ParseRule kRules = ParseRule::defaults();

void expect_parse(const std::string& text, int alpha, double confidence,
                  ParseStatus status) {
  const auto s = parse_signal(text, kRules);
  EXPECT_EQ(s.alpha, alpha) << text;
  EXPECT_EQ(s.confidence, confidence) << text;
  EXPECT_EQ(s.status, status) << text;
}

TEST(ParseSignal, Examples) {
  expect_parse("Earnings look solid. Prediction: bullish, confidence 0.8", 1, 0.8,
               ParseStatus::kOk);
  expect_parse("Mixed picture overall. Prediction: neutral.", 0, 0.5,
               ParseStatus::kOk);
  expect_parse("the weather is nice", 0, 0.0, ParseStatus::kUnparsed);
  expect_parse("", 0, 0.0, ParseStatus::kUnparsed);
}

TEST(ParseSignal, CaseInsensitiveAndWordBoundaries) {
  expect_parse("PREDICTION: BEARISH (CONFIDENCE .65)", -1, 0.65, ParseStatus::kOk);
  // "buyback" and "household" are not markers.
  expect_parse("The buyback helps the household segment.", 0, 0.0,
               ParseStatus::kUnparsed);
  expect_parse("Analysts say outperform.", 1, 0.5, ParseStatus::kOk);
}

TEST(ParseSignal, OnlyTheLastTwoSentencesCount) {
  expect_parse("I was bearish last year. Margins grew. Revenue grew. Call: hold.", 0,
               0.5, ParseStatus::kOk);
  expect_parse("Margins grew.\nCall: buy\nConfidence: 0.7", 1, 0.7,
               ParseStatus::kOk);
}

TEST(ParseSignal, BearishBeatsBullishBeatsNeutral) {
  expect_parse("Some say buy, but I say sell with confidence 0.9.", -1, 0.9,
               ParseStatus::kOk);
  expect_parse("Not neutral: bullish 0.6.", 1, 0.6, ParseStatus::kOk);
}

TEST(ParseSignal, ConfidenceIsLastUnitDecimalAfterMarker) {
  expect_parse("Bullish with confidence 0.4, revised to 0.75.", 1, 0.75,
               ParseStatus::kOk);
  expect_parse("Confidence 0.9. Bullish for 2024 with a 3.5 upside.", 1, 0.5,
               ParseStatus::kOk);
  expect_parse("Bullish, confidence 1.", 1, 1.0, ParseStatus::kOk);
  expect_parse("Bullish, confidence 0.", 1, 0.0, ParseStatus::kOk);
  // Dates and ratios are not confidences.
  expect_parse("Bullish into 2024-01-05 at 1/2 size.", 1, 0.5, ParseStatus::kOk);
}

TEST(ParseSignal, TotalOnRandomText) {
  auto g = stats::Xoshiro256(21);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz .,:!?\n0123456789";
  const std::string words[] = {"bullish", "bearish", "neutral", "buy", "sell",
                               "hold", "0.3", "1.0", "confidence", "."};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const auto len = stats::uniform_index(g, 80);
    for (std::uint64_t i = 0; i < len; ++i) {
      if (stats::bernoulli(g, 0.15)) {
        text += " " + words[stats::uniform_index(g, std::size(words))] + " ";
      } else {
        text += alphabet[stats::uniform_index(g, alphabet.size())];
      }
    }
    const auto s = parse_signal(text, kRules);
    EXPECT_GE(s.alpha, -1);
    EXPECT_LE(s.alpha, 1);
    EXPECT_GE(s.confidence, 0.0);
    EXPECT_LE(s.confidence, 1.0);
    const auto again = parse_signal(text, kRules);
    EXPECT_EQ(again.alpha, s.alpha);
    EXPECT_EQ(again.confidence, s.confidence);
  }
}

TEST(ParseSignal, ReserializationIsStable) {
  const char* texts[] = {"Prediction: bullish with confidence 0.72.",
                         "Prediction: bearish.", "Prediction: neutral, 0.4."};
  for (const char* t : texts) {
    const auto s = parse_signal(t, kRules);
    const char* word = s.alpha > 0 ? "bullish" : (s.alpha < 0 ? "bearish" : "neutral");
    char buf[96];
    std::snprintf(buf, sizeof buf, "Prediction: %s with confidence %.2f.", word,
                  s.confidence);
    const auto back = parse_signal(buf, kRules);
    EXPECT_EQ(back.alpha, s.alpha);
    EXPECT_EQ(back.confidence, s.confidence);
  }
}

TEST(Rules, ValidationAndLoading) {
  ParseRule r = ParseRule::defaults();
  EXPECT_NO_THROW(r.validate());
  r.neutral.push_back("buy");
  EXPECT_THROW(r.validate(), ValidationError);
  r = ParseRule::defaults();
  r.bullish.push_back("");
  EXPECT_THROW(r.validate(), ValidationError);

  std::istringstream in(R"({"bullish": ["Long", "accumulate"]})");
  const auto loaded = read_rules(in);
  EXPECT_EQ(loaded.bullish, (std::vector<std::string>{"long", "accumulate"}));
  EXPECT_EQ(loaded.bearish, ParseRule::defaults().bearish);
  EXPECT_EQ(parse_signal("Go long, 0.9", loaded).alpha, 1);
  EXPECT_EQ(parse_signal("Strong buy.", loaded).status, ParseStatus::kUnparsed);

  std::istringstream clash(R"({"neutral": ["sell"]})");
  EXPECT_THROW(read_rules(clash), ValidationError);
  std::istringstream broken("{bullish");
  EXPECT_THROW(read_rules(broken), ParseError);
}

TEST(Diagnostics, Counts) {
  ParseDiagnostics d;
  for (const char* t : {"buy", "sell", "hold", "nothing here", "bullish"}) {
    d.add(parse_signal(t, kRules));
  }
  EXPECT_EQ(d.total, 5u);
  EXPECT_EQ(d.bullish, 2u);
  EXPECT_EQ(d.bearish, 1u);
  EXPECT_EQ(d.neutral, 1u);
  EXPECT_EQ(d.unparsed, 1u);
}

}  // namespace
}  // namespace memfilter::parser
