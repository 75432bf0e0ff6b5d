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

#ifndef MEMFILTER_PARSER_SIGNAL_PARSER_HPP_
#define MEMFILTER_PARSER_SIGNAL_PARSER_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace memfilter::parser {

// Marker phrases, lowercase, matched on word boundaries.
struct ParseRule {
  std::vector<std::string> bullish;
  std::vector<std::string> bearish;
  std::vector<std::string> neutral;

  static ParseRule defaults();
  // Throws ValidationError if a phrase is empty or appears in two lists.
  void validate() const;
};

// {"bullish": [...], "bearish": [...], "neutral": [...]}; missing lists
// keep their defaults.
ParseRule read_rules(std::istream& in);
ParseRule load_rules(const std::filesystem::path& path);

enum class ParseStatus { kOk, kUnparsed };

struct ParsedSignal {
  int alpha = 0;
  double confidence = 0.0;
  ParseStatus status = ParseStatus::kUnparsed;
};

inline constexpr double kDefaultConfidence = 0.5;

// Looks only at the last two sentences. Bearish markers beat bullish, which
// beat neutral. Confidence is the last decimal in [0, 1] after the winning
// marker, else kDefaultConfidence. No marker gives (0, 0.0, kUnparsed).
ParsedSignal parse_signal(std::string_view raw_text, const ParseRule& rules);

struct ParseDiagnostics {
  std::size_t total = 0;
  std::size_t unparsed = 0;
  std::size_t bullish = 0;
  std::size_t bearish = 0;
  std::size_t neutral = 0;

  void add(const ParsedSignal& s);
};

}  // namespace memfilter::parser

#endif  // MEMFILTER_PARSER_SIGNAL_PARSER_HPP_
