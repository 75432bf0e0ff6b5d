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

#include "memfilter/parser/signal_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>

#include "json.hpp"
#include "memfilter/core/error.hpp"

namespace memfilter::parser {
namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Start offset of the last two non-empty sentences.
std::size_t commitment_start(const std::string& text) {
  std::vector<std::size_t> starts;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    const auto first = text.find_first_not_of(" \t\r\n", start);
    if (first != std::string::npos && first < end) starts.push_back(first);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool terminator =
        c == '\n' ||
        ((c == '.' || c == '!' || c == '?') &&
         (i + 1 == text.size() ||
          std::isspace(static_cast<unsigned char>(text[i + 1]))));
    if (terminator) {
      flush(i + 1);
      start = i + 1;
    }
  }
  flush(text.size());
  if (starts.empty()) return text.size();
  return starts.size() >= 2 ? starts[starts.size() - 2] : starts.back();
}

// Earliest whole-word match of any phrase at or after `from`; returns the
// end offset of the match.
std::optional<std::size_t> find_marker(const std::string& text, std::size_t from,
                                       const std::vector<std::string>& phrases) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  for (const auto& phrase : phrases) {
    std::size_t pos = text.find(phrase, from);
    while (pos != std::string::npos) {
      const std::size_t end = pos + phrase.size();
      const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
      const bool right_ok = end == text.size() || !is_word_char(text[end]);
      if (left_ok && right_ok) {
        if (!best || pos < best->first) best = {pos, end};
        break;
      }
      pos = text.find(phrase, pos + 1);
    }
  }
  if (!best) return std::nullopt;
  return best->second;
}

std::optional<double> last_unit_decimal(const std::string& text,
                                        std::size_t from) {
  std::optional<double> found;
  std::size_t i = from;
  auto glued = [](char c) {
    return is_word_char(c) || c == '-' || c == '/' || c == ':';
  };
  while (i < text.size()) {
    const bool digit = std::isdigit(static_cast<unsigned char>(text[i])) != 0;
    const bool dot_digit = text[i] == '.' && i + 1 < text.size() &&
                           std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (!digit && !dot_digit) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j + 1 < text.size() && text[j] == '.' &&
        std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
      ++j;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    }
    const bool left_ok = i == 0 || (!glued(text[i - 1]) && text[i - 1] != '.');
    const bool right_ok = j == text.size() || !glued(text[j]);
    if (left_ok && right_ok) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(text.data() + i, text.data() + j, v);
      if (ec == std::errc{} && v >= 0.0 && v <= 1.0) found = v;
    }
    i = j;
  }
  return found;
}

std::vector<std::string> read_list(const nlohmann::json& obj, const char* key,
                                   std::vector<std::string> fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  std::vector<std::string> out;
  for (const auto& v : *it) out.push_back(lowercase(v.get<std::string>()));
  return out;
}

}  // namespace

ParseRule ParseRule::defaults() {
  return ParseRule{{"bullish", "buy", "outperform"},
                   {"bearish", "sell", "underperform"},
                   {"neutral", "hold"}};
}

void ParseRule::validate() const {
  std::set<std::string> seen;
  for (const auto* list : {&bullish, &bearish, &neutral}) {
    for (const auto& phrase : *list) {
      if (phrase.empty()) throw ValidationError("empty marker phrase");
      if (!seen.insert(phrase).second) {
        throw ValidationError("marker '" + phrase + "' appears in two lists");
      }
    }
  }
}

ParseRule read_rules(std::istream& in) {
  try {
    const auto obj = nlohmann::json::parse(in);
    const ParseRule d = ParseRule::defaults();
    ParseRule r{read_list(obj, "bullish", d.bullish),
                read_list(obj, "bearish", d.bearish),
                read_list(obj, "neutral", d.neutral)};
    r.validate();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("parse rules: ") + e.what(), 1);
  }
}

ParseRule load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_rules(in);
}

ParsedSignal parse_signal(std::string_view raw_text, const ParseRule& rules) {
  const std::string text = lowercase(raw_text);
  const std::size_t from = commitment_start(text);
  const std::pair<const std::vector<std::string>*, int> order[] = {
      {&rules.bearish, -1}, {&rules.bullish, +1}, {&rules.neutral, 0}};
  for (const auto& [phrases, alpha] : order) {
    const auto end = find_marker(text, from, *phrases);
    if (!end) continue;
    ParsedSignal s;
    s.alpha = alpha;
    s.confidence = last_unit_decimal(text, *end).value_or(kDefaultConfidence);
    s.status = ParseStatus::kOk;
    return s;
  }
  return ParsedSignal{};
}

void ParseDiagnostics::add(const ParsedSignal& s) {
  ++total;
  if (s.status == ParseStatus::kUnparsed) {
    ++unparsed;
  } else if (s.alpha > 0) {
    ++bullish;
  } else if (s.alpha < 0) {
    ++bearish;
  } else {
    ++neutral;
  }
}

}  // namespace memfilter::parser
