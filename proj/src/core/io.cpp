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

#include "memfilter/core/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "memfilter/core/error.hpp"

namespace memfilter {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw ValidationError(std::string("missing required field '") + key + "'");
  }
  return *it;
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number()) {
    throw ValidationError(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::int64_t require_integer(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("field '") + key +
                          "' must be an integer");
  }
  return v.get<std::int64_t>();
}

Date require_date(const json& obj, const char* key) {
  Date d;
  if (!try_parse_date(require_string(obj, key), &d)) {
    throw ValidationError(std::string("field '") + key +
                          "' is not an ISO-8601 date");
  }
  return d;
}

// Runs `fn(json, line_no)` for every non-blank line. JSON syntax errors
// become ParseError; anything the callback throws is prefixed with the line.
template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    try {
      fn(obj, line_no);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const ReferentialError& e) {
      throw ReferentialError("line " + std::to_string(line_no) + ": " +
                             e.what());
    }
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

ModelRegistry read_registry(std::istream& in) {
  ModelRegistry registry;
  for_each_json_line(in, [&](const json& obj, std::size_t) {
    ModelSpec spec;
    spec.model_id = require_string(obj, "model_id");
    spec.param_count = require_integer(obj, "param_count");
    spec.family = require_string(obj, "family");
    spec.cutoff_date = require_date(obj, "cutoff_date");
    registry.add(std::move(spec));
  });
  return registry;
}

ModelRegistry load_registry(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_registry(in);
}

void write_registry(std::ostream& out, const ModelRegistry& registry) {
  for (const auto& m : registry.models()) {
    ordered_json obj;
    obj["model_id"] = m.model_id;
    obj["param_count"] = m.param_count;
    obj["family"] = m.family;
    obj["cutoff_date"] = m.cutoff_date.iso();
    out << obj.dump() << '\n';
  }
}

std::vector<PromptRecord> read_corpus(std::istream& in,
                                      const ModelRegistry& registry) {
  std::vector<PromptRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_json_line(in, [&](const json& obj, std::size_t) {
    PromptRecord r;
    r.prompt_id = require_string(obj, "prompt_id");
    r.model_id = require_string(obj, "model_id");
    r.text = require_string(obj, "text");
    r.byte_len = require_integer(obj, "byte_len");
    r.ticker = require_string(obj, "ticker");
    r.date = require_date(obj, "date");
    r.prompt_type = prompt_type_from_string(require_string(obj, "prompt_type"));
    const json& tokens = require(obj, "tokens");
    if (!tokens.is_array()) {
      throw ValidationError("field 'tokens' must be an array");
    }
    r.tokens.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const json& t = tokens[i];
      if (!t.is_object()) {
        throw ValidationError("tokens[" + std::to_string(i) +
                              "] must be an object");
      }
      r.tokens.push_back({require_number(t, "logp"),
                          require_number(t, "vocab_mu"),
                          require_number(t, "vocab_sigma")});
    }
    validate(r);
    if (!registry.contains(r.model_id)) {
      throw ReferentialError("model_id '" + r.model_id +
                             "' is not in the model registry");
    }
    if (!seen.emplace(r.prompt_id, r.model_id).second) {
      throw ValidationError("duplicate (prompt_id, model_id) = (" +
                            r.prompt_id + ", " + r.model_id + ")");
    }
    records.push_back(std::move(r));
  });
  return records;
}

Corpus load_corpus(const std::filesystem::path& corpus_path,
                   const std::filesystem::path& registry_path) {
  Corpus corpus;
  corpus.registry = load_registry(registry_path);
  auto in = open_input(corpus_path);
  corpus.records = read_corpus(in, corpus.registry);
  return corpus;
}

void write_corpus(std::ostream& out, const std::vector<PromptRecord>& records) {
  for (const auto& r : records) {
    ordered_json obj;
    obj["prompt_id"] = r.prompt_id;
    obj["model_id"] = r.model_id;
    obj["text"] = r.text;
    obj["byte_len"] = r.byte_len;
    obj["ticker"] = r.ticker;
    obj["date"] = r.date.iso();
    obj["prompt_type"] = std::string(to_string(r.prompt_type));
    ordered_json tokens = ordered_json::array();
    for (std::size_t i = 0; i < r.tokens.size(); ++i) {
      const auto t = r.tokens[i];
      ordered_json tok;
      tok["logp"] = t.logp;
      tok["vocab_mu"] = t.vocab_mu;
      tok["vocab_sigma"] = t.vocab_sigma;
      tokens.push_back(std::move(tok));
    }
    obj["tokens"] = std::move(tokens);
    out << obj.dump() << '\n';
  }
}

PriceTable read_prices(std::istream& in) {
  std::string line;
  std::size_t row = 0;
  if (!std::getline(in, line)) throw ParseError("empty price file", 1);
  ++row;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "date,ticker,adj_close") {
    throw ParseError("expected header 'date,ticker,adj_close'", row);
  }
  std::map<std::string, std::vector<PriceBar>> bars;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw ParseError("expected 3 comma-separated fields", row);
    }
    Date date;
    if (!try_parse_date(std::string_view(line).substr(0, c1), &date)) {
      throw ParseError("unparsable date '" + line.substr(0, c1) + "'", row);
    }
    std::string ticker = line.substr(c1 + 1, c2 - c1 - 1);
    if (ticker.empty()) throw ParseError("empty ticker", row);
    double price = 0.0;
    const char* first = line.data() + c2 + 1;
    const char* last = line.data() + line.size();
    auto [p, ec] = std::from_chars(first, last, price);
    if (ec != std::errc{} || p != last) {
      throw ParseError("unparsable adj_close", row);
    }
    if (!(price > 0.0)) {
      throw ValidationError("row " + std::to_string(row) +
                            ": adj_close must be > 0");
    }
    bars[ticker].push_back({date, price});
  }
  PriceTable table;
  for (auto& [ticker, series_bars] : bars) {
    std::sort(series_bars.begin(), series_bars.end(),
              [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series_bars.size(); ++i) {
      if (series_bars[i].date == series_bars[i - 1].date) {
        throw ValidationError("duplicate (date, ticker) = (" +
                              series_bars[i].date.iso() + ", " + ticker + ")");
      }
    }
    PriceSeries series{ticker, std::move(series_bars)};
    validate(series);
    table.emplace(ticker, std::move(series));
  }
  return table;
}

PriceTable load_prices(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_prices(in);
}

void write_prices(std::ostream& out, const PriceTable& prices) {
  out << "date,ticker,adj_close\n";
  // Date-major order, like a vendor export.
  std::vector<std::tuple<Date, std::string, double>> rows;
  for (const auto& [ticker, series] : prices) {
    for (const auto& bar : series.bars) {
      rows.emplace_back(bar.date, ticker, bar.adjusted_close);
    }
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& [date, ticker, price] : rows) {
    out << date.iso() << ',' << ticker << ',' << format_double(price) << '\n';
  }
}

std::vector<SignalRecord> read_signals(std::istream& in) {
  std::vector<SignalRecord> signals;
  for_each_json_line(in, [&](const json& obj, std::size_t) {
    SignalRecord s;
    s.model_id = require_string(obj, "model_id");
    s.ticker = require_string(obj, "ticker");
    s.date = require_date(obj, "date");
    s.alpha = static_cast<int>(require_integer(obj, "alpha"));
    s.confidence = require_number(obj, "confidence");
    auto it = obj.find("raw_text");
    if (it != obj.end() && it->is_string()) s.raw_text = it->get<std::string>();
    validate(s);
    signals.push_back(std::move(s));
  });
  return signals;
}

std::vector<SignalRecord> load_signals(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_signals(in);
}

void write_signals(std::ostream& out, const std::vector<SignalRecord>& signals) {
  for (const auto& s : signals) {
    ordered_json obj;
    obj["model_id"] = s.model_id;
    obj["ticker"] = s.ticker;
    obj["date"] = s.date.iso();
    obj["alpha"] = s.alpha;
    obj["confidence"] = s.confidence;
    obj["raw_text"] = s.raw_text;
    out << obj.dump() << '\n';
  }
}

}  // namespace memfilter
