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

#ifndef MEMFILTER_CORE_IO_HPP_
#define MEMFILTER_CORE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "memfilter/core/types.hpp"

namespace memfilter {

struct Corpus {
  std::vector<PromptRecord> records;
  ModelRegistry registry;
};

// Line-delimited JSON, one model per line.
ModelRegistry read_registry(std::istream& in);
ModelRegistry load_registry(const std::filesystem::path& path);
void write_registry(std::ostream& out, const ModelRegistry& registry);

// Parses and validates corpus records; every model_id must resolve in
// `registry` and (prompt_id, model_id) must be unique.
std::vector<PromptRecord> read_corpus(std::istream& in,
                                      const ModelRegistry& registry);
Corpus load_corpus(const std::filesystem::path& corpus_path,
                   const std::filesystem::path& registry_path);
void write_corpus(std::ostream& out, const std::vector<PromptRecord>& records);

// CSV with header date,ticker,adj_close. Rows may be in any order; each
// series comes back sorted by date.
PriceTable read_prices(std::istream& in);
PriceTable load_prices(const std::filesystem::path& path);
void write_prices(std::ostream& out, const PriceTable& prices);

std::vector<SignalRecord> read_signals(std::istream& in);
std::vector<SignalRecord> load_signals(const std::filesystem::path& path);
void write_signals(std::ostream& out, const std::vector<SignalRecord>& signals);

// Shortest round-trip decimal form of a double; used for every CSV cell
// so reruns are byte-identical.
std::string format_double(double value);

}  // namespace memfilter

#endif  // MEMFILTER_CORE_IO_HPP_
