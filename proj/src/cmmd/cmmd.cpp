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

#include "memfilter/cmmd/cmmd.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <tuple>

#include "json.hpp"
#include "memfilter/core/error.hpp"

namespace memfilter::cmmd {
namespace {

struct Entry {
  const std::string* id;
  double mcs;
  int alpha;
};

CmmdPartition split(std::vector<Entry> entries) {
  if (entries.size() < 2) {
    throw InsufficientDataError("a single model cannot be partitioned");
  }
  std::vector<double> sorted;
  sorted.reserve(entries.size());
  for (const auto& e : entries) sorted.push_back(e.mcs);
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[(sorted.size() - 1) / 2];

  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return *a.id < *b.id; });
  CmmdPartition p;
  p.median_mcs = med;
  int clean_sum = 0;
  int tainted_sum = 0;
  for (const auto& e : entries) {
    if (e.mcs <= med) {
      p.clean_ids.push_back(*e.id);
      clean_sum += e.alpha;
    } else {
      p.tainted_ids.push_back(*e.id);
      tainted_sum += e.alpha;
    }
  }
  p.alpha_cmmd = static_cast<double>(clean_sum) /
                 static_cast<double>(p.clean_ids.size());
  if (!p.tainted_ids.empty()) {
    p.delta = static_cast<double>(tainted_sum) /
                  static_cast<double>(p.tainted_ids.size()) -
              p.alpha_cmmd;
  }
  return p;
}

}  // namespace

CmmdPartition partition(const std::map<std::string, double>& scores,
                        const std::map<std::string, int>& signals) {
  if (scores.size() != signals.size() ||
      !std::equal(scores.begin(), scores.end(), signals.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw PairingError("partition: score and signal model sets differ");
  }
  std::vector<Entry> entries;
  for (const auto& [id, mcs] : scores) {
    entries.push_back({&id, mcs, signals.at(id)});
  }
  return split(std::move(entries));
}

JoinResult join_signals(std::span<const SignalRecord> signals,
                        std::span<const mcs::McsRow> mcs_rows) {
  using Key = std::tuple<std::string, std::string, Date>;
  std::map<Key, std::pair<double, int>> acc;
  for (const auto& r : mcs_rows) {
    auto& slot = acc[Key{r.model_id, r.ticker, r.date}];
    slot.first += r.mcs;
    slot.second += 1;
  }
  JoinResult out;
  out.votes.reserve(signals.size());
  for (const auto& s : signals) {
    auto it = acc.find(Key{s.model_id, s.ticker, s.date});
    if (it == acc.end()) {
      ++out.missing_mcs;
      continue;
    }
    out.votes.push_back({s.model_id, s.ticker, s.date,
                         it->second.first / it->second.second, s.alpha});
  }
  return out;
}

SeriesResult cmmd_signal_series(std::span<const SignalVote> votes) {
  std::map<std::pair<std::string, Date>, std::vector<const SignalVote*>> groups;
  for (const auto& v : votes) groups[{v.ticker, v.date}].push_back(&v);

  SeriesResult out;
  for (const auto& [key, group] : groups) {
    std::vector<Entry> entries;
    bool duplicate = false;
    for (const auto* v : group) {
      for (const auto& e : entries) duplicate |= *e.id == v->model_id;
      entries.push_back({&v->model_id, v->mcs, v->alpha});
    }
    if (duplicate) {
      out.errors.push_back("duplicate model signal for (" + key.first + ", " +
                           key.second.iso() + ")");
      continue;
    }
    if (entries.size() < 2) {
      ++out.skipped;
      continue;
    }
    CmmdPartition p = split(std::move(entries));
    p.ticker = key.first;
    p.date = key.second;
    out.partitions.push_back(std::move(p));
  }
  return out;
}

DisagreementStats disagreement_stats(std::span<const CmmdPartition> partitions) {
  if (partitions.empty()) {
    throw InsufficientDataError("disagreement_stats: no partitions");
  }
  DisagreementStats s;
  for (const auto& p : partitions) {
    if (!p.delta) continue;
    ++s.with_delta;
    if (std::fabs(*p.delta) > 0.5) ++s.count_gt_half;
  }
  s.fraction = s.with_delta == 0
                   ? 0.0
                   : static_cast<double>(s.count_gt_half) / s.with_delta;
  return s;
}

void write_partitions(std::ostream& out,
                      const std::vector<CmmdPartition>& partitions) {
  for (const auto& p : partitions) {
    nlohmann::ordered_json obj;
    obj["ticker"] = p.ticker;
    obj["date"] = p.date.iso();
    obj["clean_ids"] = p.clean_ids;
    obj["tainted_ids"] = p.tainted_ids;
    obj["median_mcs"] = p.median_mcs;
    obj["alpha_cmmd"] = p.alpha_cmmd;
    if (p.delta) {
      obj["delta"] = *p.delta;
    } else {
      obj["delta"] = nullptr;
    }
    out << obj.dump() << '\n';
  }
}

std::vector<CmmdPartition> read_partitions(std::istream& in) {
  std::vector<CmmdPartition> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      CmmdPartition p;
      p.ticker = obj.at("ticker").get<std::string>();
      p.date = Date::parse(obj.at("date").get<std::string>());
      p.clean_ids = obj.at("clean_ids").get<std::vector<std::string>>();
      p.tainted_ids = obj.at("tainted_ids").get<std::vector<std::string>>();
      p.median_mcs = obj.at("median_mcs").get<double>();
      p.alpha_cmmd = obj.at("alpha_cmmd").get<double>();
      if (!obj.at("delta").is_null()) p.delta = obj.at("delta").get<double>();
      if (p.clean_ids.empty()) {
        throw ValidationError("clean_ids must be non-empty");
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("partition file: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(std::string("partition file: ") + e.what(), line_no);
    }
  }
  return out;
}

}  // namespace memfilter::cmmd
