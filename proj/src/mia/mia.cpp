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

#include "memfilter/mia/mia.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "memfilter/core/error.hpp"
#include "memfilter/simd/kernels.hpp"

namespace memfilter::mia {
namespace {

void check_k(double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0)) {
    throw DomainError("k_percent must be in (0, 100]");
  }
}

double mean_of_subset(std::span<const double> values,
                      std::span<const std::size_t> idx) {
  std::vector<double> picked(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) picked[i] = values[idx[i]];
  return simd::sum(picked) / static_cast<double>(idx.size());
}

}  // namespace

std::size_t subset_size(std::size_t n, double k_percent) {
  check_k(k_percent);
  const double raw = std::ceil(static_cast<double>(n) * k_percent / 100.0);
  return std::clamp<std::size_t>(static_cast<std::size_t>(raw), 1, n);
}

std::vector<std::size_t> hardest_indices(std::span<const double> values,
                                         double k_percent) {
  const std::size_t m = subset_size(values.size(), k_percent);
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + m, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (values[a] != values[b]) return values[a] < values[b];
                      return a < b;
                    });
  idx.resize(m);
  return idx;
}

double score_loss(std::span<const double> logp) {
  if (logp.empty()) throw DomainError("score_loss: empty token list");
  // Negate after averaging so that all-zero input yields +0.0.
  const double mean = simd::sum(logp) / static_cast<double>(logp.size());
  return mean == 0.0 ? 0.0 : -mean;
}

double score_loss(const TokenTrack& tokens) { return score_loss(tokens.logp()); }

double score_min_k(std::span<const double> logp, double k_percent) {
  if (logp.empty()) throw DomainError("score_min_k: empty token list");
  check_k(k_percent);
  if (subset_size(logp.size(), k_percent) == logp.size()) {
    return score_loss(logp);
  }
  const auto idx = hardest_indices(logp, k_percent);
  const double mean = mean_of_subset(logp, idx);
  return mean == 0.0 ? 0.0 : -mean;
}

double score_min_k(const TokenTrack& tokens, double k_percent) {
  return score_min_k(tokens.logp(), k_percent);
}

double score_min_k_pp(const TokenTrack& tokens, double k_percent) {
  if (tokens.empty()) throw DomainError("score_min_k_pp: empty token list");
  check_k(k_percent);
  for (double s : tokens.vocab_sigma()) {
    if (!(s > 0.0)) throw DomainError("score_min_k_pp: vocab_sigma must be > 0");
  }
  std::vector<double> z(tokens.size());
  simd::zscore(tokens.logp(), tokens.vocab_mu(), tokens.vocab_sigma(), z);
  const auto idx = hardest_indices(z, k_percent);
  return mean_of_subset(z, idx);
}

std::size_t compressed_length(std::string_view text) {
  uLongf bound = compressBound(static_cast<uLong>(text.size()));
  std::vector<Bytef> buf(bound);
  const int rc = compress2(buf.data(), &bound,
                           reinterpret_cast<const Bytef*>(text.data()),
                           static_cast<uLong>(text.size()), kZlibLevel);
  if (rc != Z_OK) throw Error("zlib compress2 failed with code " +
                              std::to_string(rc));
  return static_cast<std::size_t>(bound);
}

double zlib_entropy(std::string_view text, std::int64_t byte_len) {
  if (text.empty()) throw DomainError("zlib entropy of empty text");
  if (byte_len <= 0) throw DomainError("byte_len must be > 0");
  const double bits = 8.0 * static_cast<double>(compressed_length(text));
  return bits * std::numbers::ln2 / static_cast<double>(byte_len);
}

double score_zlib_ratio(double loss, std::string_view text,
                        std::int64_t byte_len) {
  if (!(loss >= 0.0)) throw DomainError("zlib ratio: loss must be >= 0");
  return loss / zlib_entropy(text, byte_len);
}

double score_ref_ratio(double target_loss, double ref_loss) {
  if (!(ref_loss > 0.0)) throw DomainError("reference loss must be > 0");
  return target_loss / ref_loss;
}

MiaScoreVector score_all(const PromptRecord& record, const PromptRecord* ref,
                         double k_percent) {
  if (ref != nullptr &&
      (ref->prompt_id != record.prompt_id || ref->text != record.text)) {
    throw PairingError("reference record for '" + record.prompt_id +
                       "' does not match (prompt_id or text differs)");
  }
  MiaScoreVector v;
  v.k_percent = k_percent;
  v.loss = score_loss(record.tokens);
  v.min_k = score_min_k(record.tokens, k_percent);
  v.min_k_pp = score_min_k_pp(record.tokens, k_percent);
  v.zlib_ratio = score_zlib_ratio(v.loss, record.text, record.byte_len);
  if (ref != nullptr && ref->model_id != record.model_id) {
    v.ref_ratio = score_ref_ratio(v.loss, score_loss(ref->tokens));
  }
  return v;
}

ScoreBatch score_corpus(const std::vector<PromptRecord>& records,
                        std::string_view ref_model_id, double k_percent,
                        unsigned jobs) {
  check_k(k_percent);
  std::unordered_map<std::string_view, const PromptRecord*> refs;
  for (const auto& r : records) {
    if (r.model_id == ref_model_id) refs.emplace(r.prompt_id, &r);
  }

  std::vector<std::optional<ScoreRow>> slots(records.size());
  std::vector<std::string> slot_errors(records.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < records.size(); i += stride) {
      const PromptRecord& r = records[i];
      auto it = refs.find(r.prompt_id);
      const PromptRecord* ref = it == refs.end() ? nullptr : it->second;
      try {
        slots[i] = ScoreRow{r.prompt_id, r.model_id, r.ticker, r.date,
                            score_all(r, ref, k_percent)};
      } catch (const Error& e) {
        slot_errors[i] = "(" + r.prompt_id + ", " + r.model_id + "): " + e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, jobs);
  if (n_threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
    for (auto& th : pool) th.join();
  }

  ScoreBatch batch;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i]) batch.rows.push_back(std::move(*slots[i]));
    if (!slot_errors[i].empty()) batch.errors.push_back(std::move(slot_errors[i]));
  }
  std::sort(batch.rows.begin(), batch.rows.end(),
            [](const ScoreRow& a, const ScoreRow& b) {
              return std::tie(a.prompt_id, a.model_id) <
                     std::tie(b.prompt_id, b.model_id);
            });
  if (refs.empty()) {
    batch.warnings.push_back("reference model '" + std::string(ref_model_id) +
                             "' has no records; ref_ratio is null for every row");
  } else {
    std::size_t unpaired = 0;
    for (const auto& row : batch.rows) {
      if (!row.scores.ref_ratio && row.model_id != ref_model_id) ++unpaired;
    }
    if (unpaired > 0) {
      batch.warnings.push_back(std::to_string(unpaired) +
                               " rows have no reference-model record");
    }
  }
  return batch;
}

void write_scores(std::ostream& out, const std::vector<ScoreRow>& rows) {
  for (const auto& row : rows) {
    nlohmann::ordered_json obj;
    obj["prompt_id"] = row.prompt_id;
    obj["model_id"] = row.model_id;
    obj["ticker"] = row.ticker;
    obj["date"] = row.date.iso();
    obj["loss"] = row.scores.loss;
    obj["min_k"] = row.scores.min_k;
    obj["min_k_pp"] = row.scores.min_k_pp;
    obj["zlib_ratio"] = row.scores.zlib_ratio;
    if (row.scores.ref_ratio) {
      obj["ref_ratio"] = *row.scores.ref_ratio;
    } else {
      obj["ref_ratio"] = nullptr;
    }
    obj["k_percent"] = row.scores.k_percent;
    out << obj.dump() << '\n';
  }
}

std::vector<ScoreRow> read_scores(std::istream& in) {
  std::vector<ScoreRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      ScoreRow row;
      row.prompt_id = obj.at("prompt_id").get<std::string>();
      row.model_id = obj.at("model_id").get<std::string>();
      row.ticker = obj.at("ticker").get<std::string>();
      row.date = Date::parse(obj.at("date").get<std::string>());
      row.scores.loss = obj.at("loss").get<double>();
      row.scores.min_k = obj.at("min_k").get<double>();
      row.scores.min_k_pp = obj.at("min_k_pp").get<double>();
      row.scores.zlib_ratio = obj.at("zlib_ratio").get<double>();
      const auto& ref = obj.at("ref_ratio");
      if (!ref.is_null()) row.scores.ref_ratio = ref.get<double>();
      row.scores.k_percent = obj.at("k_percent").get<double>();
      rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("score file: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(std::string("score file: ") + e.what(), line_no);
    }
  }
  return rows;
}

}  // namespace memfilter::mia
