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

#ifndef MEMFILTER_CMMD_CMMD_HPP_
#define MEMFILTER_CMMD_CMMD_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memfilter/core/date.hpp"
#include "memfilter/core/types.hpp"
#include "memfilter/mcs/composite.hpp"

namespace memfilter::cmmd {

// Median split of the models that issued a signal for one (ticker, date).
struct CmmdPartition {
  std::string ticker;
  Date date;
  std::vector<std::string> clean_ids;    // sorted
  std::vector<std::string> tainted_ids;  // sorted
  double median_mcs = 0.0;
  double alpha_cmmd = 0.0;      // mean alpha over the clean set
  std::optional<double> delta;  // tainted mean - clean mean; empty if no T

  std::optional<double> tainted_alpha() const {
    if (!delta) return std::nullopt;
    return alpha_cmmd + *delta;
  }
  friend bool operator==(const CmmdPartition&, const CmmdPartition&) = default;
};

// Lower median (the ceil(K/2)-th smallest value) so the split point is a
// realized score. Models with mcs <= median are clean; ties go clean.
// Throws PairingError if the key sets differ, InsufficientDataError if K < 2.
CmmdPartition partition(const std::map<std::string, double>& scores,
                        const std::map<std::string, int>& signals);

// One model's contribution to a stock-date.
struct SignalVote {
  std::string model_id;
  std::string ticker;
  Date date;
  double mcs = 0.0;
  int alpha = 0;
};

struct JoinResult {
  std::vector<SignalVote> votes;
  std::size_t missing_mcs = 0;  // signals with no MCS row for their key
};

// Attaches an MCS to each signal: the mean MCS over that model's prompts
// for the signal's (ticker, date).
JoinResult join_signals(std::span<const SignalRecord> signals,
                        std::span<const mcs::McsRow> mcs_rows);

struct SeriesResult {
  std::vector<CmmdPartition> partitions;  // sorted by (ticker, date)
  std::size_t skipped = 0;                // stock-dates with < 2 models
  std::vector<std::string> errors;
};

SeriesResult cmmd_signal_series(std::span<const SignalVote> votes);

struct DisagreementStats {
  std::size_t count_gt_half = 0;
  double fraction = 0.0;
  std::size_t with_delta = 0;  // denominator
};

// Counts partitions with |delta| > 0.5; partitions without a tainted set
// are excluded from both counts.
DisagreementStats disagreement_stats(std::span<const CmmdPartition> partitions);

void write_partitions(std::ostream& out,
                      const std::vector<CmmdPartition>& partitions);
std::vector<CmmdPartition> read_partitions(std::istream& in);

}  // namespace memfilter::cmmd

#endif  // MEMFILTER_CMMD_CMMD_HPP_
