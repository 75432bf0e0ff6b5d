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

#ifndef MEMFILTER_MCS_COMPOSITE_HPP_
#define MEMFILTER_MCS_COMPOSITE_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memfilter/core/date.hpp"
#include "memfilter/core/types.hpp"
#include "memfilter/mia/mia.hpp"

namespace memfilter::mcs {

inline constexpr std::size_t kNumMia = 5;
inline constexpr std::size_t kNumFeatures = kNumMia + 1;  // + tau
inline constexpr double kTemporalScaleDays = 1825.0;
inline constexpr double kDefaultLambda = 1e-3;

// Order of the MIA columns in every feature vector and weight array.
inline constexpr std::array<const char*, kNumMia> kMethodNames = {
    "loss", "min_k", "min_k_pp", "zlib_ratio", "ref_ratio"};

// clamp((cutoff - prompt) / 1825 days, -1, 1). Positive before the cutoff.
double temporal_proximity(Date prompt_date, Date cutoff_date);

// Unstandardized inputs for one (prompt, model) pair.
struct RawFeatures {
  std::array<double, kNumMia> phi{};  // phi[4] ignored when !has_ref
  bool has_ref = true;
  double tau = 0.0;
};

RawFeatures make_features(const mia::MiaScoreVector& scores, Date prompt_date,
                          const ModelSpec& spec);

// Standardized view used by the model: phi has zero mean / unit variance
// over the training set; tau is left raw.
struct McsFeatureVector {
  std::array<double, kNumMia> phi{};
  double tau = 0.0;
};

enum class VariantKind { kFull, kMiaOnly, kTemporalOnly, kSingleMethod };

struct Variant {
  VariantKind kind = VariantKind::kFull;
  std::size_t method = 0;  // column index for kSingleMethod

  // Which of the six weights may be nonzero.
  std::array<bool, kNumFeatures> active_mask() const;
  std::string name() const;
  // "full", "mia_only", "temporal_only" or "single_method:<method>".
  static Variant parse(const std::string& name);
  friend bool operator==(const Variant&, const Variant&) = default;
};

struct McsModel {
  std::array<double, kNumFeatures> weights{};  // 5 MIA columns, then tau
  double bias = 0.0;
  std::array<double, kNumMia> feature_means{};
  std::array<double, kNumMia> feature_stds{1, 1, 1, 1, 1};
  double lambda = kDefaultLambda;
  Variant variant;
  // Diagnostics from fitting; not part of the prediction.
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
};

McsFeatureVector standardize(const McsModel& model, const RawFeatures& raw);

// Mean logistic loss + (lambda / 2) * |w|^2 over a column-major design.
// Parameters are packed as (w_0..w_5, b); masked columns are held at zero.
class LogisticObjective {
 public:
  LogisticObjective(std::vector<std::array<double, kNumFeatures>> rows,
                    std::vector<bool> labels, double lambda,
                    std::array<bool, kNumFeatures> mask);

  using Params = std::array<double, kNumFeatures + 1>;

  double value(const Params& p) const;
  // Returns the value as well; gradient entries for masked columns are 0.
  double gradient(const Params& p, Params* grad) const;
  std::size_t size() const { return labels_.size(); }

 private:
  void margins(const Params& p, std::vector<double>* out) const;

  std::array<std::vector<double>, kNumFeatures> columns_;
  std::vector<double> y_;  // 0 / 1
  std::vector<bool> labels_;
  double lambda_;
  std::array<bool, kNumFeatures> mask_;
};

struct FitOptions {
  double lambda = kDefaultLambda;
  Variant variant;
  int max_iterations = 10000;
  double gradient_tolerance = 1e-8;
  // Starting point; defaults to w = 0, b = logit(member fraction).
  std::optional<LogisticObjective::Params> initial;
};

// Full-batch gradient descent with Armijo backtracking (c = 1e-4, step
// halving). Throws InsufficientDataError unless both labels have >= 2
// examples, ValidationError on non-finite features.
McsModel fit_mcs(std::span<const RawFeatures> features,
                 const std::vector<bool>& labels, const FitOptions& options);

// sigmoid(w . x + b), strictly inside (0, 1).
double mcs_predict(const McsModel& model, const RawFeatures& raw);
double mcs_logit(const McsModel& model, const RawFeatures& raw);

struct Separation {
  double is_mean = 0.0;
  double oos_mean = 0.0;
  double cohens_d = 0.0;  // (IS - OOS) / pooled SD
  double ks_p = 1.0;
  double t_p = 1.0;
  double auc = 0.5;       // P(IS score > OOS score)
};

Separation separation_report(std::span<const double> scores,
                             const std::vector<bool>& labels);

// Model file: one JSON object. `fingerprint` identifies the training input.
void write_model(std::ostream& out, const McsModel& model,
                 const std::string& fingerprint);
McsModel read_model(std::istream& in);

// One line of the MCS output file.
struct McsRow {
  std::string prompt_id;
  std::string model_id;
  std::string ticker;
  Date date;
  double mcs = 0.5;
  double tau = 0.0;
};

void write_mcs(std::ostream& out, const std::vector<McsRow>& rows);
std::vector<McsRow> read_mcs(std::istream& in);

}  // namespace memfilter::mcs

#endif  // MEMFILTER_MCS_COMPOSITE_HPP_
