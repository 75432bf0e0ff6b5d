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

#ifndef MEMFILTER_STATS_STATS_HPP_
#define MEMFILTER_STATS_STATS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace memfilter::stats {

double mean(std::span<const double> x);
// Unbiased (n - 1) variance. Requires n >= 2.
double sample_variance(std::span<const double> x);
double sample_stddev(std::span<const double> x);

// Linear-interpolation percentile (pct in [0, 100]) of an unsorted sample.
double percentile(std::span<const double> x, double pct);
// Same, over data already sorted ascending.
double percentile_sorted(std::span<const double> sorted, double pct);

// (mean(a) - mean(b)) / pooled SD. Throws DomainError when the pooled SD is
// zero but the means differ.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

enum class KsMethod {
  kAuto,        // exact when n_a * n_b <= kKsExactLimit, else asymptotic
  kAsymptotic,  // Kolmogorov series with the Stephens small-sample factor
  kExact,       // lattice-path count of the permutation distribution
};

inline constexpr std::int64_t kKsExactLimit = 10000;

double ks_statistic(std::span<const double> a, std::span<const double> b);
double ks_asymptotic_p(double d, std::size_t n_a, std::size_t n_b);
double ks_exact_p(double d, std::size_t n_a, std::size_t n_b);
KsResult ks_test(std::span<const double> a, std::span<const double> b,
                 KsMethod method = KsMethod::kAuto);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
// P(T <= t) for Student's t with `df` degrees of freedom (df may be real).
double student_t_cdf(double t, double df);

struct WelchResult {
  double t_stat = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
};

WelchResult welch_t(std::span<const double> a, std::span<const double> b);

double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);
double autocorr_lag1(std::span<const double> series);

// Mann-Whitney AUC: P(score of a positive > score of a negative), ties
// counted as one half.
double auc(std::span<const double> scores, const std::vector<bool>& labels);

// Annualized Sharpe: geometric annual return over annualized sample vol.
// Empty when the vol is zero (callers decide what that means).
std::optional<double> annualized_sharpe(std::span<const double> daily,
                                        double periods_per_year = 252.0);

struct BootstrapResult {
  double point_estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value_two_sided = 1.0;
  double p_value_one_sided = 1.0;
  std::int64_t resamples = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const BootstrapResult&,
                         const BootstrapResult&) = default;
};

// Joint day-index resampling of two equal-length daily series; statistic
// is Sharpe(a) - Sharpe(b) (zero-vol Sharpe counts as 0). 95% percentile
// CI. p_two_sided = min(1, 2 * min(P[diff <= 0], P[diff >= 0])) and
// p_one_sided = P[diff <= 0], both over the resampled differences.
// Resample i draws from Xoshiro256::stream(seed, i).
BootstrapResult paired_bootstrap_sharpe_diff(std::span<const double> a,
                                             std::span<const double> b,
                                             std::int64_t resamples,
                                             std::uint64_t seed,
                                             unsigned jobs = 1);

// Same resampling scheme for the mean of a - b.
BootstrapResult paired_bootstrap_mean_diff(std::span<const double> a,
                                           std::span<const double> b,
                                           std::int64_t resamples,
                                           std::uint64_t seed);

struct QuintileInput {
  double mcs = 0.0;
  int alpha = 0;
  double next_return = 0.0;
  bool is_member = false;
};

struct QuintileRow {
  int quintile = 0;  // 1..5
  std::optional<double> is_accuracy;
  std::optional<double> oos_accuracy;
  std::size_t is_count = 0;
  std::size_t oos_count = 0;
};

inline constexpr std::size_t kMinQuintileCell = 5;

// Directional hit rate per contamination quintile. Neutral signals are
// excluded; boundaries are the pooled 20/40/60/80th MCS percentiles; cells
// with fewer than kMinQuintileCell records report no accuracy.
std::vector<QuintileRow> quintile_accuracy(std::span<const QuintileInput> rows);

}  // namespace memfilter::stats

#endif  // MEMFILTER_STATS_STATS_HPP_
