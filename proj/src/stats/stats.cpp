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

#include "memfilter/stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "memfilter/core/error.hpp"
#include "memfilter/simd/kernels.hpp"
#include "memfilter/stats/rng.hpp"

namespace memfilter::stats {
namespace {

void require_size(std::span<const double> x, std::size_t n, const char* what) {
  if (x.size() < n) {
    throw InsufficientDataError(std::string(what) + ": need at least " +
                                std::to_string(n) + " samples, got " +
                                std::to_string(x.size()));
  }
}

std::vector<double> sorted_copy(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Average ranks (1-based), ties share the mean rank.
std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double mean(std::span<const double> x) {
  if (x.empty()) throw InsufficientDataError("mean of empty sample");
  return simd::sum(x) / static_cast<double>(x.size());
}

double sample_variance(std::span<const double> x) {
  require_size(x, 2, "sample_variance");
  // A constant sample has zero spread even when its mean is inexact.
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) {
    return 0.0;
  }
  return simd::sum_squared_deviation(x, mean(x)) /
         static_cast<double>(x.size() - 1);
}

double sample_stddev(std::span<const double> x) {
  return std::sqrt(sample_variance(x));
}

double percentile_sorted(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw InsufficientDataError("percentile of empty sample");
  if (!(pct >= 0.0 && pct <= 100.0)) {
    throw DomainError("percentile must be in [0, 100]");
  }
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> x, double pct) {
  const auto v = sorted_copy(x);
  return percentile_sorted(v, pct);
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "cohens_d");
  require_size(b, 2, "cohens_d");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  const double pooled_var =
      ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) /
      (na + nb - 2.0);
  if (pooled_var == 0.0) {
    if (diff == 0.0) return 0.0;
    throw DomainError("cohens_d: zero pooled SD with unequal means");
  }
  return diff / std::sqrt(pooled_var);
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  require_size(a, 1, "ks_statistic");
  require_size(b, 1, "ks_statistic");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na -
                              static_cast<double>(j) / nb));
  }
  return d;
}

double ks_asymptotic_p(double d, std::size_t n_a, std::size_t n_b) {
  if (d <= 0.0) return 1.0;
  const double ne = static_cast<double>(n_a) * static_cast<double>(n_b) /
                    static_cast<double>(n_a + n_b);
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  const double l2 = lambda * lambda;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 1000; ++j) {
    const double term = 2.0 * sign * std::exp(-2.0 * j * j * l2);
    sum += term;
    if (std::fabs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double ks_exact_p(double d, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) throw InsufficientDataError("ks_exact_p: empty sample");
  if (d <= 0.0) return 1.0;
  const auto n = static_cast<std::int64_t>(n_a);
  const auto m = static_cast<std::int64_t>(n_b);
  // Every attainable D is an integer multiple of 1 / (n m).
  const auto bound = static_cast<std::int64_t>(std::llround(d * n * m));
  auto inside = [&](std::int64_t i, std::int64_t j) {
    return std::llabs(i * m - j * n) < bound;
  };
  // Paths that never reach |F_a - F_b| >= D, scaled by 1 / C(n + m, n)
  // incrementally so the counts stay in range.
  std::vector<double> row(static_cast<std::size_t>(m + 1), 0.0);
  for (std::int64_t j = 0; j <= m; ++j) {
    row[j] = (j == 0 || (inside(0, j) && row[j - 1] > 0.0)) ? 1.0 : 0.0;
  }
  for (std::int64_t i = 1; i <= n; ++i) {
    // Multiply by i / (i + j) at cell (i, j) and keep the prefix scaled the
    // same way: row(i, j) holds count(i, j) / C(i + j, i).
    std::vector<double> next(static_cast<std::size_t>(m + 1), 0.0);
    for (std::int64_t j = 0; j <= m; ++j) {
      if (!inside(i, j)) continue;
      const double up = row[j] * static_cast<double>(i) / static_cast<double>(i + j);
      const double left =
          j > 0 ? next[j - 1] * static_cast<double>(j) / static_cast<double>(i + j)
                : 0.0;
      next[j] = up + left;
    }
    row.swap(next);
  }
  return std::clamp(1.0 - row[m], 0.0, 1.0);
}

KsResult ks_test(std::span<const double> a, std::span<const double> b,
                 KsMethod method) {
  require_size(a, 2, "ks_test");
  require_size(b, 2, "ks_test");
  KsResult r;
  r.statistic = ks_statistic(a, b);
  const auto cells = static_cast<std::int64_t>(a.size()) *
                     static_cast<std::int64_t>(b.size());
  const bool exact = method == KsMethod::kExact ||
                     (method == KsMethod::kAuto && cells <= kKsExactLimit);
  r.p_value = exact ? ks_exact_p(r.statistic, a.size(), b.size())
                    : ks_asymptotic_p(r.statistic, a.size(), b.size());
  return r;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("incomplete_beta: a, b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw DomainError("student_t_cdf: df must be > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "welch_t");
  require_size(b, 2, "welch_t");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_variance(a) / na;
  const double vb = sample_variance(b) / nb;
  const double diff = mean(a) - mean(b);
  WelchResult r;
  if (va + vb == 0.0) {
    if (diff == 0.0) return r;
    r.t_stat = diff > 0 ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity();
    r.df = na + nb - 2.0;
    r.p_two_sided = 0.0;
    return r;
  }
  const double se2 = va + vb;
  r.t_stat = diff / std::sqrt(se2);
  r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  r.p_two_sided = incomplete_beta(0.5 * r.df, 0.5,
                                  r.df / (r.df + r.t_stat * r.t_stat));
  return r;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PairingError("pearson: length mismatch");
  require_size(a, 2, "pearson");
  const double ma = mean(a);
  const double mb = mean(b);
  std::vector<double> da(a.size()), db(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    da[i] = a[i] - ma;
    db[i] = b[i] - mb;
  }
  const double saa = simd::dot(da, da);
  const double sbb = simd::dot(db, db);
  if (saa == 0.0 || sbb == 0.0) {
    throw DomainError("correlation undefined for a zero-variance series");
  }
  return std::clamp(simd::dot(da, db) / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PairingError("spearman: length mismatch");
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(ra, rb);
}

double autocorr_lag1(std::span<const double> series) {
  require_size(series, 3, "autocorr_lag1");
  return pearson(series.first(series.size() - 1), series.subspan(1));
}

double auc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw PairingError("auc: length mismatch");
  const auto r = ranks(scores);
  double rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (labels[i]) {
      rank_sum += r[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(r.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw InsufficientDataError("auc: need both positive and negative labels");
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::optional<double> annualized_sharpe(std::span<const double> daily,
                                        double periods_per_year) {
  require_size(daily, 2, "annualized_sharpe");
  double growth = 1.0;
  for (double r : daily) growth *= 1.0 + r;
  const double vol = sample_stddev(daily) * std::sqrt(periods_per_year);
  if (vol == 0.0) return std::nullopt;
  const double ann = std::pow(growth, periods_per_year /
                                          static_cast<double>(daily.size())) - 1.0;
  return ann / vol;
}

namespace {

struct Resampler {
  std::span<const double> a;
  std::span<const double> b;
  std::uint64_t seed;

  template <typename Stat>
  std::vector<double> run(std::int64_t resamples, unsigned jobs, Stat stat) const {
    std::vector<double> out(static_cast<std::size_t>(resamples));
    auto work = [&](std::size_t begin, std::size_t end) {
      std::vector<double> ra(a.size()), rb(b.size());
      for (std::size_t k = begin; k < end; ++k) {
        auto g = Xoshiro256::stream(seed, k);
        for (std::size_t i = 0; i < a.size(); ++i) {
          const auto idx = uniform_index(g, a.size());
          ra[i] = a[idx];
          rb[i] = b[idx];
        }
        out[k] = stat(ra, rb);
      }
    };
    const unsigned n_threads = std::max(1u, jobs);
    if (n_threads == 1) {
      work(0, out.size());
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (out.size() + n_threads - 1) / n_threads;
      for (unsigned t = 0; t < n_threads; ++t) {
        const std::size_t lo = std::min(out.size(), t * chunk);
        const std::size_t hi = std::min(out.size(), lo + chunk);
        pool.emplace_back(work, lo, hi);
      }
      for (auto& th : pool) th.join();
    }
    return out;
  }
};

BootstrapResult summarize_bootstrap(double point, std::vector<double> diffs,
                                    std::uint64_t seed) {
  BootstrapResult r;
  r.point_estimate = point;
  r.resamples = static_cast<std::int64_t>(diffs.size());
  r.seed = seed;
  std::sort(diffs.begin(), diffs.end());
  r.ci_low = percentile_sorted(diffs, 2.5);
  r.ci_high = percentile_sorted(diffs, 97.5);
  const double n = static_cast<double>(diffs.size());
  const auto le = std::upper_bound(diffs.begin(), diffs.end(), 0.0) - diffs.begin();
  const auto lt = std::lower_bound(diffs.begin(), diffs.end(), 0.0) - diffs.begin();
  const double frac_le = static_cast<double>(le) / n;
  const double frac_ge = static_cast<double>(diffs.size() - lt) / n;
  r.p_value_one_sided = frac_le;
  r.p_value_two_sided = std::min(1.0, 2.0 * std::min(frac_le, frac_ge));
  return r;
}

void check_pair(std::span<const double> a, std::span<const double> b,
                std::int64_t resamples) {
  if (a.size() != b.size()) throw PairingError("bootstrap: length mismatch");
  require_size(a, 10, "bootstrap");
  if (resamples < 1) throw DomainError("bootstrap: resamples must be >= 1");
}

}  // namespace

BootstrapResult paired_bootstrap_sharpe_diff(std::span<const double> a,
                                             std::span<const double> b,
                                             std::int64_t resamples,
                                             std::uint64_t seed,
                                             unsigned jobs) {
  check_pair(a, b, resamples);
  auto sharpe_diff = [](std::span<const double> x, std::span<const double> y) {
    return annualized_sharpe(x).value_or(0.0) - annualized_sharpe(y).value_or(0.0);
  };
  Resampler rs{a, b, seed};
  return summarize_bootstrap(sharpe_diff(a, b),
                             rs.run(resamples, jobs, sharpe_diff), seed);
}

BootstrapResult paired_bootstrap_mean_diff(std::span<const double> a,
                                           std::span<const double> b,
                                           std::int64_t resamples,
                                           std::uint64_t seed) {
  check_pair(a, b, resamples);
  auto mean_diff = [](std::span<const double> x, std::span<const double> y) {
    return mean(x) - mean(y);
  };
  Resampler rs{a, b, seed};
  return summarize_bootstrap(mean_diff(a, b), rs.run(resamples, 1, mean_diff),
                             seed);
}

std::vector<QuintileRow> quintile_accuracy(std::span<const QuintileInput> rows) {
  std::vector<const QuintileInput*> eligible;
  std::vector<double> pooled;
  for (const auto& r : rows) {
    if (r.alpha == 0 || !std::isfinite(r.next_return)) continue;
    eligible.push_back(&r);
    pooled.push_back(r.mcs);
  }
  std::vector<QuintileRow> out(5);
  for (int q = 0; q < 5; ++q) out[q].quintile = q + 1;
  if (eligible.empty()) return out;

  std::sort(pooled.begin(), pooled.end());
  const double bounds[4] = {
      percentile_sorted(pooled, 20.0), percentile_sorted(pooled, 40.0),
      percentile_sorted(pooled, 60.0), percentile_sorted(pooled, 80.0)};
  std::size_t hits[5][2] = {};
  std::size_t counts[5][2] = {};
  for (const auto* r : eligible) {
    int q = 0;
    while (q < 4 && r->mcs > bounds[q]) ++q;
    const int g = r->is_member ? 0 : 1;
    ++counts[q][g];
    const int realized = r->next_return > 0.0 ? 1 : (r->next_return < 0.0 ? -1 : 0);
    if (realized == (r->alpha > 0 ? 1 : -1)) ++hits[q][g];
  }
  for (int q = 0; q < 5; ++q) {
    out[q].is_count = counts[q][0];
    out[q].oos_count = counts[q][1];
    if (counts[q][0] >= kMinQuintileCell) {
      out[q].is_accuracy = static_cast<double>(hits[q][0]) / counts[q][0];
    }
    if (counts[q][1] >= kMinQuintileCell) {
      out[q].oos_accuracy = static_cast<double>(hits[q][1]) / counts[q][1];
    }
  }
  return out;
}

}  // namespace memfilter::stats
