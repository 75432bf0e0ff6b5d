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

// AVX2 + FMA kernels. This file is compiled with -mavx2 -mfma and is only
// entered after a runtime CPU check.

#include <immintrin.h>

#include "memfilter/simd/kernels.hpp"

namespace memfilter::simd::avx2 {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double* p = x.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(p + i + 4));
  }
  if (i + 4 <= n) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(p + i));
    i += 4;
  }
  double acc = horizontal_sum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += p[i];
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  const double* py = y.data();
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i + 4),
                         _mm256_loadu_pd(py + i + 4), a1);
  }
  if (i + 4 <= n) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(px + i), _mm256_loadu_pd(py + i), a0);
    i += 4;
  }
  double acc = horizontal_sum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += px[i] * py[i];
  return acc;
}

double sum_squared_deviation(std::span<const double> x, double center) {
  const std::size_t n = x.size();
  const double* p = x.data();
  const __m256d c = _mm256_set1_pd(center);
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 4), c);
    a0 = _mm256_fmadd_pd(d0, d0, a0);
    a1 = _mm256_fmadd_pd(d1, d1, a1);
  }
  if (i + 4 <= n) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i), c);
    a0 = _mm256_fmadd_pd(d0, d0, a0);
    i += 4;
  }
  double acc = horizontal_sum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) {
    const double d = p[i] - center;
    acc += d * d;
  }
  return acc;
}

void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out) {
  const std::size_t n = logp.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d num = _mm256_sub_pd(_mm256_loadu_pd(logp.data() + i),
                                      _mm256_loadu_pd(mu.data() + i));
    _mm256_storeu_pd(out.data() + i,
                     _mm256_div_pd(num, _mm256_loadu_pd(sigma.data() + i)));
  }
  for (; i < n; ++i) out[i] = (logp[i] - mu[i]) / sigma[i];
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y.data() + i);
    _mm256_storeu_pd(y.data() + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace memfilter::simd::avx2
