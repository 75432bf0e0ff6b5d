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

// Reference kernels. Plain left-to-right loops; every other level is tested
// against these.

#include "memfilter/simd/kernels.hpp"

namespace memfilter::simd::scalar {

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double sum_squared_deviation(std::span<const double> x, double center) {
  double acc = 0.0;
  for (double v : x) {
    const double d = v - center;
    acc += d * d;
  }
  return acc;
}

void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out) {
  for (std::size_t i = 0; i < logp.size(); ++i) {
    out[i] = (logp[i] - mu[i]) / sigma[i];
  }
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace memfilter::simd::scalar
