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

#ifndef MEMFILTER_SIMD_KERNELS_HPP_
#define MEMFILTER_SIMD_KERNELS_HPP_

#include <span>
#include <string_view>

namespace memfilter::simd {

// Instruction-set level of the inner-loop kernels. The best supported level
// is chosen on first use; MEMFILTER_ISA=scalar|avx2 in the environment or
// set_isa() override it.
enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
// Throws ConfigError if the host (or the build) lacks `isa`.
void set_isa(Isa isa);

// RAII override, for tests that compare levels.
class ScopedIsa {
 public:
  explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_isa(isa); }
  ~ScopedIsa() { set_isa(previous_); }
  ScopedIsa(const ScopedIsa&) = delete;
  ScopedIsa& operator=(const ScopedIsa&) = delete;

 private:
  Isa previous_;
};

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
// sum_i (x_i - center)^2
double sum_squared_deviation(std::span<const double> x, double center);
// out_i = (logp_i - mu_i) / sigma_i
void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out);
// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);

// Per-level entry points, exposed for equivalence tests.
namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_squared_deviation(std::span<const double> x, double center);
void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
}  // namespace scalar

#if defined(MEMFILTER_HAVE_AVX2)
namespace avx2 {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double sum_squared_deviation(std::span<const double> x, double center);
void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out);
void axpy(double a, std::span<const double> x, std::span<double> y);
}  // namespace avx2
#endif

}  // namespace memfilter::simd

#endif  // MEMFILTER_SIMD_KERNELS_HPP_
