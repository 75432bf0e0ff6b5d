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

#include <atomic>
#include <cstdlib>
#include <string>

#include "memfilter/core/error.hpp"
#include "memfilter/simd/kernels.hpp"

namespace memfilter::simd {
namespace {

struct KernelTable {
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*sum_squared_deviation)(std::span<const double>, double);
  void (*zscore)(std::span<const double>, std::span<const double>,
                 std::span<const double>, std::span<double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
};

constexpr KernelTable kScalarTable{&scalar::sum, &scalar::dot,
                                   &scalar::sum_squared_deviation,
                                   &scalar::zscore, &scalar::axpy};
#if defined(MEMFILTER_HAVE_AVX2)
constexpr KernelTable kAvx2Table{&avx2::sum, &avx2::dot,
                                 &avx2::sum_squared_deviation, &avx2::zscore,
                                 &avx2::axpy};
#endif

bool host_has_avx2() {
#if defined(MEMFILTER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
#if defined(MEMFILTER_HAVE_AVX2)
  if (isa == Isa::kAvx2) return &kAvx2Table;
#endif
  return &kScalarTable;
}

Isa detect_default() {
  if (const char* env = std::getenv("MEMFILTER_ISA")) {
    const std::string name(env);
    if (name == "scalar") return Isa::kScalar;
    if (name == "avx2" && host_has_avx2()) return Isa::kAvx2;
  }
  return host_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

struct State {
  std::atomic<Isa> isa{detect_default()};
  std::atomic<const KernelTable*> table{table_for(isa.load())};
};

State& state() {
  static State s;
  return s;
}

inline const KernelTable& active() {
  return *state().table.load(std::memory_order_relaxed);
}

}  // namespace

std::string_view isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) {
  return isa == Isa::kScalar || host_has_avx2();
}

Isa active_isa() { return state().isa.load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ConfigError("instruction set '" + std::string(isa_name(isa)) +
                      "' is not available on this host");
  }
  state().isa.store(isa);
  state().table.store(table_for(isa));
}

double sum(std::span<const double> x) { return active().sum(x); }
double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x, y);
}
double sum_squared_deviation(std::span<const double> x, double center) {
  return active().sum_squared_deviation(x, center);
}
void zscore(std::span<const double> logp, std::span<const double> mu,
            std::span<const double> sigma, std::span<double> out) {
  active().zscore(logp, mu, sigma, out);
}
void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x, y);
}

}  // namespace memfilter::simd
