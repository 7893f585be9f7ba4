// Copyright 2026 The steplearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <cstring>

#include "kernels/tables.hpp"

namespace steplearn::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(STEPLEARN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &detail::kScalarTable;
    case Isa::kAvx2:
      return cpu_has_avx2() ? avx2_table() : nullptr;
    case Isa::kNeon:
      return neon_table();
  }
  return nullptr;
}

Isa detect() {
  if (const char* env = std::getenv("STEPLEARN_SIMD");
      env != nullptr && std::strcmp(env, "scalar") == 0) {
    return Isa::kScalar;
  }
  if (table_for(Isa::kAvx2) != nullptr) return Isa::kAvx2;
  if (table_for(Isa::kNeon) != nullptr) return Isa::kNeon;
  return Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const KernelTable& active() { return *table_for(current().load()); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

Isa active_isa() { return current().load(); }

bool isa_available(Isa isa) { return table_for(isa) != nullptr; }

bool force_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  current().store(isa);
  return true;
}

const KernelTable& scalar_table() { return detail::kScalarTable; }

const KernelTable* avx2_table() {
#if defined(STEPLEARN_HAVE_AVX2)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(STEPLEARN_HAVE_NEON)
  return &detail::kNeonTable;
#else
  return nullptr;
#endif
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void affine(std::span<const double> w, std::span<const double> bias,
            std::span<const double> x, std::span<double> y) {
  assert(w.size() == y.size() * x.size() && bias.size() == y.size());
  active().affine(w.data(), bias.data(), x.data(), y.data(), y.size(),
                  x.size());
}

void affine_transpose_accumulate(std::span<const double> w,
                                 std::span<const double> gy,
                                 std::span<double> gx) {
  assert(w.size() == gy.size() * gx.size());
  active().affine_transpose_accumulate(w.data(), gy.data(), gx.data(),
                                       gy.size(), gx.size());
}

void rank1_update(double alpha, std::span<const double> gy,
                  std::span<const double> x, std::span<double> w) {
  assert(w.size() == gy.size() * x.size());
  active().rank1_update(alpha, gy.data(), x.data(), w.data(), gy.size(),
                        x.size());
}

}  // namespace steplearn::kernels
