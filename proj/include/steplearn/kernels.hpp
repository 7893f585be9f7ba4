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

// Dense double-precision kernels behind the MLP, the Shapley sampler and the
// dense LU kernel. Each kernel has a scalar reference implementation and, where
// the target supports it, an AVX2/FMA or NEON variant. The variant is picked
// once at startup from CPUID; STEPLEARN_SIMD=scalar forces the reference path.

#pragma once

#include <span>
#include <string_view>

namespace steplearn::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Overrides dispatch (tests and benchmarks). Returns false if `isa` is not
/// available on this machine, in which case dispatch is unchanged.
bool force_isa(Isa isa);

/// True if `isa` can run on this CPU.
bool isa_available(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = W x + bias, W row-major with y.size() rows and x.size() columns.
void affine(std::span<const double> w, std::span<const double> bias,
            std::span<const double> x, std::span<double> y);

/// gx += W^T gy, W row-major with gy.size() rows and gx.size() columns.
void affine_transpose_accumulate(std::span<const double> w,
                                 std::span<const double> gy,
                                 std::span<double> gx);

/// W += alpha * gy x^T
void rank1_update(double alpha, std::span<const double> gy,
                  std::span<const double> x, std::span<double> w);

/// Per-ISA tables, exposed for equivalence tests.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*affine)(const double*, const double*, const double*, double*,
                 std::size_t rows, std::size_t cols);
  void (*affine_transpose_accumulate)(const double*, const double*, double*,
                                      std::size_t rows, std::size_t cols);
  void (*rank1_update)(double, const double*, const double*, double*,
                       std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_table();
/// nullptr when the variant was not compiled in.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace steplearn::kernels
