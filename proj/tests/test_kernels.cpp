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

#include <doctest.h>

#include <random>
#include <vector>

#include "steplearn/kernels.hpp"

using namespace steplearn::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(b[i])));
  }
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const auto& s = scalar_table();
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  CHECK(s.dot(a, b, 3) == 12.0);
  const double w[] = {1, 0, 2, 0, 1, -1};  // 2x3
  const double bias[] = {0.5, -0.5};
  double y[2];
  s.affine(w, bias, a, y, 2, 3);
  CHECK(y[0] == 7.5);
  CHECK(y[1] == -1.5);
}

TEST_CASE("SIMD variants match the scalar reference") {
  std::vector<const KernelTable*> variants;
  if (const KernelTable* t = avx2_table(); t && isa_available(Isa::kAvx2)) variants.push_back(t);
  if (const KernelTable* t = neon_table(); t && isa_available(Isa::kNeon)) variants.push_back(t);
  if (variants.empty()) {
    MESSAGE("no SIMD variant available on this host");
    return;
  }
  const auto& ref = scalar_table();
  std::mt19937_64 rng(17);
  for (const KernelTable* t : variants) {
    for (std::size_t rows : {1u, 3u, 4u, 7u, 33u}) {
      for (std::size_t cols : {1u, 2u, 5u, 8u, 13u, 64u, 67u}) {
        const auto w = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto bias = random_vec(rng, rows);
        const auto gy = random_vec(rng, rows);

        CHECK(t->dot(x.data(), x.data(), cols) ==
              doctest::Approx(ref.dot(x.data(), x.data(), cols)).epsilon(1e-13));

        std::vector<double> y1(rows), y2(rows);
        ref.affine(w.data(), bias.data(), x.data(), y1.data(), rows, cols);
        t->affine(w.data(), bias.data(), x.data(), y2.data(), rows, cols);
        check_close(y2, y1, 1e-13);

        std::vector<double> g1 = x, g2 = x;
        ref.affine_transpose_accumulate(w.data(), gy.data(), g1.data(), rows, cols);
        t->affine_transpose_accumulate(w.data(), gy.data(), g2.data(), rows, cols);
        check_close(g2, g1, 1e-13);

        std::vector<double> w1 = w, w2 = w;
        ref.rank1_update(0.3, gy.data(), x.data(), w1.data(), rows, cols);
        t->rank1_update(0.3, gy.data(), x.data(), w2.data(), rows, cols);
        check_close(w2, w1, 1e-13);

        std::vector<double> a1 = x, a2 = x;
        ref.axpy(-1.7, bias.data(), a1.data(), std::min(rows, cols));
        t->axpy(-1.7, bias.data(), a2.data(), std::min(rows, cols));
        check_close(a2, a1, 1e-15);
      }
    }
  }
}

TEST_CASE("runtime dispatch can be forced to scalar") {
  const Isa before = active_isa();
  CHECK(force_isa(Isa::kScalar));
  CHECK(active_isa() == Isa::kScalar);
  std::vector<double> a{1, 2, 3, 4, 5}, b{1, 1, 1, 1, 1};
  CHECK(dot(a, b) == 15.0);
  CHECK(force_isa(before));
  CHECK(isa_name(Isa::kAvx2) == "avx2");
}
