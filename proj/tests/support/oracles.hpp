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

// Random instance generators and brute-force oracles shared by the unit
// tests and the acceptance suite.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "steplearn/milp.hpp"

namespace steplearn::testing {

/// Feasible bounded MILP: every row is satisfied by a hidden random point.
inline MilpProblem random_milp(std::mt19937_64& rng, std::size_t num_bin, std::size_t num_cont,
                               std::size_t num_rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> slack(0.0, 3.0);
  std::uniform_int_distribution<int> bit(0, 1);
  MilpProblem p;
  std::vector<double> x0;
  for (std::size_t j = 0; j < num_bin; ++j) {
    p.add_binary("y" + std::to_string(j), coef(rng));
    x0.push_back(bit(rng));
  }
  for (std::size_t j = 0; j < num_cont; ++j) {
    const double lo = std::uniform_real_distribution<double>(-4.0, 0.0)(rng);
    const double hi = lo + std::uniform_real_distribution<double>(0.5, 8.0)(rng);
    p.add_variable("x" + std::to_string(j), lo, hi, VarKind::kContinuous, coef(rng));
    x0.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
  }
  const std::size_t n = num_bin + num_cont;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t r = 0; r < num_rows; ++r) {
    std::vector<Term> terms;
    const std::size_t nnz = 2 + r % 4;
    std::vector<std::size_t> used;
    double lhs = 0.0;
    for (std::size_t k = 0; k < nnz && k < n; ++k) {
      std::size_t j = pick(rng);
      if (std::find(used.begin(), used.end(), j) != used.end()) continue;
      used.push_back(j);
      const double a = std::round(coef(rng) * 4.0) / 4.0;
      if (a == 0.0) continue;
      terms.push_back({j, a});
      lhs += a * x0[j];
    }
    const int kind = int(r % 7);
    if (kind == 6) {
      p.add_constraint("r" + std::to_string(r), terms, RowSense::kEq, lhs);
    } else if (kind % 2 == 0) {
      p.add_constraint("r" + std::to_string(r), terms, RowSense::kLe, lhs + slack(rng));
    } else {
      p.add_constraint("r" + std::to_string(r), terms, RowSense::kGe, lhs - slack(rng));
    }
  }
  return p;
}

/// Minimum over all 2^k binary fixings, each completed by an LP solve.
inline double enumerate_binaries(const MilpProblem& p) {
  const std::size_t k = p.num_binaries();
  double best = kInf;
  std::vector<std::uint8_t> a(k);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    for (std::size_t i = 0; i < k; ++i) a[i] = std::uint8_t((mask >> i) & 1u);
    const MilpSolution s = fix_binaries_and_solve(p, a);
    if (s.status == SolveStatus::kOptimal) best = std::min(best, s.objective);
  }
  return best;
}

/// Dense Gaussian elimination with partial pivoting; false when singular.
inline bool dense_solve(std::vector<std::vector<double>> a, std::vector<double> b,
                        std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return true;
}

/// Best vertex of {Ax <= b, lo <= x <= hi} by enumerating every choice of
/// n active constraints.
inline double vertex_enumeration(const std::vector<std::vector<double>>& a,
                                 const std::vector<double>& b, const std::vector<double>& lo,
                                 const std::vector<double>& hi, const std::vector<double>& c) {
  const std::size_t n = c.size();
  std::vector<std::vector<double>> rows = a;
  std::vector<double> rhs = b;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    rows.push_back(e);
    rhs.push_back(hi[j]);
    e[j] = -1.0;
    rows.push_back(e);
    rhs.push_back(-lo[j]);
  }
  const std::size_t total = rows.size();
  std::vector<int> choose(total, 0);
  std::fill(choose.end() - long(n), choose.end(), 1);
  double best = kInf;
  std::vector<double> x;
  do {
    std::vector<std::vector<double>> m;
    std::vector<double> r;
    for (std::size_t i = 0; i < total; ++i) {
      if (choose[i]) {
        m.push_back(rows[i]);
        r.push_back(rhs[i]);
      }
    }
    if (!dense_solve(m, r, x)) continue;
    bool feasible = true;
    for (std::size_t i = 0; i < total && feasible; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += rows[i][j] * x[j];
      feasible = s <= rhs[i] + 1e-7 * (1.0 + std::abs(rhs[i]));
    }
    if (!feasible) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += c[j] * x[j];
    best = std::min(best, obj);
  } while (std::next_permutation(choose.begin(), choose.end()));
  return best;
}

}  // namespace steplearn::testing
