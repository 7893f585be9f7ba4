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

#include "steplearn/lp/propagate.hpp"

#include <cmath>
#include <deque>

namespace steplearn::lp {

namespace {

constexpr double kIntegerSlack = 1e-6;
constexpr double kMinImprovement = 1e-7;
constexpr double kHuge = 1e12;

}  // namespace

BoundPropagator::BoundPropagator(const MilpProblem& problem) : problem_(&problem) {
  const auto& vars = problem.variables();
  const auto& rows = problem.constraints();
  integer_.resize(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) integer_[j] = vars[j].kind == VarKind::kBinary;
  col_start_.assign(vars.size() + 1, 0);
  for (const Constraint& c : rows) {
    for (const Term& t : c.terms) ++col_start_[t.var + 1];
  }
  for (std::size_t j = 0; j < vars.size(); ++j) col_start_[j + 1] += col_start_[j];
  col_rows_.resize(col_start_.back());
  std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const Term& t : rows[r].terms) col_rows_[fill[t.var]++] = r;
  }
}

bool BoundPropagator::tighten_row(std::size_t r, std::vector<double>& lo, std::vector<double>& hi,
                                  std::vector<std::size_t>& touched) const {
  const Constraint& c = problem_->constraints()[r];
  const std::size_t n = c.terms.size();
  double min_sum = 0.0, max_sum = 0.0, scale = std::abs(c.rhs);
  std::size_t min_inf = 0, max_inf = 0, min_inf_at = 0, max_inf_at = 0;
  std::vector<double> cmin(n), cmax(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = c.terms[k].coef;
    const std::size_t j = c.terms[k].var;
    cmin[k] = a > 0 ? a * lo[j] : a * hi[j];
    cmax[k] = a > 0 ? a * hi[j] : a * lo[j];
    if (std::isinf(cmin[k])) {
      ++min_inf;
      min_inf_at = k;
    } else {
      min_sum += cmin[k];
      scale += std::abs(cmin[k]);
    }
    if (std::isinf(cmax[k])) {
      ++max_inf;
      max_inf_at = k;
    } else {
      max_sum += cmax[k];
      scale += std::abs(cmax[k]);
    }
  }
  const bool le = c.sense != RowSense::kGe, ge = c.sense != RowSense::kLe;
  const double infeasible_tol = 1e-6 * (1.0 + scale);
  if (le && min_inf == 0 && min_sum > c.rhs + infeasible_tol) return false;
  if (ge && max_inf == 0 && max_sum < c.rhs - infeasible_tol) return false;

  const double margin_base = 1e-9 * (1.0 + scale);
  // a bound from the row sense for variable j through coefficient a
  auto apply = [&](std::size_t j, double a, double bound, bool upper) {
    if (!std::isfinite(bound) || std::abs(bound) > kHuge) return true;
    if (integer_[j]) {
      const double v = upper ? std::floor(bound + kIntegerSlack) : std::ceil(bound - kIntegerSlack);
      if (upper ? v >= hi[j] : v <= lo[j]) return true;
      (upper ? hi[j] : lo[j]) = v;
    } else {
      const double m = margin_base / std::abs(a);
      const double v = upper ? bound + m : bound - m;
      const double cur = upper ? hi[j] : lo[j];
      const double need = kMinImprovement * std::max(1.0, std::abs(v));
      if (std::isfinite(cur) && (upper ? v > cur - need : v < cur + need)) return true;
      (upper ? hi[j] : lo[j]) = v;
    }
    if (lo[j] > hi[j]) {
      if (integer_[j] || lo[j] > hi[j] + 1e-6 * (1.0 + std::abs(lo[j]))) return false;
      // crossed by round-off only
      const double mid = 0.5 * (lo[j] + hi[j]);
      lo[j] = hi[j] = mid;
    }
    touched.push_back(j);
    return true;
  };

  for (std::size_t k = 0; k < n; ++k) {
    const double a = c.terms[k].coef;
    if (a == 0.0) continue;
    const std::size_t j = c.terms[k].var;
    if (le && (min_inf == 0 || (min_inf == 1 && min_inf_at == k))) {
      const double rest = min_inf == 0 ? min_sum - cmin[k] : min_sum;
      if (!apply(j, a, (c.rhs - rest) / a, a > 0)) return false;
    }
    if (ge && (max_inf == 0 || (max_inf == 1 && max_inf_at == k))) {
      const double rest = max_inf == 0 ? max_sum - cmax[k] : max_sum;
      if (!apply(j, a, (c.rhs - rest) / a, a < 0)) return false;
    }
  }
  return true;
}

bool BoundPropagator::propagate(std::vector<double>& lo, std::vector<double>& hi,
                                const std::vector<std::size_t>* seeds) const {
  const std::size_t m = problem_->num_constraints();
  std::vector<char> queued(m, 0);
  std::deque<std::size_t> queue;
  auto push_rows_of = [&](std::size_t j) {
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      const std::size_t r = col_rows_[k];
      if (!queued[r]) {
        queued[r] = 1;
        queue.push_back(r);
      }
    }
  };
  if (seeds) {
    for (std::size_t j : *seeds) push_rows_of(j);
  } else {
    for (std::size_t r = 0; r < m; ++r) {
      queued[r] = 1;
      queue.push_back(r);
    }
  }
  std::size_t budget = 20 * m + 1000;
  std::vector<std::size_t> touched;
  while (!queue.empty() && budget-- > 0) {
    const std::size_t r = queue.front();
    queue.pop_front();
    queued[r] = 0;
    touched.clear();
    if (!tighten_row(r, lo, hi, touched)) return false;
    for (std::size_t j : touched) push_rows_of(j);
  }
  return true;
}

}  // namespace steplearn::lp
