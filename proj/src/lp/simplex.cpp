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

#include "steplearn/lp/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace steplearn::lp {
namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 100;
constexpr std::size_t kDegenerateStreak = 60;
constexpr int kScalingPasses = 6;

double pow2_round(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  return std::ldexp(1.0, int(std::lround(std::log2(v))));
}

}  // namespace

SimplexEngine::SimplexEngine(const MilpProblem& problem, bool scale)
    : m_(problem.num_constraints()), n_(problem.num_variables()), problem_(&problem) {
  const auto& rows = problem.constraints();
  const auto& vars = problem.variables();

  // Row-major to CSC.
  std::vector<std::size_t> counts(n_ + 1, 0);
  for (const Constraint& c : rows) {
    for (const Term& t : c.terms) {
      if (t.coef != 0.0) ++counts[t.var + 1];
    }
  }
  col_start_.assign(n_ + 1, 0);
  for (std::size_t j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j + 1];
  row_index_.assign(col_start_[n_], 0);
  value_.assign(col_start_[n_], 0.0);
  std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
  for (std::size_t r = 0; r < m_; ++r) {
    for (const Term& t : rows[r].terms) {
      if (t.coef == 0.0) continue;
      row_index_[fill[t.var]] = int(r);
      value_[fill[t.var]++] = t.coef;
    }
  }
  // Merge duplicate (row, col) entries.
  for (std::size_t j = 0; j < n_; ++j) {
    std::vector<std::pair<int, double>> e;
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      e.emplace_back(row_index_[k], value_[k]);
    }
    std::sort(e.begin(), e.end());
    std::size_t w = col_start_[j];
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (w > col_start_[j] && row_index_[w - 1] == e[k].first) {
        value_[w - 1] += e[k].second;
      } else {
        row_index_[w] = e[k].first;
        value_[w++] = e[k].second;
      }
    }
    for (; w < col_start_[j + 1]; ++w) {
      row_index_[w] = row_index_[col_start_[j]];
      value_[w] = 0.0;
    }
  }

  row_scale_.assign(m_, 1.0);
  col_scale_.assign(n_, 1.0);
  if (scale && m_ > 0) {
    std::vector<double> rmin(m_), rmax(m_);
    for (int pass = 0; pass < kScalingPasses; ++pass) {
      std::fill(rmin.begin(), rmin.end(), kInf);
      std::fill(rmax.begin(), rmax.end(), 0.0);
      for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
          const double a = std::abs(value_[k]) * col_scale_[j];
          if (a == 0.0) continue;
          rmin[row_index_[k]] = std::min(rmin[row_index_[k]], a);
          rmax[row_index_[k]] = std::max(rmax[row_index_[k]], a);
        }
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (rmax[r] > 0.0) row_scale_[r] = 1.0 / std::sqrt(rmin[r] * rmax[r]);
      }
      for (std::size_t j = 0; j < n_; ++j) {
        if (vars[j].kind == VarKind::kBinary) continue;
        double cmin = kInf, cmax = 0.0;
        for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
          const double a = std::abs(value_[k]) * row_scale_[row_index_[k]];
          if (a == 0.0) continue;
          cmin = std::min(cmin, a);
          cmax = std::max(cmax, a);
        }
        if (cmax > 0.0) col_scale_[j] = 1.0 / std::sqrt(cmin * cmax);
      }
    }
    for (double& s : row_scale_) s = pow2_round(s);
    for (double& s : col_scale_) s = pow2_round(s);
  }
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      value_[k] *= row_scale_[row_index_[k]] * col_scale_[j];
    }
  }

  cost_.assign(n_ + m_, 0.0);
  double cmax = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    cost_[j] = problem.objective()[j] * col_scale_[j];
    cmax = std::max(cmax, std::abs(cost_[j]));
  }
  if (scale && cmax > 0.0) obj_scale_ = pow2_round(cmax);
  for (std::size_t j = 0; j < n_; ++j) cost_[j] /= obj_scale_;

  base_lo_.assign(n_ + m_, 0.0);
  base_hi_.assign(n_ + m_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    base_lo_[j] = vars[j].lower / col_scale_[j];
    base_hi_[j] = vars[j].upper / col_scale_[j];
  }
  for (std::size_t r = 0; r < m_; ++r) {
    const Constraint& c = rows[r];
    double lo = -kInf, hi = kInf;
    switch (c.sense) {
      case RowSense::kLe:
        hi = c.rhs;
        break;
      case RowSense::kGe:
        lo = c.rhs;
        break;
      case RowSense::kEq:
        lo = hi = c.rhs;
        break;
    }
    base_lo_[n_ + r] = lo * row_scale_[r];
    base_hi_[n_ + r] = hi * row_scale_[r];
  }
  lo_ = base_lo_;
  hi_ = base_hi_;
}

void SimplexEngine::set_column_bounds(std::size_t j, double lower, double upper) {
  lo_[j] = lower / col_scale_[j];
  hi_[j] = upper / col_scale_[j];
}

void SimplexEngine::restore_bounds() {
  lo_ = base_lo_;
  hi_ = base_hi_;
}

double SimplexEngine::feas_tol(double bound) const {
  return kPrimalTol * (1.0 + std::min(std::abs(bound), 1e6));
}

void SimplexEngine::column(std::size_t j, SparseColumn& out) const {
  out.clear();
  if (j < n_) {
    for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      if (value_[k] != 0.0) out.emplace_back(row_index_[k], value_[k]);
    }
  } else {
    out.emplace_back(int(j - n_), -1.0);
  }
}

double SimplexEngine::dot_column(std::size_t j, const std::vector<double>& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
    s += value_[k] * y[row_index_[k]];
  }
  return s;
}

void SimplexEngine::place_nonbasic(std::size_t j) {
  VarStatus& st = basis_.status[j];
  const bool lo_fin = std::isfinite(lo_[j]);
  const bool hi_fin = std::isfinite(hi_[j]);
  if (st == VarStatus::kAtUpper && hi_fin) {
    x_[j] = hi_[j];
  } else if (lo_fin) {
    st = VarStatus::kAtLower;
    x_[j] = lo_[j];
  } else if (hi_fin) {
    st = VarStatus::kAtUpper;
    x_[j] = hi_[j];
  } else {
    st = VarStatus::kFree;
    x_[j] = 0.0;
  }
}

bool SimplexEngine::refactor() {
  for (int attempt = 0; attempt < 4; ++attempt) {
    basis_cols_.resize(m_);
    for (std::size_t p = 0; p < m_; ++p) column(std::size_t(basis_.head[p]), basis_cols_[p]);
    auto sing = lu_.factorize(m_, basis_cols_);
    if (sing.positions.empty()) return true;
    // Swap in the logicals of the uncovered rows.
    for (std::size_t k = 0; k < sing.positions.size(); ++k) {
      const int pos = sing.positions[k];
      const std::size_t old = std::size_t(basis_.head[pos]);
      const std::size_t logical = n_ + std::size_t(sing.rows[k]);
      position_[old] = -1;
      basis_.status[old] = VarStatus::kAtLower;
      place_nonbasic(old);
      basis_.head[pos] = int(logical);
      basis_.status[logical] = VarStatus::kBasic;
      position_[logical] = pos;
    }
  }
  return false;
}

void SimplexEngine::compute_basic_values() {
  std::vector<double> rhs(m_, 0.0);
  for (std::size_t j = 0; j < n_ + m_; ++j) {
    if (basis_.status[j] == VarStatus::kBasic || x_[j] == 0.0) continue;
    if (j < n_) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        rhs[row_index_[k]] -= value_[k] * x_[j];
      }
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  lu_.ftran(rhs);
  for (std::size_t p = 0; p < m_; ++p) x_[basis_.head[p]] = rhs[p];
}

void SimplexEngine::compute_duals(std::vector<double>& y) const {
  y.assign(m_, 0.0);
  for (std::size_t p = 0; p < m_; ++p) y[p] = cost_[basis_.head[p]];
  lu_.btran(y);
}

LpResult SimplexEngine::solve(const Basis* warm, Clock::time_point deadline,
                              std::size_t iteration_limit) {
  const std::size_t total = n_ + m_;
  if (iteration_limit == 0) iteration_limit = 50 * (total + 100);
  LpResult result;
  have_solution_ = false;
  x_.assign(total, 0.0);
  position_.assign(total, -1);

  if (warm != nullptr && warm->status.size() == total && warm->head.size() == m_) {
    basis_ = *warm;
  } else {
    basis_.status.assign(total, VarStatus::kAtLower);
    basis_.head.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      basis_.head[r] = int(n_ + r);
      basis_.status[n_ + r] = VarStatus::kBasic;
    }
  }
  for (std::size_t p = 0; p < m_; ++p) position_[basis_.head[p]] = int(p);
  for (std::size_t j = 0; j < total; ++j) {
    if (position_[j] < 0) {
      if (basis_.status[j] == VarStatus::kBasic) basis_.status[j] = VarStatus::kAtLower;
      place_nonbasic(j);
    }
  }
  if (!refactor()) {
    result.status = LpStatus::kNumericalFailure;
    return result;
  }
  compute_basic_values();

  std::vector<double> cb(m_), y(m_), alpha(m_), d(total, 0.0);
  std::size_t degenerate = 0;
  bool bland = false;
  bool verified = false;
  int numeric_retries = 0;

  for (std::size_t iter = 0;; ++iter) {
    if (iter >= iteration_limit) {
      result.status = LpStatus::kIterationLimit;
      result.iterations = iter;
      return result;
    }
    if ((iter & 63) == 0 && Clock::now() > deadline) {
      result.status = LpStatus::kTimeLimit;
      result.iterations = iter;
      return result;
    }
    if (lu_.num_updates() >= kRefactorEvery) {
      if (!refactor()) {
        result.status = LpStatus::kNumericalFailure;
        return result;
      }
      compute_basic_values();
    }

    // Phase costs.
    bool phase1 = false;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = std::size_t(basis_.head[p]);
      const double v = x_[j];
      if (v < lo_[j] - feas_tol(lo_[j])) {
        cb[p] = -1.0;
        phase1 = true;
      } else if (v > hi_[j] + feas_tol(hi_[j])) {
        cb[p] = 1.0;
        phase1 = true;
      } else {
        cb[p] = 0.0;
      }
    }
    if (!phase1) {
      for (std::size_t p = 0; p < m_; ++p) cb[p] = cost_[basis_.head[p]];
    }
    y = cb;
    lu_.btran(y);

    // Pricing.
    std::size_t enter = total;
    int dir = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < total; ++j) {
      const VarStatus st = basis_.status[j];
      if (st == VarStatus::kBasic) continue;
      if (lo_[j] == hi_[j]) continue;
      const double dj = (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
      d[j] = dj;
      int jdir = 0;
      if (st == VarStatus::kAtLower && dj < -kDualTol) jdir = 1;
      else if (st == VarStatus::kAtUpper && dj > kDualTol) jdir = -1;
      else if (st == VarStatus::kFree && std::abs(dj) > kDualTol) jdir = dj < 0 ? 1 : -1;
      if (jdir == 0) continue;
      if (bland) {
        enter = j;
        dir = jdir;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        enter = j;
        dir = jdir;
      }
    }

    if (enter == total) {
      if (!verified) {
        // Recompute from a fresh factorisation before declaring the outcome.
        verified = true;
        if (!refactor()) {
          result.status = LpStatus::kNumericalFailure;
          return result;
        }
        compute_basic_values();
        continue;
      }
      result.iterations = iter;
      result.status = phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;
      if (!phase1) {
        have_solution_ = true;
        double obj = problem_->objective_offset();
        const auto& c = problem_->objective();
        for (std::size_t j = 0; j < n_; ++j) obj += c[j] * x_[j] * col_scale_[j];
        result.objective = obj;
      }
      return result;
    }

    // Entering column image.
    std::fill(alpha.begin(), alpha.end(), 0.0);
    if (enter < n_) {
      for (std::size_t k = col_start_[enter]; k < col_start_[enter + 1]; ++k) {
        alpha[row_index_[k]] = value_[k];
      }
    } else {
      alpha[enter - n_] = -1.0;
    }
    lu_.ftran(alpha);

    // Ratio test. Basic variable p moves at rate delta_p = -dir * alpha_p.
    auto target_of = [&](std::size_t p, double delta, double& target) {
      const std::size_t j = std::size_t(basis_.head[p]);
      const double v = x_[j];
      if (delta > 0.0) {
        if (phase1 && v < lo_[j] - feas_tol(lo_[j])) target = lo_[j];
        else if (v > hi_[j] + feas_tol(hi_[j])) return false;
        else target = hi_[j];
      } else {
        if (phase1 && v > hi_[j] + feas_tol(hi_[j])) target = hi_[j];
        else if (v < lo_[j] - feas_tol(lo_[j])) return false;
        else target = lo_[j];
      }
      return std::isfinite(target);
    };

    double max_alpha = 0.0;
    for (double a : alpha) max_alpha = std::max(max_alpha, std::abs(a));
    const double piv_tol = kPivotTol * std::max(1.0, max_alpha);

    int leave = -1;
    double theta = kInf;
    double leave_target = 0.0;
    if (!bland) {
      double theta_max = kInf;
      for (std::size_t p = 0; p < m_; ++p) {
        if (std::abs(alpha[p]) < piv_tol) continue;
        const double delta = -dir * alpha[p];
        double target;
        if (!target_of(p, delta, target)) continue;
        const double v = x_[basis_.head[p]];
        const double tol = feas_tol(target);
        const double ratio = delta > 0 ? (target + tol - v) / delta : (target - tol - v) / delta;
        theta_max = std::min(theta_max, ratio);
      }
      double best_alpha = 0.0;
      if (std::isfinite(theta_max)) {
        for (std::size_t p = 0; p < m_; ++p) {
          if (std::abs(alpha[p]) < piv_tol) continue;
          const double delta = -dir * alpha[p];
          double target;
          if (!target_of(p, delta, target)) continue;
          const double ratio = (target - x_[basis_.head[p]]) / delta;
          if (ratio <= theta_max && std::abs(alpha[p]) > best_alpha) {
            best_alpha = std::abs(alpha[p]);
            leave = int(p);
            theta = std::max(ratio, 0.0);
            leave_target = target;
          }
        }
      }
    } else {
      for (std::size_t p = 0; p < m_; ++p) {
        if (std::abs(alpha[p]) < piv_tol) continue;
        const double delta = -dir * alpha[p];
        double target;
        if (!target_of(p, delta, target)) continue;
        const double ratio = std::max((target - x_[basis_.head[p]]) / delta, 0.0);
        const bool tie = leave >= 0 && std::abs(ratio - theta) <= 1e-12 * (1.0 + theta);
        if (leave < 0 || (ratio < theta && !tie) ||
            (tie && basis_.head[p] < basis_.head[leave])) {
          leave = int(p);
          theta = ratio;
          leave_target = target;
        }
      }
    }

    const double range = hi_[enter] - lo_[enter];
    const bool flip = std::isfinite(range) && range <= theta;
    if (leave < 0 && !flip) {
      if (!phase1) {
        result.status = LpStatus::kUnbounded;
        result.iterations = iter;
        return result;
      }
      // Phase 1 cannot be unbounded; recover from drift.
      if (++numeric_retries > 5 || !refactor()) {
        result.status = LpStatus::kNumericalFailure;
        result.iterations = iter;
        return result;
      }
      compute_basic_values();
      continue;
    }
    if (flip) theta = range;

    const double step = dir * theta;
    if (theta != 0.0) {
      for (std::size_t p = 0; p < m_; ++p) {
        if (alpha[p] != 0.0) x_[basis_.head[p]] -= step * alpha[p];
      }
    }
    x_[enter] += step;
    verified = false;

    if (flip) {
      basis_.status[enter] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
    } else {
      const std::size_t out = std::size_t(basis_.head[leave]);
      x_[out] = leave_target;
      basis_.status[out] = (leave_target == lo_[out]) ? VarStatus::kAtLower : VarStatus::kAtUpper;
      position_[out] = -1;
      basis_.head[leave] = int(enter);
      basis_.status[enter] = VarStatus::kBasic;
      position_[enter] = leave;
      lu_.update(leave, alpha);
    }

    if (theta * std::max(1.0, max_alpha) < 1e-12) {
      if (++degenerate > kDegenerateStreak) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
  }
}

std::vector<double> SimplexEngine::primal() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = x_[j] * col_scale_[j];
  return out;
}

std::vector<double> SimplexEngine::row_duals() const {
  std::vector<double> y;
  compute_duals(y);
  for (std::size_t r = 0; r < m_; ++r) y[r] *= row_scale_[r] * obj_scale_;
  return y;
}

double SimplexEngine::dual_objective() const {
  std::vector<double> ys;
  compute_duals(ys);
  const auto& c = problem_->objective();
  double total = problem_->objective_offset();
  auto box_min = [](double dj, double lo, double hi) {
    const double scale_tol = 1e-9 * (1.0 + std::abs(dj));
    if (std::abs(dj) <= 1e-11) return 0.0;
    const double b = dj > 0 ? lo : hi;
    if (!std::isfinite(b)) return std::abs(dj) <= scale_tol ? 0.0 : -kInf;
    return dj * b;
  };
  for (std::size_t j = 0; j < n_; ++j) {
    if (basis_.status[j] == VarStatus::kBasic) continue;
    const double dj = c[j] - dot_column(j, ys) * obj_scale_ / col_scale_[j];
    total += box_min(dj, lo_[j] * col_scale_[j], hi_[j] * col_scale_[j]);
  }
  for (std::size_t r = 0; r < m_; ++r) {
    if (basis_.status[n_ + r] == VarStatus::kBasic) continue;
    const double yr = ys[r] * row_scale_[r] * obj_scale_;
    total += box_min(yr, lo_[n_ + r] / row_scale_[r], hi_[n_ + r] / row_scale_[r]);
  }
  return total;
}

}  // namespace steplearn::lp
