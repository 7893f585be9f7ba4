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

// Bounded primal revised simplex on the computational form
//
//   min c^T x  s.t.  A x - s = 0,  l <= x <= u,  L <= s <= U
//
// with one logical s_r per row. Phase 1 minimises the sum of basic bound
// violations from any starting basis, so the same loop serves cold starts and
// branch-and-bound re-solves from a parent basis. Dantzig pricing with a
// Harris ratio test; Bland's rule after a streak of degenerate pivots.

#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "steplearn/lp/sparse_lu.hpp"
#include "steplearn/milp.hpp"

namespace steplearn::lp {

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct Basis {
  std::vector<VarStatus> status;  // structurals then logicals
  std::vector<int> head;          // variable in each basis position
  bool empty() const { return head.empty(); }
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kTimeLimit,
  kNumericalFailure,
};

struct LpResult {
  LpStatus status = LpStatus::kNumericalFailure;
  double objective = 0.0;  // includes the problem's offset
  std::size_t iterations = 0;
};

class SimplexEngine {
 public:
  using Clock = std::chrono::steady_clock;

  SimplexEngine(const MilpProblem& problem, bool scale);

  std::size_t num_rows() const { return m_; }
  std::size_t num_columns() const { return n_; }

  /// Bounds of structural j in problem units.
  void set_column_bounds(std::size_t j, double lower, double upper);
  void restore_bounds();
  double column_lower(std::size_t j) const { return lo_[j] * col_scale_[j]; }
  double column_upper(std::size_t j) const { return hi_[j] * col_scale_[j]; }

  LpResult solve(const Basis* warm, Clock::time_point deadline,
                 std::size_t iteration_limit = 0);

  const Basis& basis() const { return basis_; }
  /// Structural values in problem units.
  std::vector<double> primal() const;
  /// Row duals in problem units (sign: d/d rhs of the objective).
  std::vector<double> row_duals() const;
  /// Lagrangian dual bound from the final duals and current bounds.
  double dual_objective() const;

 private:
  bool refactor();
  void compute_basic_values();
  void place_nonbasic(std::size_t j);
  void column(std::size_t j, SparseColumn& out) const;
  double dot_column(std::size_t j, const std::vector<double>& y) const;
  double feas_tol(double bound) const;
  void compute_duals(std::vector<double>& y) const;

  std::size_t m_ = 0, n_ = 0;
  const MilpProblem* problem_;
  // Scaled CSC matrix of the structural columns.
  std::vector<std::size_t> col_start_;
  std::vector<int> row_index_;
  std::vector<double> value_;
  std::vector<double> cost_;  // n + m, logicals zero
  std::vector<double> lo_, hi_;
  std::vector<double> base_lo_, base_hi_;
  std::vector<double> row_scale_, col_scale_;
  double obj_scale_ = 1.0;

  std::vector<double> x_;
  Basis basis_;
  std::vector<int> position_;  // basis position or -1
  BasisFactor lu_;
  std::vector<SparseColumn> basis_cols_;
  bool have_solution_ = false;
};

}  // namespace steplearn::lp
