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

// MILP model container and the solver entry points: a bounded revised simplex
// for LPs and a best-bound branch and bound for problems with binaries.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace steplearn {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { kContinuous, kBinary };
enum class RowSense { kLe, kEq, kGe };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::kContinuous;
  /// Branching class; higher classes are branched on first.
  int branch_priority = 0;
};

struct Term {
  std::size_t var;
  double coef;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
};

/// Minimisation problem over continuous and binary variables.
class MilpProblem {
 public:
  std::size_t add_variable(std::string name, double lower, double upper,
                           VarKind kind = VarKind::kContinuous,
                           double objective = 0.0);
  std::size_t add_binary(std::string name, double objective = 0.0) {
    return add_variable(std::move(name), 0.0, 1.0, VarKind::kBinary, objective);
  }
  std::size_t add_constraint(std::string name, std::vector<Term> terms,
                             RowSense sense, double rhs);

  void set_objective(std::size_t var, double coef) { objective_.at(var) = coef; }
  void add_objective(std::size_t var, double coef) { objective_.at(var) += coef; }
  void set_objective_offset(double offset) { offset_ = offset; }
  void set_bounds(std::size_t var, double lower, double upper);
  void set_branch_priority(std::size_t var, int priority) {
    vars_.at(var).branch_priority = priority;
  }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_offset() const { return offset_; }

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_binaries() const;
  std::size_t num_nonzeros() const;
  /// Indices of binary variables, ascending.
  std::vector<std::size_t> binary_indices() const;

  /// Throws std::invalid_argument on crossed bounds, binaries outside
  /// [0,1], out-of-range indices or non-finite coefficients.
  void validate() const;

  double evaluate_objective(const std::vector<double>& x) const;
  /// Largest violation over rows and bounds, each row scaled by
  /// max(1, max |coef|).
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> objective_;
  double offset_ = 0.0;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kGapLimit,   // stopped with open nodes once the gap tolerance was met
  kTimeLimit,  // carries the incumbent, if any
  kNodeLimit,
  kNumericalFailure,
};

const char* to_string(SolveStatus status);

/// One row per branch-and-bound node processed.
struct BnbTraceEntry {
  std::size_t node;
  double best_bound;
  double incumbent;
};

struct MilpSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  std::vector<double> values;
  double objective = kInf;
  double best_bound = -kInf;
  double gap = kInf;
  std::size_t nodes = 0;
  std::size_t lp_iterations = 0;
  double wall_seconds = 0.0;
  /// LP only: row duals and the dual objective built from them.
  std::vector<double> duals;
  double dual_objective = -kInf;
  /// Worst relative primal/dual disagreement over all optimal node LPs.
  double max_duality_residual = 0.0;
  std::vector<BnbTraceEntry> trace;
  std::string message;

  bool has_solution() const { return !values.empty(); }
};

struct LpOptions {
  double time_limit = kInf;
  std::size_t iteration_limit = 0;  // 0: automatic
  bool scale = true;
};

struct MilpOptions {
  double relative_gap = 1e-3;
  double absolute_gap = 1e-9;
  double time_limit = 1000.0;
  double integrality_tolerance = 1e-6;
  std::size_t node_limit = 0;  // 0: unlimited
  /// Full-length vector; binaries must be 0/1. Continuous entries are ignored
  /// and recomputed by an LP with the binaries fixed.
  std::optional<std::vector<double>> warm_start;
  bool record_trace = false;
  bool scale = true;
};

MilpSolution solve_lp(const MilpProblem& problem, const LpOptions& options = {});
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

/// LP with every binary fixed to `assignment` (one entry per binary, in index
/// order).
MilpSolution fix_binaries_and_solve(const MilpProblem& problem,
                                    const std::vector<std::uint8_t>& assignment,
                                    const LpOptions& options = {});

/// CPLEX LP text format, for cross-checking with external solvers.
void write_lp_format(const MilpProblem& problem, std::ostream& out);

}  // namespace steplearn
