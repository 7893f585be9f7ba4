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

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "steplearn/milp.hpp"

namespace steplearn {

std::size_t MilpProblem::add_variable(std::string name, double lower, double upper,
                                      VarKind kind, double objective) {
  vars_.push_back(Variable{std::move(name), lower, upper, kind, 0});
  objective_.push_back(objective);
  return vars_.size() - 1;
}

std::size_t MilpProblem::add_constraint(std::string name, std::vector<Term> terms,
                                        RowSense sense, double rhs) {
  rows_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
  return rows_.size() - 1;
}

void MilpProblem::set_bounds(std::size_t var, double lower, double upper) {
  Variable& v = vars_.at(var);
  v.lower = lower;
  v.upper = upper;
}

std::size_t MilpProblem::num_binaries() const {
  return std::size_t(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
    return v.kind == VarKind::kBinary;
  }));
}

std::size_t MilpProblem::num_nonzeros() const {
  std::size_t n = 0;
  for (const Constraint& c : rows_) n += c.terms.size();
  return n;
}

std::vector<std::size_t> MilpProblem::binary_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    if (vars_[j].kind == VarKind::kBinary) out.push_back(j);
  }
  return out;
}

void MilpProblem::validate() const {
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const Variable& v = vars_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
      throw std::invalid_argument("variable " + v.name + ": invalid bounds");
    }
    if (v.kind == VarKind::kBinary && (v.lower < 0.0 || v.upper > 1.0)) {
      throw std::invalid_argument("variable " + v.name + ": binary bounds outside [0,1]");
    }
    if (!std::isfinite(objective_[j])) {
      throw std::invalid_argument("variable " + v.name + ": non-finite objective");
    }
  }
  for (const Constraint& c : rows_) {
    if (!std::isfinite(c.rhs)) {
      throw std::invalid_argument("row " + c.name + ": non-finite rhs");
    }
    for (const Term& t : c.terms) {
      if (t.var >= vars_.size()) {
        throw std::invalid_argument("row " + c.name + ": variable index out of range");
      }
      if (!std::isfinite(t.coef)) {
        throw std::invalid_argument("row " + c.name + ": non-finite coefficient");
      }
    }
  }
  if (!std::isfinite(offset_)) throw std::invalid_argument("non-finite objective offset");
}

double MilpProblem::evaluate_objective(const std::vector<double>& x) const {
  double s = offset_;
  for (std::size_t j = 0; j < vars_.size(); ++j) s += objective_[j] * x.at(j);
  return s;
}

double MilpProblem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max({worst, vars_[j].lower - x.at(j), x.at(j) - vars_[j].upper});
  }
  for (const Constraint& c : rows_) {
    double lhs = 0.0, scale = 1.0;
    for (const Term& t : c.terms) {
      lhs += t.coef * x.at(t.var);
      scale = std::max(scale, std::abs(t.coef));
    }
    double v = 0.0;
    switch (c.sense) {
      case RowSense::kLe:
        v = lhs - c.rhs;
        break;
      case RowSense::kGe:
        v = c.rhs - lhs;
        break;
      case RowSense::kEq:
        v = std::abs(lhs - c.rhs);
        break;
    }
    worst = std::max(worst, v / scale);
  }
  return worst;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kGapLimit:
      return "gap_limit";
    case SolveStatus::kTimeLimit:
      return "time_limit";
    case SolveStatus::kNodeLimit:
      return "node_limit";
    case SolveStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

}  // namespace steplearn
