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
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "steplearn/lp/propagate.hpp"
#include "steplearn/lp/simplex.hpp"
#include "steplearn/milp.hpp"

namespace steplearn {
namespace {

using lp::Basis;
using lp::LpResult;
using lp::LpStatus;
using lp::SimplexEngine;
using Clock = std::chrono::steady_clock;

Clock::time_point deadline_after(double seconds) {
  if (!std::isfinite(seconds) || seconds > 1e7) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(seconds));
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double duality_residual(double primal, double dual) {
  if (!std::isfinite(dual)) return kInf;
  return std::abs(primal - dual) / (1.0 + std::abs(primal));
}

SolveStatus lp_to_solve_status(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return SolveStatus::kOptimal;
    case LpStatus::kInfeasible:
      return SolveStatus::kInfeasible;
    case LpStatus::kUnbounded:
      return SolveStatus::kUnbounded;
    case LpStatus::kTimeLimit:
      return SolveStatus::kTimeLimit;
    case LpStatus::kIterationLimit:
    case LpStatus::kNumericalFailure:
      return SolveStatus::kNumericalFailure;
  }
  return SolveStatus::kNumericalFailure;
}

// Fills an LP-style solution from a finished engine run.
MilpSolution lp_solution(const SimplexEngine& engine, const LpResult& r) {
  MilpSolution sol;
  sol.status = lp_to_solve_status(r.status);
  sol.lp_iterations = r.iterations;
  if (r.status == LpStatus::kOptimal) {
    sol.values = engine.primal();
    sol.objective = r.objective;
    sol.duals = engine.row_duals();
    sol.dual_objective = engine.dual_objective();
    sol.best_bound = sol.dual_objective;
    sol.gap = 0.0;
    sol.max_duality_residual = duality_residual(sol.objective, sol.dual_objective);
  }
  return sol;
}

struct BoundChange {
  std::size_t var;
  double lower;
  double upper;
};

struct Node {
  std::size_t id;
  double bound;
  std::vector<BoundChange> changes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const std::unique_ptr<Node>& a, const std::unique_ptr<Node>& b) const {
    if (a->bound != b->bound) return a->bound > b->bound;
    return a->id > b->id;
  }
};

bool gap_closed(double incumbent, double bound, const MilpOptions& o) {
  if (!std::isfinite(incumbent)) return false;
  const double diff = incumbent - bound;
  return diff <= o.absolute_gap || diff <= o.relative_gap * std::max(std::abs(incumbent), 1e-10);
}

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent) || !std::isfinite(bound)) return kInf;
  const double diff = std::max(0.0, incumbent - bound);
  if (diff == 0.0) return 0.0;
  return diff / std::max(std::abs(incumbent), 1e-10);
}

}  // namespace

MilpSolution solve_lp(const MilpProblem& problem, const LpOptions& options) {
  problem.validate();
  const auto start = Clock::now();
  SimplexEngine engine(problem, options.scale);
  const LpResult r = engine.solve(nullptr, deadline_after(options.time_limit),
                                  options.iteration_limit);
  MilpSolution sol = lp_solution(engine, r);
  sol.wall_seconds = elapsed(start);
  return sol;
}

MilpSolution fix_binaries_and_solve(const MilpProblem& problem,
                                    const std::vector<std::uint8_t>& assignment,
                                    const LpOptions& options) {
  problem.validate();
  const auto bins = problem.binary_indices();
  if (assignment.size() != bins.size()) {
    throw std::invalid_argument("assignment covers " + std::to_string(assignment.size()) +
                                " binaries, problem has " + std::to_string(bins.size()));
  }
  const auto start = Clock::now();
  SimplexEngine engine(problem, options.scale);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (assignment[k] > 1) throw std::invalid_argument("assignment entries must be 0 or 1");
    const Variable& v = problem.variables()[bins[k]];
    const double val = assignment[k];
    if (val < v.lower || val > v.upper) {
      MilpSolution sol;
      sol.status = SolveStatus::kInfeasible;
      sol.message = "fixing of " + v.name + " outside its bounds";
      return sol;
    }
    engine.set_column_bounds(bins[k], val, val);
  }
  const LpResult r = engine.solve(nullptr, deadline_after(options.time_limit),
                                  options.iteration_limit);
  MilpSolution sol = lp_solution(engine, r);
  if (sol.has_solution()) {
    for (std::size_t k = 0; k < bins.size(); ++k) sol.values[bins[k]] = assignment[k];
  }
  sol.wall_seconds = elapsed(start);
  return sol;
}

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  problem.validate();
  const auto start = Clock::now();
  const auto deadline = deadline_after(options.time_limit);
  const auto bins = problem.binary_indices();
  const auto& vars = problem.variables();
  const double int_tol = options.integrality_tolerance;

  MilpSolution out;
  MilpProblem tight = problem;
  const lp::BoundPropagator propagator(tight);
  std::vector<double> root_lo(vars.size()), root_hi(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    root_lo[j] = vars[j].lower;
    root_hi[j] = vars[j].upper;
  }
  if (!propagator.propagate(root_lo, root_hi)) {
    if (options.warm_start) throw std::invalid_argument("warm start rejected: problem is infeasible");
    out.status = SolveStatus::kInfeasible;
    out.wall_seconds = elapsed(start);
    return out;
  }
  // Continuous bounds carry a safety margin, so the LP only sees the
  // binary fixings; the tightened continuous ranges stay internal.
  for (std::size_t j : bins) tight.set_bounds(j, root_lo[j], root_hi[j]);
  SimplexEngine engine(tight, options.scale);
  std::vector<double> node_lo, node_hi;
  std::vector<std::size_t> seeds;

  double incumbent = kInf;
  std::vector<double> best_values;

  // Resolves with every binary fixed to its rounded value and accepts the
  // result as incumbent when it improves.
  auto polish = [&](const std::vector<double>& x, const Basis* warm) -> LpResult {
    engine.restore_bounds();
    for (std::size_t j : bins) {
      const double v = std::round(x[j]);
      engine.set_column_bounds(j, v, v);
    }
    LpResult r = engine.solve(warm, deadline);
    out.lp_iterations += r.iterations;
    if (r.status == LpStatus::kOptimal) {
      out.max_duality_residual = std::max(
          out.max_duality_residual, duality_residual(r.objective, engine.dual_objective()));
      if (r.objective < incumbent) {
        incumbent = r.objective;
        best_values = engine.primal();
        for (std::size_t j : bins) best_values[j] = std::round(x[j]);
      }
    }
    return r;
  };

  if (options.warm_start) {
    const auto& ws = *options.warm_start;
    if (ws.size() != vars.size()) {
      throw std::invalid_argument("warm start has " + std::to_string(ws.size()) +
                                  " entries, problem has " + std::to_string(vars.size()));
    }
    for (std::size_t j : bins) {
      if (std::abs(ws[j] - std::round(ws[j])) > int_tol) {
        throw std::invalid_argument("warm start value of " + vars[j].name + " is not binary");
      }
    }
    const LpResult r = polish(ws, nullptr);
    if (r.status != LpStatus::kOptimal) {
      std::ostringstream msg;
      msg << "warm start rejected: LP with binaries fixed is "
          << to_string(lp_to_solve_status(r.status));
      throw std::invalid_argument(msg.str());
    }
  }

  std::priority_queue<std::unique_ptr<Node>, std::vector<std::unique_ptr<Node>>, NodeOrder>
      open;
  std::size_t next_id = 0;
  open.push(std::make_unique<Node>(Node{next_id++, -kInf, {}, nullptr}));

  double global_bound = -kInf;
  bool unbounded = false;
  bool numerical = false;
  SolveStatus stop = SolveStatus::kOptimal;

  while (!open.empty()) {
    const double frontier = open.top()->bound;
    global_bound = std::max(global_bound, std::min(frontier, incumbent));
    if (frontier >= incumbent) {
      while (!open.empty()) open.pop();
      break;
    }
    if (gap_closed(incumbent, frontier, options)) {
      stop = SolveStatus::kGapLimit;
      break;
    }
    if (Clock::now() > deadline) {
      stop = SolveStatus::kTimeLimit;
      break;
    }
    if (options.node_limit > 0 && out.nodes >= options.node_limit) {
      stop = SolveStatus::kNodeLimit;
      break;
    }
    auto node = std::move(const_cast<std::unique_ptr<Node>&>(open.top()));
    open.pop();
    ++out.nodes;

    engine.restore_bounds();
    node_lo = root_lo;
    node_hi = root_hi;
    seeds.clear();
    for (const BoundChange& c : node->changes) {
      node_lo[c.var] = c.lower;
      node_hi[c.var] = c.upper;
      seeds.push_back(c.var);
    }
    if (!propagator.propagate(node_lo, node_hi, &seeds)) {
      if (options.record_trace) {
        const double bb = open.empty() ? incumbent : std::min(open.top()->bound, incumbent);
        out.trace.push_back({out.nodes, std::max(global_bound, bb), incumbent});
      }
      continue;
    }
    for (std::size_t j : bins) {
      if (node_lo[j] != root_lo[j] || node_hi[j] != root_hi[j]) {
        engine.set_column_bounds(j, node_lo[j], node_hi[j]);
      }
    }
    const LpResult r = engine.solve(node->basis.get(), deadline);
    out.lp_iterations += r.iterations;

    auto record = [&] {
      if (options.record_trace) {
        const double bb = open.empty() ? incumbent : std::min(open.top()->bound, incumbent);
        out.trace.push_back({out.nodes, std::max(global_bound, bb), incumbent});
      }
    };

    if (r.status == LpStatus::kTimeLimit) {
      stop = SolveStatus::kTimeLimit;
      open.push(std::move(node));
      break;
    }
    if (r.status == LpStatus::kInfeasible) {
      record();
      continue;
    }
    if (r.status == LpStatus::kUnbounded) {
      unbounded = true;
      break;
    }
    if (r.status != LpStatus::kOptimal) {
      numerical = true;
      record();
      continue;
    }
    out.max_duality_residual = std::max(
        out.max_duality_residual, duality_residual(r.objective, engine.dual_objective()));
    const double node_bound = std::max(node->bound, r.objective);
    if (std::isfinite(incumbent) &&
        (node_bound >= incumbent ||
         gap_closed(incumbent, node_bound, options))) {
      record();
      continue;
    }

    const std::vector<double> x = engine.primal();
    // Most fractional binary within the highest priority class present.
    std::size_t branch = vars.size();
    int branch_priority = 0;
    double branch_frac = 0.0;
    for (std::size_t j : bins) {
      const double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (f <= int_tol) continue;
      const int p = vars[j].branch_priority;
      if (branch == vars.size() || p > branch_priority ||
          (p == branch_priority && f > branch_frac + 1e-12)) {
        branch = j;
        branch_priority = p;
        branch_frac = f;
      }
    }

    auto basis = std::make_shared<const Basis>(engine.basis());
    if (branch == vars.size()) {
      polish(x, basis.get());
      record();
      continue;
    }
    for (int side = 0; side < 2; ++side) {
      auto child = std::make_unique<Node>();
      child->id = next_id++;
      child->bound = node_bound;
      child->changes = node->changes;
      const double v = side == 0 ? 0.0 : 1.0;
      child->changes.push_back({branch, v, v});
      child->basis = basis;
      open.push(std::move(child));
    }
    record();
  }

  out.wall_seconds = elapsed(start);
  if (unbounded) {
    out.status = SolveStatus::kUnbounded;
    out.message = "LP relaxation unbounded";
    return out;
  }
  if (open.empty()) {
    out.best_bound = incumbent;
    out.status = std::isfinite(incumbent) ? SolveStatus::kOptimal
                                          : (numerical ? SolveStatus::kNumericalFailure
                                                       : SolveStatus::kInfeasible);
  } else {
    out.best_bound = std::max(global_bound, std::min(open.top()->bound, incumbent));
    out.status = stop;
  }
  if (numerical) out.message = "some node relaxations failed numerically and were pruned";
  out.objective = incumbent;
  out.values = std::move(best_values);
  out.gap = relative_gap(incumbent, out.best_bound);
  if (options.record_trace) out.trace.push_back({out.nodes, out.best_bound, incumbent});
  return out;
}

}  // namespace steplearn
