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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "steplearn/grid.hpp"
#include "steplearn/milp.hpp"

namespace steplearn {

/// Multiplicative perturbation of one tree node's profiles.
struct NodeScenario {
  std::vector<double> generator_factor;  // per generator; ignored for thermal units
  std::vector<double> load_factor;       // per load

  static NodeScenario identity(const Network& net);
};

struct NodeOperatingContext {
  int node_id = 0;
  std::vector<double> demand;        // [d * T + t] MW per load
  std::vector<double> capacity;      // per generator, MW, after node multipliers
  std::vector<double> availability;  // [g * T + t] in [0, 1]
  std::vector<std::uint8_t> built;   // per candidate
  double voll = 0.0;
  double gamma = 0.0;
  bool enforce_reliability = true;

  double total_demand() const;
};

/// Realized operating data of tree node `node` under `scenario`
/// (identity when null). Renewable availability is min(1, profile x factor).
NodeOperatingContext make_context(const Network& net, const ScenarioTree& tree,
                                  std::size_t node, const std::vector<std::uint8_t>& built,
                                  const NodeScenario* scenario = nullptr);

/// Column indices of one node's operational block.
struct OperationBlock {
  std::size_t horizon = 0;
  std::size_t first_dispatch = 0;  // + g * T + t
  std::size_t first_flow = 0;      // + l * T + t
  std::size_t first_shed = 0;      // + b * T + t
  std::size_t reliability_row = 0;
  bool has_reliability_row = false;

  std::size_t dispatch(std::size_t g, std::size_t t) const { return first_dispatch + g * horizon + t; }
  std::size_t flow(std::size_t l, std::size_t t) const { return first_flow + l * horizon + t; }
  std::size_t shed(std::size_t b, std::size_t t) const { return first_shed + b * horizon + t; }
};

struct OpfModel {
  MilpProblem problem;
  OperationBlock block;
};

/// Transport-model dispatch LP of one node; candidate capacities come from
/// ctx.built.
OpfModel build_opf(const Network& net, const NodeOperatingContext& ctx);

struct OpfResult {
  double generation_cost = 0.0;  // $
  double total_shed = 0.0;       // MWh
  NodeOperation operation;
  /// The reliability cap made the node infeasible; targets come from the
  /// relaxed re-solve.
  bool infeasible_under_standard = false;
};

/// Throws std::runtime_error if the LP fails numerically.
OpfResult solve_opf(const Network& net, const NodeOperatingContext& ctx);

NodeOperation extract_operation(const Network& net, const OperationBlock& block,
                                const std::vector<double>& values);

/// Investment binaries per (candidate k, node s) at index k * num_nodes + s,
/// with the once / lead-time / persistence rows linking them.
struct InvestmentBlock {
  std::size_t num_candidates = 0;
  std::size_t num_nodes = 0;
  std::vector<std::size_t> invest, built, fresh;

  /// Assignment over problem.binary_indices() encoding `plan`; binaries
  /// outside this block are set to 0.
  std::vector<std::uint8_t> assignment(const MilpProblem& problem,
                                       const InvestmentPlan& plan) const;
  InvestmentPlan plan_from(const std::vector<double>& values) const;
};

/// Adds the investment binaries and linking rows. Root nodes cannot have
/// anything built yet and leaves cannot invest.
InvestmentBlock append_investment_block(MilpProblem& p, const Network& net,
                                        const ScenarioTree& tree);

struct ExactStepModel {
  MilpProblem problem;
  InvestmentBlock investment;
  std::vector<OperationBlock> blocks;  // per node

  /// (|G|+|L|+|B|) T |S| + 3 |L^C| |S|.
  static std::size_t expected_variables(const Network& net, const ScenarioTree& tree);

  std::vector<std::uint8_t> assignment(const InvestmentPlan& plan) const {
    return investment.assignment(problem, plan);
  }
  InvestmentPlan plan_from(const std::vector<double>& values) const {
    return investment.plan_from(values);
  }
};

/// Full multistage model; `scenarios`, when given, perturbs each node.
ExactStepModel build_exact_step(const Network& net, const ScenarioTree& tree,
                                const std::vector<NodeScenario>* scenarios = nullptr);

struct StepSolution {
  InvestmentPlan plan;
  OperationalSolution operations;
  double total_cost = kInf;
  double investment_cost = 0.0;
  double operational_cost = 0.0;
  MilpSolution milp;

  bool feasible() const { return milp.has_solution(); }
};

struct StepOptions {
  MilpOptions milp;
  std::optional<InvestmentPlan> warm_start;
};

StepSolution solve_exact_step(const Network& net, const ScenarioTree& tree,
                              const ExactStepModel& model, const StepOptions& options = {});

/// True cost of a fixed plan under the exact model.
StepSolution evaluate_plan(const Network& net, const ScenarioTree& tree,
                           const ExactStepModel& model, const InvestmentPlan& plan,
                           const LpOptions& options = {});

/// Expected total cost recomputed from a plan and per-node operations.
double recompute_step_cost(const Network& net, const ScenarioTree& tree,
                           const InvestmentPlan& plan, const OperationalSolution& ops,
                           double* investment = nullptr, double* operational = nullptr);

}  // namespace steplearn
