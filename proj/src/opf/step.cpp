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

#include <cmath>
#include <stdexcept>
#include <string>

#include "opf/blocks.hpp"
#include "steplearn/opf.hpp"

namespace steplearn {

std::size_t ExactStepModel::expected_variables(const Network& net, const ScenarioTree& tree) {
  return (net.generators.size() + net.lines.size() + net.buses.size()) * net.horizon *
             tree.size() +
         3 * net.num_candidates() * tree.size();
}

std::vector<std::uint8_t> InvestmentBlock::assignment(const MilpProblem& problem,
                                                      const InvestmentPlan& plan) const {
  if (plan.num_candidates() != num_candidates || plan.num_nodes() != num_nodes) {
    throw std::invalid_argument("plan dimensions do not match the model");
  }
  std::vector<double> dense(problem.num_variables(), 0.0);
  for (std::size_t k = 0; k < num_candidates; ++k) {
    for (std::size_t s = 0; s < num_nodes; ++s) {
      const PlanBits& b = plan.at(k, s);
      dense[invest[k * num_nodes + s]] = b.invest;
      dense[built[k * num_nodes + s]] = b.built;
      dense[fresh[k * num_nodes + s]] = b.fresh;
    }
  }
  std::vector<std::uint8_t> out;
  for (std::size_t j : problem.binary_indices()) out.push_back(dense[j] > 0.5 ? 1 : 0);
  return out;
}

InvestmentPlan InvestmentBlock::plan_from(const std::vector<double>& values) const {
  InvestmentPlan plan(num_candidates, num_nodes);
  for (std::size_t k = 0; k < num_candidates; ++k) {
    for (std::size_t s = 0; s < num_nodes; ++s) {
      PlanBits& b = plan.at(k, s);
      b.invest = values.at(invest[k * num_nodes + s]) > 0.5;
      b.built = values.at(built[k * num_nodes + s]) > 0.5;
      b.fresh = values.at(fresh[k * num_nodes + s]) > 0.5;
    }
  }
  return plan;
}

InvestmentBlock append_investment_block(MilpProblem& p, const Network& net,
                                        const ScenarioTree& tree) {
  InvestmentBlock m;
  const std::size_t K = net.num_candidates(), S = tree.size();
  m.num_candidates = K;
  m.num_nodes = S;
  m.invest.resize(K * S);
  m.built.resize(K * S);
  m.fresh.resize(K * S);
  for (std::size_t k = 0; k < K; ++k) {
    const std::string line = std::to_string(net.candidate(k).id);
    for (std::size_t s = 0; s < S; ++s) {
      const std::string at = "[" + line + "," + std::to_string(tree.nodes[s].id) + "]";
      const std::size_t i = k * S + s;
      m.invest[i] = p.add_binary("yinv" + at);
      m.built[i] = p.add_binary("ybuilt" + at);
      m.fresh[i] = p.add_binary("ynew" + at,
                                tree.nodes[s].probability * investment_cost(net, tree, k, s));
      if (s == 0) p.set_bounds(m.built[i], 0.0, 0.0);
      if (tree.is_leaf(s)) p.set_bounds(m.fresh[i], 0.0, 0.0);
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    const std::string line = std::to_string(net.candidate(k).id);
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t i = k * S + s;
      const std::string at = "[" + line + "," + std::to_string(tree.nodes[s].id) + "]";
      p.add_constraint("once" + at, {{m.invest[i], 1.0}, {m.built[i], -1.0}, {m.fresh[i], -1.0}},
                       RowSense::kEq, 0.0);
    }
    for (auto [parent, child] : tree.transitions()) {
      const std::size_t pi = k * S + parent, ci = k * S + child;
      const std::string at = "[" + line + "," + std::to_string(tree.nodes[child].id) + "]";
      p.add_constraint("lead" + at, {{m.built[ci], 1.0}, {m.invest[pi], -1.0}}, RowSense::kEq,
                       0.0);
      p.add_constraint("keep" + at, {{m.built[ci], 1.0}, {m.built[pi], -1.0}}, RowSense::kGe,
                       0.0);
    }
  }
  return m;
}

ExactStepModel build_exact_step(const Network& net, const ScenarioTree& tree,
                                const std::vector<NodeScenario>* scenarios) {
  if (scenarios && scenarios->size() != tree.size()) {
    throw std::invalid_argument("one scenario per tree node is required");
  }
  ExactStepModel m;
  const std::size_t K = net.num_candidates(), S = tree.size();
  MilpProblem& p = m.problem;
  m.investment = append_investment_block(p, net, tree);

  const std::vector<std::uint8_t> none(K, 0);
  m.blocks.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    const NodeOperatingContext ctx =
        make_context(net, tree, s, none, scenarios ? &(*scenarios)[s] : nullptr);
    std::vector<std::size_t> built_vars(K);
    for (std::size_t k = 0; k < K; ++k) built_vars[k] = m.investment.built[k * S + s];
    const double w = discount_factor(tree.nodes[s], tree.discount_rate);
    m.blocks.push_back(append_operation_block(p, net, ctx, w, &built_vars,
                                              "n" + std::to_string(tree.nodes[s].id) + "."));
  }
  return m;
}

double recompute_step_cost(const Network& net, const ScenarioTree& tree,
                           const InvestmentPlan& plan, const OperationalSolution& ops,
                           double* investment, double* operational) {
  double inv = 0.0, op = 0.0;
  for (std::size_t s = 0; s < tree.size(); ++s) {
    for (std::size_t k = 0; k < net.num_candidates(); ++k) {
      if (plan.at(k, s).fresh) inv += tree.nodes[s].probability * investment_cost(net, tree, k, s);
    }
    const NodeOperation& n = ops.nodes.at(s);
    op += discount_factor(tree.nodes[s], tree.discount_rate) *
          (n.generation_cost + tree.voll * n.total_shed);
  }
  if (investment) *investment = inv;
  if (operational) *operational = op;
  return inv + op;
}

namespace {

StepSolution finish(const Network& net, const ScenarioTree& tree, const ExactStepModel& model,
                    MilpSolution milp) {
  StepSolution out;
  out.milp = std::move(milp);
  if (!out.milp.has_solution()) return out;
  out.plan = model.plan_from(out.milp.values);
  for (const OperationBlock& b : model.blocks) {
    out.operations.nodes.push_back(extract_operation(net, b, out.milp.values));
  }
  out.total_cost = recompute_step_cost(net, tree, out.plan, out.operations, &out.investment_cost,
                                       &out.operational_cost);
  return out;
}

}  // namespace

StepSolution solve_exact_step(const Network& net, const ScenarioTree& tree,
                              const ExactStepModel& model, const StepOptions& options) {
  MilpOptions mo = options.milp;
  if (options.warm_start) {
    const auto a = model.assignment(*options.warm_start);
    std::vector<double> ws(model.problem.num_variables(), 0.0);
    const auto bins = model.problem.binary_indices();
    for (std::size_t i = 0; i < bins.size(); ++i) ws[bins[i]] = a[i];
    mo.warm_start = std::move(ws);
  }
  return finish(net, tree, model, solve_milp(model.problem, mo));
}

StepSolution evaluate_plan(const Network& net, const ScenarioTree& tree,
                           const ExactStepModel& model, const InvestmentPlan& plan,
                           const LpOptions& options) {
  return finish(net, tree, model,
                fix_binaries_and_solve(model.problem, model.assignment(plan), options));
}

}  // namespace steplearn
