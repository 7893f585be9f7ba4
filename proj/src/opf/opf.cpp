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
#include <string>

#include "steplearn/opf.hpp"

#include "opf/blocks.hpp"

namespace steplearn {
namespace {

std::vector<std::size_t> candidate_of_line(const Network& net) {
  std::vector<std::size_t> out(net.lines.size(), SIZE_MAX);
  for (std::size_t k = 0; k < net.num_candidates(); ++k) out[net.candidate_line(k)] = k;
  return out;
}

std::string tag(const std::string& prefix, const char* kind, const std::string& what,
                std::size_t t) {
  return prefix + kind + "[" + what + "," + std::to_string(t) + "]";
}

}  // namespace

NodeScenario NodeScenario::identity(const Network& net) {
  return NodeScenario{std::vector<double>(net.generators.size(), 1.0),
                      std::vector<double>(net.loads.size(), 1.0)};
}

double NodeOperatingContext::total_demand() const {
  double s = 0.0;
  for (double d : demand) s += d;
  return s;
}

NodeOperatingContext make_context(const Network& net, const ScenarioTree& tree,
                                  std::size_t node, const std::vector<std::uint8_t>& built,
                                  const NodeScenario* scenario) {
  if (built.size() != net.num_candidates()) {
    throw std::invalid_argument("built vector does not match the candidate set");
  }
  if (scenario && (scenario->generator_factor.size() != net.generators.size() ||
                   scenario->load_factor.size() != net.loads.size())) {
    throw std::invalid_argument("scenario factors do not match the network");
  }
  const TreeNode& n = tree.nodes.at(node);
  const std::size_t T = net.horizon;
  NodeOperatingContext ctx;
  ctx.node_id = n.id;
  ctx.built = built;
  ctx.voll = tree.voll;
  ctx.gamma = tree.gamma;
  ctx.demand.resize(net.loads.size() * T);
  for (std::size_t d = 0; d < net.loads.size(); ++d) {
    const Load& ld = net.loads[d];
    const double f = n.growth * n.load_multiplier(ld.id) * (scenario ? scenario->load_factor[d] : 1.0);
    for (std::size_t t = 0; t < T; ++t) ctx.demand[d * T + t] = ld.profile[t] * f;
  }
  ctx.capacity.resize(net.generators.size());
  ctx.availability.resize(net.generators.size() * T);
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    ctx.capacity[g] = gen.capacity * n.generator_multiplier(gen.id);
    const double f = (scenario && gen.renewable()) ? scenario->generator_factor[g] : 1.0;
    for (std::size_t t = 0; t < T; ++t) {
      ctx.availability[g * T + t] = std::clamp(gen.availability[t] * f, 0.0, 1.0);
    }
  }
  return ctx;
}

// Appends one node's dispatch block. Candidate flows are bounded by data
// when `built_vars` is null and by linking rows otherwise.
OperationBlock append_operation_block(MilpProblem& p, const Network& net,
                                      const NodeOperatingContext& ctx, double weight,
                                      const std::vector<std::size_t>* built_vars,
                                      const std::string& prefix) {
  const std::size_t T = net.horizon;
  const std::size_t G = net.generators.size(), L = net.lines.size(), B = net.buses.size();
  const auto cand = candidate_of_line(net);
  OperationBlock blk;
  blk.horizon = T;

  blk.first_dispatch = p.num_variables();
  for (std::size_t g = 0; g < G; ++g) {
    const Generator& gen = net.generators[g];
    for (std::size_t t = 0; t < T; ++t) {
      p.add_variable(tag(prefix, "p", gen.id, t), 0.0,
                     ctx.capacity[g] * ctx.availability[g * T + t], VarKind::kContinuous,
                     weight * gen.marginal_cost);
    }
  }
  blk.first_flow = p.num_variables();
  for (std::size_t l = 0; l < L; ++l) {
    const Line& line = net.lines[l];
    double cap = line.capacity;
    if (line.is_candidate && !built_vars) cap *= ctx.built[cand[l]] ? 1.0 : 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      p.add_variable(tag(prefix, "f", std::to_string(line.id), t), -cap, cap);
    }
  }
  std::vector<double> bus_demand(B * T, 0.0);
  for (std::size_t d = 0; d < net.loads.size(); ++d) {
    const std::size_t b = net.bus_index(net.loads[d].bus);
    for (std::size_t t = 0; t < T; ++t) bus_demand[b * T + t] += ctx.demand[d * T + t];
  }
  blk.first_shed = p.num_variables();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      p.add_variable(tag(prefix, "ls", std::to_string(net.buses[b]), t), 0.0,
                     bus_demand[b * T + t], VarKind::kContinuous, weight * ctx.voll);
    }
  }

  // Nodal balance.
  std::vector<std::vector<std::size_t>> gens_at(B);
  for (std::size_t g = 0; g < G; ++g) gens_at[net.bus_index(net.generators[g].bus)].push_back(g);
  std::vector<std::vector<std::pair<std::size_t, double>>> lines_at(B);
  for (std::size_t l = 0; l < L; ++l) {
    lines_at[net.bus_index(net.lines[l].from_bus)].emplace_back(l, -1.0);
    lines_at[net.bus_index(net.lines[l].to_bus)].emplace_back(l, 1.0);
  }
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<Term> terms;
      for (std::size_t g : gens_at[b]) terms.push_back({blk.dispatch(g, t), 1.0});
      for (auto [l, sign] : lines_at[b]) terms.push_back({blk.flow(l, t), sign});
      terms.push_back({blk.shed(b, t), 1.0});
      p.add_constraint(tag(prefix, "bal", std::to_string(net.buses[b]), t), std::move(terms),
                       RowSense::kEq, bus_demand[b * T + t]);
    }
  }

  if (built_vars) {
    for (std::size_t k = 0; k < net.num_candidates(); ++k) {
      const std::size_t l = net.candidate_line(k);
      const double cap = net.lines[l].capacity;
      const std::string id = std::to_string(net.lines[l].id);
      for (std::size_t t = 0; t < T; ++t) {
        p.add_constraint(tag(prefix, "fmax", id, t),
                         {{blk.flow(l, t), 1.0}, {(*built_vars)[k], -cap}}, RowSense::kLe, 0.0);
        p.add_constraint(tag(prefix, "fmin", id, t),
                         {{blk.flow(l, t), -1.0}, {(*built_vars)[k], -cap}}, RowSense::kLe, 0.0);
      }
    }
  }

  if (ctx.enforce_reliability) {
    std::vector<Term> terms;
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t t = 0; t < T; ++t) {
        terms.push_back({blk.shed(b, t), 1.0});
        total += bus_demand[b * T + t];
      }
    }
    blk.reliability_row = p.add_constraint(prefix + "reliability", std::move(terms),
                                           RowSense::kLe, ctx.gamma * total);
    blk.has_reliability_row = true;
  }
  return blk;
}

OpfModel build_opf(const Network& net, const NodeOperatingContext& ctx) {
  OpfModel m;
  m.block = append_operation_block(m.problem, net, ctx, 1.0, nullptr, "");
  return m;
}

NodeOperation extract_operation(const Network& net, const OperationBlock& block,
                                const std::vector<double>& values) {
  const std::size_t T = block.horizon;
  NodeOperation op;
  op.dispatch.resize(net.generators.size() * T);
  op.flow.resize(net.lines.size() * T);
  op.shed.resize(net.buses.size() * T);
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    for (std::size_t t = 0; t < T; ++t) {
      const double v = values[block.dispatch(g, t)];
      op.dispatch[g * T + t] = v;
      op.generation_cost += net.generators[g].marginal_cost * v;
    }
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    for (std::size_t t = 0; t < T; ++t) op.flow[l * T + t] = values[block.flow(l, t)];
  }
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      const double v = values[block.shed(b, t)];
      op.shed[b * T + t] = v;
      op.total_shed += v;
    }
  }
  op.feasible = true;
  return op;
}

OpfResult solve_opf(const Network& net, const NodeOperatingContext& ctx) {
  OpfResult out;
  OpfModel m = build_opf(net, ctx);
  MilpSolution s = solve_lp(m.problem);
  if (s.status == SolveStatus::kInfeasible && ctx.enforce_reliability) {
    NodeOperatingContext relaxed = ctx;
    relaxed.enforce_reliability = false;
    m = build_opf(net, relaxed);
    s = solve_lp(m.problem);
    out.infeasible_under_standard = true;
  }
  if (s.status != SolveStatus::kOptimal) {
    throw std::runtime_error(std::string("dispatch LP at node ") + std::to_string(ctx.node_id) +
                             " ended " + to_string(s.status));
  }
  out.operation = extract_operation(net, m.block, s.values);
  out.operation.feasible = !out.infeasible_under_standard;
  out.generation_cost = out.operation.generation_cost;
  out.total_shed = out.operation.total_shed;
  return out;
}

}  // namespace steplearn
