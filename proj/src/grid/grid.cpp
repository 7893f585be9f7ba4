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
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "steplearn/grid.hpp"

namespace steplearn {
namespace {

std::string at(const char* list, std::size_t i, const char* field) {
  std::ostringstream os;
  os << list << "[" << i << "]." << field;
  return os.str();
}

void require_finite_nonneg(double v, const std::string& field) {
  if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
  if (v < 0.0) throw ValidationError(field, "must be nonnegative");
}

}  // namespace

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kThermal:
      return "thermal";
    case GeneratorKind::kWind:
      return "wind";
    case GeneratorKind::kSolar:
      return "solar";
  }
  return "?";
}

void Network::finalize() {
  if (horizon < 1) throw ValidationError("horizon", "must be >= 1");
  if (buses.empty()) throw ValidationError("buses", "must not be empty");
  bus_lookup_.clear();
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (!bus_lookup_.emplace(buses[i], i).second) {
      throw ValidationError(at("buses", i, "id"), "duplicate bus id");
    }
  }
  auto check_bus = [&](int bus, const std::string& field) {
    if (!bus_lookup_.contains(bus)) {
      throw ValidationError(field, "unknown bus " + std::to_string(bus));
    }
  };

  candidate_lines_.clear();
  std::set<int> line_ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    if (!line_ids.insert(l.id).second) {
      throw ValidationError(at("lines", i, "id"), "duplicate line id");
    }
    check_bus(l.from_bus, at("lines", i, "from"));
    check_bus(l.to_bus, at("lines", i, "to"));
    if (l.from_bus == l.to_bus) {
      throw ValidationError(at("lines", i, "to"), "self loop");
    }
    require_finite_nonneg(l.capacity, at("lines", i, "capacity"));
    require_finite_nonneg(l.cost_per_mw, at("lines", i, "cost_per_mw"));
    if (l.is_candidate) candidate_lines_.push_back(i);
  }

  wind_.clear();
  solar_.clear();
  std::set<std::string> gen_ids;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    Generator& g = generators[i];
    if (!gen_ids.insert(g.id).second) {
      throw ValidationError(at("generators", i, "id"), "duplicate id");
    }
    check_bus(g.bus, at("generators", i, "bus"));
    require_finite_nonneg(g.capacity, at("generators", i, "capacity"));
    require_finite_nonneg(g.marginal_cost, at("generators", i, "cost"));
    if (g.availability.empty() && g.kind == GeneratorKind::kThermal) {
      g.availability.assign(horizon, 1.0);
    }
    if (g.availability.size() != horizon) {
      throw ValidationError(at("generators", i, "profile"),
                            "length differs from horizon");
    }
    for (double a : g.availability) {
      if (!std::isfinite(a) || a < 0.0 || a > 1.0) {
        throw ValidationError(at("generators", i, "profile"),
                              "availability must lie in [0,1]");
      }
    }
    if (g.kind == GeneratorKind::kWind) wind_.push_back(i);
    if (g.kind == GeneratorKind::kSolar) solar_.push_back(i);
  }

  std::set<std::string> load_ids;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const Load& d = loads[i];
    if (!load_ids.insert(d.id).second) {
      throw ValidationError(at("loads", i, "id"), "duplicate id");
    }
    check_bus(d.bus, at("loads", i, "bus"));
    if (d.profile.size() != horizon) {
      throw ValidationError(at("loads", i, "profile"),
                            "length differs from horizon");
    }
    for (double v : d.profile) require_finite_nonneg(v, at("loads", i, "profile"));
  }
}

std::size_t Network::bus_index(int bus_id) const {
  auto it = bus_lookup_.find(bus_id);
  if (it == bus_lookup_.end()) {
    throw std::out_of_range("unknown bus " + std::to_string(bus_id));
  }
  return it->second;
}

double Network::candidate_base_cost(std::size_t k) const {
  const Line& l = candidate(k);
  return l.capacity * l.cost_per_mw;
}

double Network::total_load(std::size_t hour) const {
  double s = 0.0;
  for (const Load& d : loads) s += d.profile[hour];
  return s;
}

double TreeNode::generator_multiplier(const std::string& gen) const {
  auto it = generator_multipliers.find(gen);
  return it == generator_multipliers.end() ? 1.0 : it->second;
}

double TreeNode::load_multiplier(const std::string& load) const {
  auto it = load_multipliers.find(load);
  return it == load_multipliers.end() ? 1.0 : it->second;
}

void ScenarioTree::finalize() {
  constexpr double kTol = 1e-9;
  if (nodes.empty()) throw ValidationError("nodes", "tree has no nodes");
  if (!(discount_rate > -1.0) || !std::isfinite(discount_rate)) {
    throw ValidationError("discount_rate", "must exceed -1");
  }
  if (!(voll >= 0.0) || !std::isfinite(voll)) {
    throw ValidationError("voll", "must be finite and nonnegative");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ValidationError("gamma", "must lie in [0, 1)");
  }

  std::map<int, std::size_t> by_id;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!by_id.emplace(nodes[i].id, i).second) {
      throw ValidationError(at("nodes", i, "id"), "duplicate node id");
    }
  }
  std::optional<std::size_t> root;
  std::vector<std::vector<std::size_t>> kids(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (!n.parent) {
      if (root) throw ValidationError(at("nodes", i, "parent"), "multiple roots");
      root = i;
      continue;
    }
    auto it = by_id.find(*n.parent);
    if (it == by_id.end()) {
      throw ValidationError(at("nodes", i, "parent"),
                            "unknown parent " + std::to_string(*n.parent));
    }
    kids[it->second].push_back(i);
  }
  if (!root) throw ValidationError("nodes", "no root node (cycle)");

  // Breadth-first order from the root; anything unreached sits on a cycle.
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue{*root};
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    order.push_back(i);
    for (std::size_t c : kids[i]) queue.push_back(c);
  }
  if (order.size() != nodes.size()) {
    throw ValidationError("nodes", "nodes unreachable from the root (cycle)");
  }

  std::vector<TreeNode> sorted;
  sorted.reserve(nodes.size());
  for (std::size_t i : order) sorted.push_back(nodes[i]);
  nodes = std::move(sorted);

  lookup_.clear();
  for (std::size_t i = 0; i < nodes.size(); ++i) lookup_[nodes[i].id] = i;
  parent_.assign(nodes.size(), std::nullopt);
  children_.assign(nodes.size(), {});
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    std::size_t p = lookup_.at(*nodes[i].parent);
    parent_[i] = p;
    children_[p].push_back(i);
  }

  TreeNode& r = nodes[0];
  if (r.year != 0) throw ValidationError("nodes[root].year", "root year must be 0");
  if (std::abs(r.probability - 1.0) > kTol) {
    throw ValidationError("nodes[root].probability", "root probability must be 1");
  }
  r.stage = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    TreeNode& n = nodes[i];
    std::string where = "nodes[id=" + std::to_string(n.id) + "]";
    if (!std::isfinite(n.probability) || n.probability < 0.0) {
      throw ValidationError(where + ".probability", "must be nonnegative");
    }
    if (!std::isfinite(n.growth) || n.growth < 0.0) {
      throw ValidationError(where + ".growth", "must be nonnegative");
    }
    for (const auto& [k, v] : n.generator_multipliers) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(where + ".generator_multipliers." + k, "must be nonnegative");
      }
    }
    for (const auto& [k, v] : n.load_multipliers) {
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(where + ".load_multipliers." + k, "must be nonnegative");
      }
    }
    if (parent_[i]) {
      const TreeNode& p = nodes[*parent_[i]];
      n.stage = p.stage + 1;
      if (n.year <= p.year) {
        throw ValidationError(where + ".year", "year must increase along the path");
      }
    }
    if (!children_[i].empty()) {
      double s = 0.0;
      for (std::size_t c : children_[i]) s += nodes[c].probability;
      if (std::abs(s - n.probability) > kTol) {
        std::ostringstream os;
        os << "children probabilities sum to " << s << ", parent has "
           << n.probability;
        throw ValidationError(where + ".children", os.str());
      }
    }
  }
}

std::size_t ScenarioTree::index_of(int node_id) const {
  auto it = lookup_.find(node_id);
  if (it == lookup_.end()) {
    throw std::out_of_range("unknown tree node " + std::to_string(node_id));
  }
  return it->second;
}

std::vector<std::size_t> ScenarioTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (is_leaf(i)) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> ScenarioTree::transitions() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 1; i < nodes.size(); ++i) out.emplace_back(*parent_[i], i);
  return out;
}

double discount_factor(const TreeNode& node, double rate) {
  if (!(rate > -1.0)) throw std::invalid_argument("discount rate must exceed -1");
  return node.probability * std::pow(1.0 + rate, -static_cast<double>(node.year));
}

double investment_cost(const Network& net, const ScenarioTree& tree,
                       std::size_t candidate, std::size_t node) {
  double c = net.candidate_base_cost(candidate);
  if (tree.discount_investment) {
    c *= std::pow(1.0 + tree.discount_rate,
                  -static_cast<double>(tree.nodes[node].year));
  }
  return c;
}

InvestmentPlan InvestmentPlan::from_investments(
    const ScenarioTree& tree, std::size_t num_candidates,
    const std::vector<std::vector<std::size_t>>& first_invest) {
  InvestmentPlan plan(num_candidates, tree.size());
  for (std::size_t k = 0; k < num_candidates && k < first_invest.size(); ++k) {
    for (std::size_t s : first_invest[k]) {
      plan.at(k, s).fresh = true;
      // Invested from s on; operational from s's children on.
      std::vector<std::size_t> stack{s};
      while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        plan.at(k, v).invest = true;
        if (v != s) plan.at(k, v).built = true;
        for (std::size_t c : tree.children(v)) stack.push_back(c);
      }
    }
  }
  return plan;
}

std::string InvestmentPlan::invest_string() const {
  std::string out;
  for (std::size_t k = 0; k < candidates_; ++k) {
    if (k) out += '|';
    for (std::size_t s = 0; s < nodes_; ++s) out += at(k, s).invest ? '1' : '0';
  }
  return out;
}

std::vector<PlanViolation> validate_plan(const InvestmentPlan& plan,
                                         const ScenarioTree& tree,
                                         std::size_t num_candidates) {
  if (plan.num_nodes() != tree.size() || plan.num_candidates() != num_candidates) {
    throw std::invalid_argument("plan dimensions do not match tree/candidates");
  }
  using Kind = PlanViolation::Kind;
  std::vector<PlanViolation> out;
  auto add = [&](Kind kind, std::size_t k, std::size_t s, std::string msg) {
    out.push_back({kind, k, s, std::move(msg)});
  };
  for (std::size_t k = 0; k < num_candidates; ++k) {
    for (std::size_t s = 0; s < tree.size(); ++s) {
      const PlanBits& b = plan.at(k, s);
      const int lhs = int(b.invest) - int(b.built);
      if (lhs != int(b.fresh)) {
        add(Kind::kUniqueInvestment, k, s,
            "invest - built = " + std::to_string(lhs) + " but new = " +
                std::to_string(int(b.fresh)));
      }
      if (tree.is_leaf(s) && b.fresh) {
        add(Kind::kLeafInvestment, k, s, "investment at a leaf node");
      }
      if (auto p = tree.parent_index(s)) {
        const PlanBits& pb = plan.at(k, *p);
        if (b.built != pb.invest) {
          add(Kind::kLeadTime, k, s, "built differs from parent's invest");
        }
        if (int(b.built) < int(pb.built)) {
          add(Kind::kPersistence, k, s, "built line disappears");
        }
      } else if (b.built) {
        add(Kind::kRootPrebuilt, k, s, "candidate built at the root");
      }
    }
  }
  return out;
}

std::vector<InvestmentPlan> enumerate_plans(const ScenarioTree& tree,
                                            std::size_t num_candidates,
                                            std::size_t limit) {
  // Per candidate, the admissible first-investment sets are the antichains of
  // non-leaf nodes.
  std::function<std::vector<std::vector<std::size_t>>(std::size_t)> antichains =
      [&](std::size_t s) -> std::vector<std::vector<std::size_t>> {
    if (tree.is_leaf(s)) return {{}};
    std::vector<std::vector<std::size_t>> below{{}};
    for (std::size_t c : tree.children(s)) {
      auto sub = antichains(c);
      std::vector<std::vector<std::size_t>> next;
      for (const auto& a : below) {
        for (const auto& b : sub) {
          auto m = a;
          m.insert(m.end(), b.begin(), b.end());
          next.push_back(std::move(m));
        }
      }
      below = std::move(next);
    }
    below.push_back({s});
    return below;
  };
  const auto per_line = antichains(0);
  double total = std::pow(double(per_line.size()), double(num_candidates));
  if (total > double(limit)) {
    throw std::length_error("plan enumeration exceeds limit");
  }
  std::vector<InvestmentPlan> plans;
  std::vector<std::size_t> choice(num_candidates, 0);
  while (true) {
    std::vector<std::vector<std::size_t>> firsts(num_candidates);
    for (std::size_t k = 0; k < num_candidates; ++k) firsts[k] = per_line[choice[k]];
    plans.push_back(InvestmentPlan::from_investments(tree, num_candidates, firsts));
    std::size_t k = 0;
    while (k < num_candidates && ++choice[k] == per_line.size()) choice[k++] = 0;
    if (k == num_candidates) break;
  }
  return plans;
}

}  // namespace steplearn
