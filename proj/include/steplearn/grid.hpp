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

// Grid data: networks, scenario trees, investment plans and operational
// solutions, plus the structured-text (YAML) loaders documented in
// docs/formats.md.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "steplearn/errors.hpp"

namespace steplearn {

enum class GeneratorKind { kThermal, kWind, kSolar };

const char* to_string(GeneratorKind kind);

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double capacity = 0.0;  // MW
  bool is_candidate = false;
  double cost_per_mw = 0.0;  // $/MW, candidates only
};

struct Generator {
  std::string id;
  int bus = 0;
  GeneratorKind kind = GeneratorKind::kThermal;
  double capacity = 0.0;       // MW
  double marginal_cost = 0.0;  // $/MWh
  /// Hourly availability factor in [0,1]; all ones for thermal units.
  std::vector<double> availability;

  bool renewable() const { return kind != GeneratorKind::kThermal; }
};

struct Load {
  std::string id;
  int bus = 0;
  std::vector<double> profile;  // MW per hour
};

/// Physical system. Build by filling the public fields and calling
/// `finalize()`, which validates and indexes; loaders do this for you.
struct Network {
  std::string name;
  std::size_t horizon = 0;
  std::vector<int> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  /// Validates every invariant and builds the lookup tables. Throws
  /// ValidationError naming the first offending field.
  void finalize();

  std::size_t bus_index(int bus_id) const;
  std::size_t num_candidates() const { return candidate_lines_.size(); }
  /// Index into `lines` of candidate k.
  std::size_t candidate_line(std::size_t k) const { return candidate_lines_[k]; }
  const Line& candidate(std::size_t k) const { return lines[candidate_lines_[k]]; }
  /// Capacity x cost per MW, in $.
  double candidate_base_cost(std::size_t k) const;
  /// Generator indices of wind units, then solar units, in file order.
  const std::vector<std::size_t>& wind_generators() const { return wind_; }
  const std::vector<std::size_t>& solar_generators() const { return solar_; }
  double total_load(std::size_t hour) const;

 private:
  std::map<int, std::size_t> bus_lookup_;
  std::vector<std::size_t> candidate_lines_;
  std::vector<std::size_t> wind_;
  std::vector<std::size_t> solar_;
};

struct TreeNode {
  int id = 0;
  std::optional<int> parent;
  int stage = 0;
  int year = 0;
  double probability = 1.0;
  double growth = 1.0;
  std::map<std::string, double> generator_multipliers;
  std::map<std::string, double> load_multipliers;

  double generator_multiplier(const std::string& gen) const;
  double load_multiplier(const std::string& load) const;
};

/// Scenario tree. Nodes are kept in parent-before-child order with the root
/// at index 0.
struct ScenarioTree {
  std::vector<TreeNode> nodes;
  double discount_rate = 0.06;
  double voll = 0.0;   // $/MWh
  double gamma = 0.0;  // shed fraction allowed
  /// Discount candidate investment costs to the node's year.
  bool discount_investment = true;

  /// Sorts, derives stages, validates. Throws ValidationError.
  void finalize();

  std::size_t size() const { return nodes.size(); }
  std::size_t index_of(int node_id) const;
  std::optional<std::size_t> parent_index(std::size_t i) const { return parent_[i]; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }
  bool is_leaf(std::size_t i) const { return children_[i].empty(); }
  std::vector<std::size_t> leaves() const;
  /// (parent, child) index pairs.
  std::vector<std::pair<std::size_t, std::size_t>> transitions() const;

 private:
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::map<int, std::size_t> lookup_;
};

/// pi_s * (1+r)^(-year_s). Requires r > -1.
double discount_factor(const TreeNode& node, double rate);

/// Per-node investment cost c^ann_{l,s} of candidate k, in $.
double investment_cost(const Network& net, const ScenarioTree& tree,
                       std::size_t candidate, std::size_t node);

Network load_network(const std::string& path);
Network parse_network(const std::string& text);
std::string serialize_network(const Network& net);
void save_network(const Network& net, const std::string& path);

ScenarioTree load_tree(const std::string& path);
ScenarioTree parse_tree(const std::string& text);
std::string serialize_tree(const ScenarioTree& tree);
void save_tree(const ScenarioTree& tree, const std::string& path);

struct PlanBits {
  bool invest = false;  // y_inv
  bool built = false;   // y_built
  bool fresh = false;   // y_new: investment paid at this node
  bool operator==(const PlanBits&) const = default;
};

/// Investment decisions indexed by (candidate, node).
class InvestmentPlan {
 public:
  InvestmentPlan() = default;
  InvestmentPlan(std::size_t num_candidates, std::size_t num_nodes)
      : candidates_(num_candidates), nodes_(num_nodes),
        bits_(num_candidates * num_nodes) {}

  std::size_t num_candidates() const { return candidates_; }
  std::size_t num_nodes() const { return nodes_; }
  PlanBits& at(std::size_t candidate, std::size_t node) {
    return bits_.at(candidate * nodes_ + node);
  }
  const PlanBits& at(std::size_t candidate, std::size_t node) const {
    return bits_.at(candidate * nodes_ + node);
  }
  bool empty() const { return bits_.empty(); }
  bool operator==(const InvestmentPlan&) const = default;

  /// Plan that invests candidate k at each node listed in first_invest[k]
  /// (nodes where the line is newly paid), filling built/invest downstream.
  static InvestmentPlan from_investments(
      const ScenarioTree& tree, std::size_t num_candidates,
      const std::vector<std::vector<std::size_t>>& first_invest);

  /// Compact text form "l0:n0n1...|l1:..." of y_inv bits, for reports.
  std::string invest_string() const;

 private:
  std::size_t candidates_ = 0;
  std::size_t nodes_ = 0;
  std::vector<PlanBits> bits_;
};

struct PlanViolation {
  enum class Kind {
    kLeadTime,          // built(child) != invest(parent)
    kPersistence,       // built(child) < built(parent)
    kUniqueInvestment,  // fresh != invest - built
    kLeafInvestment,    // fresh at a leaf, where the line could never operate
    kRootPrebuilt,      // built at the root, which has no parent to invest
  };
  Kind kind;
  std::size_t candidate;
  std::size_t node;
  std::string message;
};

/// Every violated linking constraint; empty iff the plan is consistent.
/// Throws std::invalid_argument on a dimension mismatch.
std::vector<PlanViolation> validate_plan(const InvestmentPlan& plan,
                                         const ScenarioTree& tree,
                                         std::size_t num_candidates);

/// Every temporally consistent plan, in a fixed order.
std::vector<InvestmentPlan> enumerate_plans(const ScenarioTree& tree,
                                            std::size_t num_candidates,
                                            std::size_t limit);

struct NodeOperation {
  std::vector<double> dispatch;  // [g * T + t]
  std::vector<double> flow;      // [l * T + t]
  std::vector<double> shed;      // [b * T + t]
  double generation_cost = 0.0;  // $
  double total_shed = 0.0;       // MWh
  bool feasible = false;
};

struct OperationalSolution {
  std::vector<NodeOperation> nodes;
};

}  // namespace steplearn
