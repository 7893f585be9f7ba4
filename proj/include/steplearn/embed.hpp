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

// Mixed-integer encoding of trained ReLU regressors and the surrogate
// planning model that replaces each node's operational block with them.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "steplearn/grid.hpp"
#include "steplearn/milp.hpp"
#include "steplearn/mlp.hpp"
#include "steplearn/opf.hpp"

namespace steplearn {

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Pre-activation intervals per hidden layer and neuron, plus the output's.
struct NeuronBounds {
  std::vector<std::vector<Interval>> hidden;
  Interval output;

  std::size_t neurons() const;
  std::size_t stable_active() const;
  std::size_t stable_inactive() const;
};

/// Interval arithmetic through the network. `box` holds one interval per
/// kept input in original units.
NeuronBounds propagate_bounds(const MlpModel& model, std::span<const Interval> box);

/// Exact bounds when every input is either fixed or a binary taking only its
/// interval's endpoints: the network is evaluated at each corner. Valid for
/// big-M rows because the MILP only admits those corners. Throws when more
/// than `max_free` inputs vary.
NeuronBounds corner_bounds(const MlpModel& model, std::span<const Interval> box,
                           std::size_t max_free = 20);

/// How one kept input enters the encoding: a MILP variable (original units)
/// or a constant.
struct InputWiring {
  std::vector<std::optional<std::size_t>> var;
  std::vector<double> value;

  static InputWiring constants(std::span<const double> values);
};

struct EmbedOptions {
  /// Stable neurons become affine expressions (active) or vanish (inactive)
  /// instead of carrying an activation binary.
  bool eliminate_stable = true;
  /// Lower bound on the output in original units (the nonnegativity clamp).
  double output_floor = 0.0;
};

enum class NeuronState { kUnstable, kActive, kInactive };

struct EmbeddedNeuron {
  std::size_t layer = 0, index = 0;
  Interval bounds;
  NeuronState state = NeuronState::kUnstable;
  // MILP indices, when the neuron has its own variables
  std::optional<std::size_t> upper_part, lower_part, active;
};

struct EmbeddedNetwork {
  std::size_t output = 0;  // normalized output variable
  double output_scale = 1.0, output_shift = 0.0;  // original = scale * var + shift
  std::vector<EmbeddedNeuron> neurons;
  std::size_t variables_added = 0, binaries_added = 0, rows_added = 0;

  double original_output(const std::vector<double>& values) const {
    return output_scale * values.at(output) + output_shift;
  }
};

/// Appends the encoding of `model` to `p`. The output variable is in the
/// model's normalized target units; callers weight it by output_scale.
EmbeddedNetwork embed_network(MilpProblem& p, const MlpModel& model, const NeuronBounds& bounds,
                              const InputWiring& inputs, const std::string& prefix,
                              const EmbedOptions& options = {});

/// Per-neuron bound statistics as CSV.
std::string embedding_report_csv(const std::vector<std::pair<std::string, const EmbeddedNetwork*>>& nets);

struct SurrogateOptions {
  EmbedOptions embed;
  /// Adds predicted shed <= gamma * node demand per node.
  bool reliability_row = false;
  /// Per-node neuron bounds from enumerating the built-status corners
  /// (up to kMaxCornerInputs candidates); interval propagation otherwise.
  bool corner_bounds = true;
  static constexpr std::size_t kMaxCornerInputs = 12;
};

struct SurrogateStepModel {
  MilpProblem problem;
  InvestmentBlock investment;
  std::vector<EmbeddedNetwork> cost, shed;  // per node
  std::vector<NeuronBounds> cost_bounds, shed_bounds;

  /// Full encoding sizes: |S| (2 sum_m |D_m| + 2) continuous plus
  /// |S| sum_m |D_m| activation binaries plus 3 |L^C| |S| investment binaries,
  /// where sum_m |D_m| counts the hidden units of both networks.
  static std::size_t expected_variables(const MlpModel& cost, const MlpModel& shed,
                                        std::size_t nodes, std::size_t candidates);
  static std::size_t expected_binaries(const MlpModel& cost, const MlpModel& shed,
                                       std::size_t nodes, std::size_t candidates);
};

/// `node_features[s]` is the sampler feature vector for node s; its built
/// slots are ignored and wired to the plan's y_built binaries.
SurrogateStepModel build_surrogate_step(const Network& net, const ScenarioTree& tree,
                                        const MlpModel& cost_model, const MlpModel& shed_model,
                                        const std::vector<std::vector<double>>& node_features,
                                        const SurrogateOptions& options = {});

struct SurrogateSolution {
  InvestmentPlan plan;
  double predicted_objective = kInf;
  std::vector<double> predicted_cost, predicted_shed;  // per node, original units
  MilpSolution milp;

  bool feasible() const { return milp.has_solution(); }
};

SurrogateSolution solve_surrogate_step(const SurrogateStepModel& model,
                                       const MilpOptions& options = {});

/// Node features for every tree node under optional per-node scenarios.
std::vector<std::vector<double>> baseline_node_features(
    const Network& net, const ScenarioTree& tree,
    const std::vector<NodeScenario>* scenarios = nullptr);

}  // namespace steplearn
