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

// Experiment configuration and the end-to-end steps behind the command-line
// tool: sampling, training, tuning, benchmarking, sweeps and attribution.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steplearn/embed.hpp"
#include "steplearn/explain.hpp"
#include "steplearn/grid.hpp"
#include "steplearn/mlp.hpp"
#include "steplearn/opf.hpp"
#include "steplearn/sampler.hpp"

namespace steplearn {

struct ExperimentConfig {
  std::string network_path, tree_path;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  double gap = 1e-3;
  double time_limit = 1000.0;

  SamplerConfig sampler;
  TrainConfig train_cost = TrainConfig::defaults_for(Target::kCost);
  TrainConfig train_shed = TrainConfig::defaults_for(Target::kShed);
  std::size_t tune_budget = 40;
  SurrogateOptions surrogate;

  std::size_t instances = 5;
  std::vector<double> kappa_levels = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
  std::vector<double> gamma_levels;  // empty: the tree's own gamma

  std::size_t explain_background = 10000;
  std::size_t explain_evaluation = 1000;
  ShapleyConfig shapley;
  std::size_t top_k = 10;

  /// Sets the master seed and every stream derived from it.
  void reseed(std::uint64_t master);
  void set_jobs(std::size_t n);

  const TrainConfig& train_config(Target t) const {
    return t == Target::kCost ? train_cost : train_shed;
  }
  TrainConfig& train_config(Target t) { return t == Target::kCost ? train_cost : train_shed; }

  std::string dataset_path() const { return output_dir + "/dataset.csv"; }
  std::string model_path(Target t) const {
    return output_dir + "/model_" + to_string(t) + ".json";
  }
};

/// Reads the YAML experiment file; relative paths resolve against its folder.
ExperimentConfig load_experiment(const std::string& path);
ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir);

/// Writes `text` to `path`, creating parent folders.
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

struct PipelineInputs {
  Network network;
  ScenarioTree tree;
};
PipelineInputs load_inputs(const ExperimentConfig& cfg);

// ---- sample ----
struct SampleOutcome {
  Dataset data;
  SampleSummary summary;
};
SampleOutcome run_sample(const ExperimentConfig& cfg, const PipelineInputs& in);
std::string summary_json(const SampleSummary& s, bool include_timing);

// ---- train / tune ----
TrainResult run_train(const ExperimentConfig& cfg, const Dataset& data, Target target);
HpoResult run_tune(const ExperimentConfig& cfg, const Dataset& data, Target target);

// ---- test instances ----
/// Fresh per-node perturbations for test instance `index`, drawn from a seed
/// stream disjoint from the sampler's.
std::vector<NodeScenario> instance_scenarios(const Network& net, const ScenarioTree& tree,
                                             double half_range, std::uint64_t seed,
                                             std::size_t index);

struct ExactRun {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double objective = kInf;
  double solve_seconds = 0.0, total_seconds = 0.0;
  InvestmentPlan plan;
  std::size_t variables = 0, constraints = 0, binaries = 0;
  bool feasible() const { return std::isfinite(objective); }
};

struct SurrogateRun {
  SolveStatus status = SolveStatus::kNumericalFailure;
  double predicted_objective = kInf;
  double true_cost = kInf;  // exact re-evaluation of the plan
  double solve_seconds = 0.0, total_seconds = 0.0;
  InvestmentPlan plan;
  bool plan_valid = false;
  std::size_t variables = 0, constraints = 0, binaries = 0;
  std::vector<double> predicted_cost, predicted_shed;
};

struct InstanceResult {
  std::size_t index = 0;
  double half_range = 0.0;
  double gamma = 0.0;
  ExactRun exact, warm;
  SurrogateRun surrogate;
  bool warm_rejected = false;
  std::string error;

  bool plans_agree() const;
  /// Percent; from the exact re-evaluation, never the predicted objective.
  double gap_percent() const;
};

/// One exact / surrogate / warm-started solve on a perturbed tree.
InstanceResult run_instance(const PipelineInputs& in, const MlpModel& cost,
                            const MlpModel& shed, const std::vector<NodeScenario>& scenarios,
                            const ExperimentConfig& cfg, bool with_warm_start);

struct BenchmarkReport {
  std::vector<InstanceResult> instances;
  std::string results_csv() const;  // deterministic columns only
  std::string timing_csv() const;
  std::string plan_matrix_csv(const Network& net, const ScenarioTree& tree) const;
  std::string model_sizes_csv() const;
};

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const PipelineInputs& in,
                              const MlpModel& cost, const MlpModel& shed);

struct SweepReport {
  std::vector<InstanceResult> cells;  // kappa-major, then gamma
  std::string csv() const;
  /// Share of cells at kappa level 0 whose plans agree.
  double agreement_at_zero() const;
};

SweepReport run_sweep(const ExperimentConfig& cfg, const PipelineInputs& in,
                      const MlpModel& cost, const MlpModel& shed);

// ---- explain ----
AttributionReport run_explain(const ExperimentConfig& cfg, const Dataset& data,
                              const MlpModel& model);

/// Reads "line@node" investment entries (one per line or comma separated).
InvestmentPlan parse_plan(const Network& net, const ScenarioTree& tree, const std::string& text);
std::string format_plan(const Network& net, const ScenarioTree& tree, const InvestmentPlan& plan);

}  // namespace steplearn
