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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "steplearn/dataset.hpp"
#include "steplearn/grid.hpp"
#include "steplearn/opf.hpp"

namespace steplearn {

struct SamplerConfig {
  std::size_t runs = 1;  // N
  double half_range = 0.25;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t config_cap = 12;
};

/// All 2^K built vectors, lexicographic with the first candidate as the most
/// significant bit. Throws std::length_error above `cap` candidates.
std::vector<std::vector<std::uint8_t>> enumerate_configs(std::size_t num_candidates,
                                                         std::size_t cap = 12);

std::uint32_t config_mask(const std::vector<std::uint8_t>& built);

/// Factors 1 + U(-h, h) per renewable generator and per load, from a stream
/// keyed by (seed, node id, draw). Thermal units keep factor 1.
NodeScenario draw_perturbation(const Network& net, double half_range, std::uint64_t seed,
                               int node_id, std::uint64_t draw);

/// y_<line>, wfac_<gen>, sfac_<gen>, dfac_<load>, tau_<line>, growth,
/// gmul_<gen>, lmul_<load>.
FeatureSchema feature_schema(const Network& net);

std::vector<double> node_features(const Network& net, const ScenarioTree& tree,
                                  std::size_t node, const NodeScenario& scenario,
                                  const std::vector<std::uint8_t>& built);

/// Inverse of node_features for the perturbation part.
NodeScenario scenario_from_features(const Network& net, const FeatureSchema& schema,
                                    const std::vector<double>& features);

struct SampleSummary {
  std::size_t expected_rows = 0;
  std::size_t rows = 0;
  std::size_t infeasible_rows = 0;
  std::size_t shed_rows = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
  double wall_seconds = 0.0;

  double shed_fraction() const { return rows ? double(shed_rows) / double(rows) : 0.0; }
};

/// Rows ordered by draw, then tree node, then configuration.
Dataset generate_dataset(const Network& net, const ScenarioTree& tree,
                         const SamplerConfig& config, SampleSummary* summary = nullptr);

struct AuditReport {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  double worst_relative_error = 0.0;
};

/// Re-solves rows from their stored features and compares targets.
AuditReport audit_dataset(const Network& net, const ScenarioTree& tree, const Dataset& data,
                          std::size_t stride = 1, double tolerance = 1e-6);

/// Runs fn(i) for i in [0, n) over `jobs` threads; exceptions propagate.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace steplearn
