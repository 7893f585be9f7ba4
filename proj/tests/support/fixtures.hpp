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

// Small hand-built systems shared by the sampler, embedding and pipeline tests.

#pragma once

#include "steplearn/grid.hpp"

namespace steplearn::testing {

// Three buses, two candidates into the load pocket, a wind unit and a solar unit.
inline Network pocket() {
  Network n;
  n.name = "pocket";
  n.horizon = 4;
  n.buses = {1, 2, 3};
  n.lines.push_back(Line{1, 1, 2, 3.0, false, 0.0});
  n.lines.push_back(Line{2, 2, 3, 10.0, false, 0.0});
  n.lines.push_back(Line{3, 1, 3, 2.0, true, 1000.0});
  n.lines.push_back(Line{4, 1, 2, 1.0, true, 2000.0});
  n.generators.push_back(Generator{"G1", 1, GeneratorKind::kThermal, 20.0, 10.0, {}});
  n.generators.push_back(Generator{"WT1", 3, GeneratorKind::kWind, 2.0, 0.0, {0.3, 0.9, 0.5, 0.1}});
  n.generators.push_back(Generator{"PV1", 2, GeneratorKind::kSolar, 1.0, 0.0, {0.0, 0.6, 1.0, 0.2}});
  n.loads.push_back(Load{"D2", 2, {1.0, 1.2, 1.1, 0.9}});
  n.loads.push_back(Load{"D3", 3, {3.0, 4.0, 4.5, 3.5}});
  n.finalize();
  return n;
}

inline ScenarioTree three_nodes() {
  ScenarioTree t;
  t.voll = 500.0;
  t.gamma = 0.5;
  t.nodes.push_back(TreeNode{1, std::nullopt, 0, 0, 1.0, 1.0, {}, {}});
  t.nodes.push_back(TreeNode{2, 1, 0, 5, 0.5, 1.1, {{"WT1", 1.2}}, {}});
  t.nodes.push_back(TreeNode{3, 1, 0, 5, 0.5, 1.2, {}, {{"D3", 1.1}}});
  t.finalize();
  return t;
}

}  // namespace steplearn::testing
