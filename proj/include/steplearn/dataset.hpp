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
#include <string>
#include <vector>

#include "steplearn/errors.hpp"

namespace steplearn {

enum class Target { kCost, kShed };

const char* to_string(Target t);
Target parse_target(const std::string& name);

/// Ordered model inputs: built bits first, then continuous node features.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<bool> binary;

  std::size_t size() const { return names.size(); }
  std::size_t index_of(const std::string& name) const;
  bool operator==(const FeatureSchema&) const = default;
};

struct DataRow {
  int node_id = 0;
  std::uint32_t config_mask = 0;
  std::vector<double> features;
  double cost = 0.0;  // $
  double shed = 0.0;  // MWh
  bool infeasible = false;

  double target(Target t) const { return t == Target::kCost ? cost : shed; }
};

struct Dataset {
  FeatureSchema schema;
  std::vector<DataRow> rows;

  /// CSV: node_id, config_mask, features..., target_cost, target_shed,
  /// infeasible_flag. Doubles use shortest round-trip formatting.
  void write_csv(const std::string& path) const;
  std::string to_csv() const;
  static Dataset read_csv(const std::string& path);
  static Dataset parse_csv(const std::string& text);

  Dataset filtered(bool include_infeasible) const;
  std::vector<double> targets(Target t) const;
};

/// Shortest decimal text that round-trips.
std::string format_double(double v);

}  // namespace steplearn
