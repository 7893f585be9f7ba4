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

// Permutation-sampling Shapley attributions for any scalar predictor.

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "steplearn/mlp.hpp"

namespace steplearn {

using Predictor = std::function<double(std::span<const double>)>;

struct ShapleyConfig {
  std::size_t permutations = 200;
  std::size_t background_samples = 100;  // per evaluation point
  std::uint64_t seed = 0;
  /// Every feature ordering against every background row (small inputs only).
  bool exhaustive = false;
  std::size_t jobs = 1;
};

struct AttributionReport {
  std::vector<std::string> features;
  std::vector<std::vector<double>> phi;        // [point][feature]
  std::vector<std::vector<double>> std_error;  // Monte-Carlo standard errors
  std::vector<double> prediction;              // f(x) per point
  double baseline = 0.0;                       // mean f over the whole background
  std::vector<double> efficiency_residual;     // sum phi - (f(x) - baseline)
  std::vector<double> efficiency_std_error;
  std::vector<double> mean_shap, mean_abs_shap;
  std::vector<std::size_t> rank;  // 1 = largest mean |phi|
  ShapleyConfig config;
  std::size_t background_size = 0;

  /// Points whose efficiency residual is within `sigmas` standard errors.
  std::size_t efficiency_passes(double sigmas = 3.0) const;
  std::string attributions_csv() const;
};

AttributionReport shapley_attribute(const Predictor& f, std::vector<std::string> features,
                                    const std::vector<std::vector<double>>& background,
                                    const std::vector<std::vector<double>>& evaluation,
                                    const ShapleyConfig& config);

/// Attributions over the model's full feature schema.
AttributionReport shapley_attribute(const MlpModel& model,
                                    const std::vector<std::vector<double>>& background,
                                    const std::vector<std::vector<double>>& evaluation,
                                    const ShapleyConfig& config);

struct SummaryRow {
  std::string feature;
  double mean_shap = 0.0, mean_abs_shap = 0.0;
  double share = 0.0;  // percent of the total mean |phi|
};

std::vector<SummaryRow> summarize_attributions(const AttributionReport& report,
                                               std::size_t top_k = 10);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace steplearn
