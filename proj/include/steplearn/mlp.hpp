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
#include <span>
#include <string>
#include <vector>

#include "steplearn/dataset.hpp"

namespace steplearn {

/// Dense affine layer, weights row-major (rows = outputs).
struct Layer {
  std::size_t rows = 0, cols = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double w(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double huber_delta = 1.0;
  double l2 = 1e-6;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 5000;
  std::size_t patience = 250;
  std::size_t plateau_patience = 75;
  double plateau_factor = 0.75;
  double lr_floor = 1e-6;
  double improvement_tolerance = 1e-6;  // relative
  double validation_fraction = 0.2;
  std::vector<std::size_t> hidden = {32, 32};
  std::uint64_t seed = 0;
  bool include_infeasible = false;

  /// Batch sizes 64 (cost) and 32 (shed).
  static TrainConfig defaults_for(Target t);
};

struct TrainMetrics {
  double train_loss = 0.0;  // normalized Huber
  double validation_loss = 0.0;
  double validation_r2 = 0.0;  // original units
  double validation_mae = 0.0;
  double test_loss = -1.0;  // < 0 when no test split was used
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

/// Feed-forward ReLU regressor with standardized inputs and output.
struct MlpModel {
  static constexpr int kFormatVersion = 1;

  FeatureSchema schema;            // full sampler schema
  std::vector<bool> kept;          // per schema feature; false = constant, dropped
  std::vector<double> dropped_values;  // per schema feature, value when dropped
  std::vector<double> x_mean, x_scale;  // per kept feature
  std::vector<double> x_min, x_max;     // training range per kept feature
  double y_mean = 0.0, y_scale = 1.0;
  std::vector<Layer> layers;  // hidden layers then the 1-unit output layer
  Target target = Target::kCost;
  TrainConfig config;
  TrainMetrics metrics;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  std::vector<std::size_t> kept_indices() const;

  /// Network output in normalized space for normalized inputs.
  double forward_normalized(std::span<const double> z) const;
  /// Kept features in original units -> target in original units.
  double forward(std::span<const double> x) const;
  /// Full schema feature vector -> target in original units.
  double predict(std::span<const double> features) const;

  double normalize_target(double y) const { return (y - y_mean) / y_scale; }
  double denormalize_target(double z) const { return z * y_scale + y_mean; }
};

/// He-initialised network with identity normalization (tests, HPO seeds).
MlpModel random_model(std::size_t inputs, const std::vector<std::size_t>& hidden,
                      std::uint64_t seed);

double huber_loss(double residual, double delta);
double huber_derivative(double residual, double delta);

/// Mean Huber loss over rows of `z` (normalized, row-major n x input_dim)
/// against normalized targets, plus l2 * sum of squared weights. Fills
/// `gradient` (same shapes as model.layers) when non-null.
double loss_and_gradient(const MlpModel& model, std::span<const double> z,
                         std::span<const double> y, double delta, double l2,
                         std::vector<Layer>* gradient);

class Adam {
 public:
  explicit Adam(const std::vector<Layer>& shape, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);
  void step(std::vector<Layer>& params, const std::vector<Layer>& grad, double lr);

 private:
  std::vector<Layer> m_, v_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

/// Multiplies the rate by `factor` after `patience` stagnant epochs.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience, double floor,
                   double tolerance = 1e-6);
  /// Feeds one validation loss; returns true if the rate was reduced.
  bool observe(double loss);
  double lr() const;
  std::size_t reductions() const { return reductions_; }

 private:
  double initial_, factor_, floor_, tolerance_;
  std::size_t patience_, wait_ = 0, reductions_ = 0;
  double best_;
};

bool improves(double candidate, double best, double tolerance);

struct Split {
  std::vector<std::size_t> train, validation;
  bool fallback = false;  // a stratum was too small; plain random split used
};

/// Splits row indices keeping the shed-positive share in both parts.
Split stratified_split(std::span<const double> shed, double fraction, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0, validation_loss = 0.0, lr = 0.0;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  std::string to_csv() const;
};

struct TrainResult {
  MlpModel model;
  TrainingHistory history;
  Split split;
};

/// Trains on `data` (infeasible rows dropped unless configured) with a
/// stratified validation split.
TrainResult train(const Dataset& data, Target target, const TrainConfig& config);

/// Trains on explicit row subsets of `data` (no filtering applied).
TrainResult train_on_split(const Dataset& data, Target target, const TrainConfig& config,
                           const Split& split);

/// Huber loss of a trained model on the given rows, in normalized units.
double evaluate_loss(const MlpModel& model, const Dataset& data,
                     std::span<const std::size_t> rows);
double r2_score(std::span<const double> truth, std::span<const double> predicted);

struct HpoTrial {
  std::size_t index = 0;
  TrainConfig config;
  double validation_loss = 0.0;
  double test_loss = 0.0;
  bool diverged = false;
  std::string message;
};

struct HpoResult {
  std::vector<HpoTrial> leaderboard;  // sorted by validation loss, diverged last
  MlpModel best;
  TrainingHistory best_history;
  std::string leaderboard_csv() const;
};

/// Draws one configuration from the search box: log-uniform rate, delta and
/// L2; 2 or 3 hidden layers of one width in {32, 64, ..., 512}.
TrainConfig sample_hyperparameters(const TrainConfig& base, std::uint64_t seed);

HpoResult hpo_search(const Dataset& data, Target target, std::size_t budget,
                     const TrainConfig& base, std::uint64_t seed, std::size_t jobs = 1);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace steplearn
