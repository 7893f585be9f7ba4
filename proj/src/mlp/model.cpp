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

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "steplearn/grid.hpp"
#include "steplearn/kernels.hpp"
#include "steplearn/mlp.hpp"
#include "steplearn/random.hpp"

namespace steplearn {

using nlohmann::json;

std::vector<std::size_t> MlpModel::kept_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (kept[i]) out.push_back(i);
  }
  return out;
}

double MlpModel::forward_normalized(std::span<const double> z) const {
  if (z.size() != input_dim()) {
    throw std::invalid_argument("model expects " + std::to_string(input_dim()) +
                                " inputs, got " + std::to_string(z.size()));
  }
  std::vector<double> a(z.begin(), z.end()), next;
  for (std::size_t m = 0; m < layers.size(); ++m) {
    const Layer& L = layers[m];
    next.assign(L.rows, 0.0);
    kernels::affine(L.weights, L.bias, a, next);
    if (m + 1 < layers.size()) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    a.swap(next);
  }
  return a[0];
}

double MlpModel::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("model expects " + std::to_string(input_dim()) +
                                " inputs, got " + std::to_string(x.size()));
  }
  std::vector<double> z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - x_mean[i]) / x_scale[i];
  return denormalize_target(forward_normalized(z));
}

double MlpModel::predict(std::span<const double> features) const {
  if (features.size() != schema.size()) {
    throw std::invalid_argument("model expects " + std::to_string(schema.size()) +
                                " schema features, got " + std::to_string(features.size()));
  }
  std::vector<double> x;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (kept[i]) x.push_back(features[i]);
  }
  return forward(x);
}

MlpModel random_model(std::size_t inputs, const std::vector<std::size_t>& hidden,
                      std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x6d6c70}));
  MlpModel m;
  std::size_t fan_in = inputs;
  auto add = [&](std::size_t rows, double gain) {
    Layer L;
    L.rows = rows;
    L.cols = fan_in;
    L.weights.resize(rows * fan_in);
    L.bias.assign(rows, 0.0);
    const double sd = std::sqrt(gain / double(std::max<std::size_t>(1, fan_in)));
    for (double& w : L.weights) w = sd * rng.normal();
    m.layers.push_back(std::move(L));
    fan_in = rows;
  };
  for (std::size_t h : hidden) add(h, 2.0);
  add(1, 1.0);
  m.schema.names.resize(inputs);
  m.schema.binary.assign(inputs, false);
  for (std::size_t i = 0; i < inputs; ++i) m.schema.names[i] = "x" + std::to_string(i);
  m.kept.assign(inputs, true);
  m.dropped_values.assign(inputs, 0.0);
  m.x_mean.assign(inputs, 0.0);
  m.x_scale.assign(inputs, 1.0);
  m.x_min.assign(inputs, -1.0);
  m.x_max.assign(inputs, 1.0);
  return m;
}

double huber_loss(double r, double delta) {
  const double a = std::abs(r);
  return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

double huber_derivative(double r, double delta) {
  if (r > delta) return delta;
  if (r < -delta) return -delta;
  return r;
}

double loss_and_gradient(const MlpModel& model, std::span<const double> z,
                         std::span<const double> y, double delta, double l2,
                         std::vector<Layer>* gradient) {
  const std::size_t d = model.input_dim(), n = y.size(), L = model.layers.size();
  if (z.size() != n * d) throw std::invalid_argument("input matrix shape mismatch");
  if (gradient) {
    gradient->resize(L);
    for (std::size_t m = 0; m < L; ++m) {
      (*gradient)[m].rows = model.layers[m].rows;
      (*gradient)[m].cols = model.layers[m].cols;
      (*gradient)[m].weights.assign(model.layers[m].weights.size(), 0.0);
      (*gradient)[m].bias.assign(model.layers[m].rows, 0.0);
    }
  }
  // acts[0] = input, acts[m+1] = post-activation of layer m (output layer: raw)
  std::vector<std::vector<double>> acts(L + 1);
  for (std::size_t m = 0; m < L; ++m) acts[m + 1].resize(model.layers[m].rows);
  std::vector<double> g, gprev;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acts[0].assign(z.begin() + i * d, z.begin() + (i + 1) * d);
    for (std::size_t m = 0; m < L; ++m) {
      const Layer& W = model.layers[m];
      kernels::affine(W.weights, W.bias, acts[m], acts[m + 1]);
      if (m + 1 < L) {
        for (double& v : acts[m + 1]) v = v > 0.0 ? v : 0.0;
      }
    }
    const double r = acts[L][0] - y[i];
    loss += huber_loss(r, delta);
    if (!gradient) continue;
    g.assign(1, huber_derivative(r, delta) / double(n));
    for (std::size_t m = L; m-- > 0;) {
      Layer& G = (*gradient)[m];
      kernels::rank1_update(1.0, g, acts[m], G.weights);
      kernels::axpy(1.0, g, G.bias);
      if (m == 0) break;
      gprev.assign(model.layers[m].cols, 0.0);
      kernels::affine_transpose_accumulate(model.layers[m].weights, g, gprev);
      // ReLU mask: post-activation zero means the unit was off
      for (std::size_t j = 0; j < gprev.size(); ++j) {
        if (acts[m][j] <= 0.0) gprev[j] = 0.0;
      }
      g.swap(gprev);
    }
  }
  loss /= double(std::max<std::size_t>(1, n));
  for (std::size_t m = 0; m < L; ++m) {
    const auto& w = model.layers[m].weights;
    loss += l2 * kernels::dot(w, w);
    if (gradient) kernels::axpy(2.0 * l2, w, (*gradient)[m].weights);
  }
  return loss;
}

// ---- serialization ----

namespace {

json config_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"huber_delta", c.huber_delta},
              {"l2", c.l2},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"plateau_patience", c.plateau_patience},
              {"plateau_factor", c.plateau_factor},
              {"lr_floor", c.lr_floor},
              {"improvement_tolerance", c.improvement_tolerance},
              {"validation_fraction", c.validation_fraction},
              {"hidden", c.hidden},
              {"seed", c.seed},
              {"include_infeasible", c.include_infeasible}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.learning_rate = j.at("learning_rate");
  c.huber_delta = j.at("huber_delta");
  c.l2 = j.at("l2");
  c.batch_size = j.at("batch_size");
  c.max_epochs = j.at("max_epochs");
  c.patience = j.at("patience");
  c.plateau_patience = j.at("plateau_patience");
  c.plateau_factor = j.at("plateau_factor");
  c.lr_floor = j.at("lr_floor");
  c.improvement_tolerance = j.at("improvement_tolerance");
  c.validation_fraction = j.at("validation_fraction");
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.seed = j.at("seed");
  c.include_infeasible = j.at("include_infeasible");
  return c;
}

}  // namespace

std::string model_to_json(const MlpModel& m) {
  json layers = json::array();
  for (const Layer& L : m.layers) {
    layers.push_back({{"shape", {L.rows, L.cols}}, {"weights", L.weights}, {"bias", L.bias}});
  }
  std::vector<int> kept(m.kept.begin(), m.kept.end());
  std::vector<int> binary(m.schema.binary.begin(), m.schema.binary.end());
  json j{{"format", "steplearn-mlp"},
         {"version", MlpModel::kFormatVersion},
         {"target", to_string(m.target)},
         {"features", m.schema.names},
         {"binary", binary},
         {"kept", kept},
         {"dropped_values", m.dropped_values},
         {"x_mean", m.x_mean},
         {"x_scale", m.x_scale},
         {"x_min", m.x_min},
         {"x_max", m.x_max},
         {"y_mean", m.y_mean},
         {"y_scale", m.y_scale},
         {"activation", "relu"},
         {"layers", layers},
         {"train_config", config_json(m.config)},
         {"metrics",
          {{"train_loss", m.metrics.train_loss},
           {"validation_loss", m.metrics.validation_loss},
           {"validation_r2", m.metrics.validation_r2},
           {"validation_mae", m.metrics.validation_mae},
           {"test_loss", m.metrics.test_loss},
           {"best_epoch", m.metrics.best_epoch},
           {"epochs_run", m.metrics.epochs_run}}}};
  return j.dump(1) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  try {
    if (j.at("format") != "steplearn-mlp") throw ParseError("model file: not a steplearn model");
    const int version = j.at("version");
    if (version != MlpModel::kFormatVersion) {
      throw ParseError("model file: schema version " + std::to_string(version) +
                       " is not supported (expected " +
                       std::to_string(MlpModel::kFormatVersion) + ")");
    }
    MlpModel m;
    m.target = parse_target(j.at("target"));
    m.schema.names = j.at("features").get<std::vector<std::string>>();
    for (int b : j.at("binary").get<std::vector<int>>()) m.schema.binary.push_back(b != 0);
    for (int k : j.at("kept").get<std::vector<int>>()) m.kept.push_back(k != 0);
    m.dropped_values = j.at("dropped_values").get<std::vector<double>>();
    m.x_mean = j.at("x_mean").get<std::vector<double>>();
    m.x_scale = j.at("x_scale").get<std::vector<double>>();
    m.x_min = j.at("x_min").get<std::vector<double>>();
    m.x_max = j.at("x_max").get<std::vector<double>>();
    m.y_mean = j.at("y_mean");
    m.y_scale = j.at("y_scale");
    for (const json& l : j.at("layers")) {
      Layer L;
      L.rows = l.at("shape").at(0);
      L.cols = l.at("shape").at(1);
      L.weights = l.at("weights").get<std::vector<double>>();
      L.bias = l.at("bias").get<std::vector<double>>();
      if (L.weights.size() != L.rows * L.cols || L.bias.size() != L.rows) {
        throw ParseError("model file: layer shape does not match its arrays");
      }
      m.layers.push_back(std::move(L));
    }
    m.config = config_from(j.at("train_config"));
    const json& mt = j.at("metrics");
    m.metrics.train_loss = mt.at("train_loss");
    m.metrics.validation_loss = mt.at("validation_loss");
    m.metrics.validation_r2 = mt.at("validation_r2");
    m.metrics.validation_mae = mt.at("validation_mae");
    m.metrics.test_loss = mt.at("test_loss");
    m.metrics.best_epoch = mt.at("best_epoch");
    m.metrics.epochs_run = mt.at("epochs_run");

    const std::size_t n = m.schema.names.size();
    const std::size_t k = m.kept_indices().size();
    if (m.schema.binary.size() != n || m.kept.size() != n || m.dropped_values.size() != n ||
        m.x_mean.size() != k || m.x_scale.size() != k || m.x_min.size() != k ||
        m.x_max.size() != k || m.layers.empty() || m.layers.front().cols != k ||
        m.layers.back().rows != 1) {
      throw ParseError("model file: inconsistent dimensions");
    }
    for (std::size_t i = 1; i < m.layers.size(); ++i) {
      if (m.layers[i].cols != m.layers[i - 1].rows) {
        throw ParseError("model file: layer " + std::to_string(i) + " input width mismatch");
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << model_to_json(model);
  if (!f) throw std::runtime_error("write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace steplearn
