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
#include <sstream>
#include <stdexcept>

#include "steplearn/mlp.hpp"
#include "steplearn/random.hpp"
#include "steplearn/sampler.hpp"

namespace steplearn {

TrainConfig TrainConfig::defaults_for(Target t) {
  TrainConfig c;
  c.batch_size = t == Target::kCost ? 64 : 32;
  return c;
}

Adam::Adam(const std::vector<Layer>& shape, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const Layer& L : shape) {
    Layer z{L.rows, L.cols, std::vector<double>(L.weights.size()), std::vector<double>(L.rows)};
    m_.push_back(z);
    v_.push_back(z);
  }
}

void Adam::step(std::vector<Layer>& params, const std::vector<Layer>& grad, double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, grad[l].weights, m_[l].weights, v_[l].weights);
    update(params[l].bias, grad[l].bias, m_[l].bias, v_[l].bias);
  }
}

bool improves(double candidate, double best, double tolerance) {
  if (std::isinf(best)) return candidate < best;
  return candidate < best - tolerance * std::abs(best);
}

PlateauScheduler::PlateauScheduler(double lr, double factor, std::size_t patience, double floor,
                                   double tolerance)
    : initial_(lr),
      factor_(factor),
      floor_(floor),
      tolerance_(tolerance),
      patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

bool PlateauScheduler::observe(double loss) {
  if (improves(loss, best_, tolerance_)) {
    best_ = loss;
    wait_ = 0;
    return false;
  }
  if (++wait_ < patience_) return false;
  wait_ = 0;
  if (lr() <= floor_) return false;
  ++reductions_;
  return true;
}

double PlateauScheduler::lr() const {
  return std::max(initial_ * std::pow(factor_, double(reductions_)), floor_);
}

Split stratified_split(std::span<const double> shed, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
  Rng rng(derive_seed({seed, 0x73706c6974}));
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < shed.size(); ++i) (shed[i] > 1e-9 ? pos : neg).push_back(i);
  Split s;
  auto take = [&](std::vector<std::size_t>& idx) {
    rng.shuffle(idx.begin(), idx.end());
    const auto k = std::size_t(std::llround(fraction * double(idx.size())));
    s.validation.insert(s.validation.end(), idx.begin(), idx.begin() + k);
    s.train.insert(s.train.end(), idx.begin() + k, idx.end());
  };
  if ((!pos.empty() && pos.size() < 2) || (!neg.empty() && neg.size() < 2)) {
    s.fallback = true;
    std::vector<std::size_t> all(shed.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    take(all);
  } else {
    take(pos);
    take(neg);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

std::string TrainingHistory::to_csv() const {
  std::string out = "epoch,train_loss,val_loss,lr\n";
  for (const EpochRecord& e : epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' +
           format_double(e.validation_loss) + ',' + format_double(e.lr) + '\n';
  }
  return out;
}

double r2_score(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.empty()) return 0.0;
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= double(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

namespace {

struct Matrix {
  std::vector<double> z, y;
};

Matrix normalized(const MlpModel& m, const Dataset& data, std::span<const std::size_t> rows) {
  const auto kept = m.kept_indices();
  Matrix out;
  out.z.reserve(rows.size() * kept.size());
  for (std::size_t r : rows) {
    const DataRow& row = data.rows[r];
    for (std::size_t j = 0; j < kept.size(); ++j) {
      out.z.push_back((row.features[kept[j]] - m.x_mean[j]) / m.x_scale[j]);
    }
    out.y.push_back(m.normalize_target(row.target(m.target)));
  }
  return out;
}

void fit_normalization(MlpModel& m, const Dataset& data, std::span<const std::size_t> rows) {
  const std::size_t n = data.schema.size();
  m.schema = data.schema;
  m.kept.assign(n, false);
  m.dropped_values.assign(n, 0.0);
  m.x_mean.clear();
  m.x_scale.clear();
  m.x_min.clear();
  m.x_max.clear();
  for (std::size_t i = 0; i < n; ++i) {
    double lo = INFINITY, hi = -INFINITY, mean = 0.0;
    for (std::size_t r : rows) {
      const double v = data.rows[r].features[i];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      mean += v;
    }
    mean /= double(rows.size());
    if (hi - lo <= 0.0) {
      m.dropped_values[i] = lo;
      continue;
    }
    double var = 0.0;
    for (std::size_t r : rows) {
      const double d = data.rows[r].features[i] - mean;
      var += d * d;
    }
    m.kept[i] = true;
    m.x_mean.push_back(mean);
    m.x_scale.push_back(std::sqrt(var / double(rows.size())));
    m.x_min.push_back(lo);
    m.x_max.push_back(hi);
  }
  double mean = 0.0, var = 0.0;
  for (std::size_t r : rows) mean += data.rows[r].target(m.target);
  mean /= double(rows.size());
  for (std::size_t r : rows) {
    const double d = data.rows[r].target(m.target) - mean;
    var += d * d;
  }
  m.y_mean = mean;
  m.y_scale = var > 0.0 ? std::sqrt(var / double(rows.size())) : 1.0;
}

double data_loss(const MlpModel& m, const Matrix& x, double delta) {
  return loss_and_gradient(m, x.z, x.y, delta, 0.0, nullptr);
}

}  // namespace

double evaluate_loss(const MlpModel& model, const Dataset& data,
                     std::span<const std::size_t> rows) {
  return data_loss(model, normalized(model, data, rows), model.config.huber_delta);
}

TrainResult train_on_split(const Dataset& data, Target target, const TrainConfig& cfg,
                           const Split& split) {
  if (split.train.empty()) throw std::invalid_argument("training set is empty");
  if (cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) || !(cfg.huber_delta > 0.0) ||
      cfg.l2 < 0.0 || cfg.max_epochs == 0) {
    throw std::invalid_argument("invalid training configuration");
  }
  TrainResult res;
  res.split = split;
  MlpModel& m = res.model;
  m.target = target;
  m.config = cfg;
  fit_normalization(m, data, split.train);
  {
    MlpModel init = random_model(m.x_mean.size(), cfg.hidden, cfg.seed);
    m.layers = std::move(init.layers);
  }
  const Matrix tr = normalized(m, data, split.train);
  const bool has_val = !split.validation.empty();
  const Matrix va = has_val ? normalized(m, data, split.validation) : tr;
  const std::size_t d = m.input_dim(), n = tr.y.size();

  Adam adam(m.layers);
  PlateauScheduler sched(cfg.learning_rate, cfg.plateau_factor, cfg.plateau_patience,
                         cfg.lr_floor, cfg.improvement_tolerance);
  Rng rng(derive_seed({cfg.seed, 0x747261696e}));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<Layer> best = m.layers, grad;
  double best_val = INFINITY;
  std::size_t wait = 0;
  std::vector<double> bz, by;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const double lr = sched.lr();
    rng.shuffle(order.begin(), order.end());
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      bz.clear();
      by.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t r = order[k];
        bz.insert(bz.end(), tr.z.begin() + r * d, tr.z.begin() + (r + 1) * d);
        by.push_back(tr.y[r]);
      }
      const double l = loss_and_gradient(m, bz, by, cfg.huber_delta, cfg.l2, &grad);
      epoch_loss += l * double(end - start);
      adam.step(m.layers, grad, lr);
    }
    epoch_loss /= double(n);
    const double val = data_loss(m, va, cfg.huber_delta);
    if (!std::isfinite(epoch_loss) || !std::isfinite(val)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               " (learning rate " + format_double(lr) + ")");
    }
    res.history.epochs.push_back({epoch, epoch_loss, val, lr});
    m.metrics.epochs_run = epoch;
    if (improves(val, best_val, cfg.improvement_tolerance)) {
      best_val = val;
      best = m.layers;
      m.metrics.best_epoch = epoch;
      wait = 0;
    } else if (++wait >= cfg.patience) {
      break;
    }
    sched.observe(val);
  }
  m.layers = std::move(best);
  m.metrics.train_loss = data_loss(m, tr, cfg.huber_delta);
  m.metrics.validation_loss = data_loss(m, va, cfg.huber_delta);

  std::vector<double> truth, pred;
  for (std::size_t r : has_val ? split.validation : split.train) {
    truth.push_back(data.rows[r].target(target));
    pred.push_back(m.predict(data.rows[r].features));
  }
  m.metrics.validation_r2 = r2_score(truth, pred);
  double mae = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) mae += std::abs(truth[i] - pred[i]);
  m.metrics.validation_mae = truth.empty() ? 0.0 : mae / double(truth.size());
  return res;
}

TrainResult train(const Dataset& data, Target target, const TrainConfig& cfg) {
  const Dataset use = data.filtered(cfg.include_infeasible);
  if (use.rows.empty()) throw std::invalid_argument("no training rows after filtering");
  const Split split = stratified_split(use.targets(Target::kShed), cfg.validation_fraction,
                                       cfg.seed);
  return train_on_split(use, target, cfg, split);
}

TrainConfig sample_hyperparameters(const TrainConfig& base, std::uint64_t seed) {
  Rng rng(derive_seed({seed, 0x68706f}));
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * rng.uniform());
  };
  TrainConfig c = base;
  c.learning_rate = log_uniform(1e-5, 1e-2);
  c.huber_delta = log_uniform(1e-4, 10.0);
  c.l2 = log_uniform(1e-6, 1e-2);
  const std::size_t depth = 2 + rng.below(2);
  const std::size_t width = 32 * (1 + rng.below(16));
  c.hidden.assign(depth, width);
  c.seed = derive_seed({seed, 0x7472});
  return c;
}

std::string HpoResult::leaderboard_csv() const {
  std::string out =
      "rank,trial,learning_rate,huber_delta,l2,layers,width,val_loss,test_loss,status\n";
  for (std::size_t i = 0; i < leaderboard.size(); ++i) {
    const HpoTrial& t = leaderboard[i];
    out += std::to_string(i + 1) + ',' + std::to_string(t.index) + ',' +
           format_double(t.config.learning_rate) + ',' + format_double(t.config.huber_delta) +
           ',' + format_double(t.config.l2) + ',' + std::to_string(t.config.hidden.size()) +
           ',' + std::to_string(t.config.hidden.empty() ? 0 : t.config.hidden[0]) + ',' +
           format_double(t.validation_loss) + ',' + format_double(t.test_loss) + ',' +
           (t.diverged ? "diverged" : "ok") + '\n';
  }
  return out;
}

HpoResult hpo_search(const Dataset& data, Target target, std::size_t budget,
                     const TrainConfig& base, std::uint64_t seed, std::size_t jobs) {
  if (budget < 1) throw std::invalid_argument("search budget must be at least 1");
  const Dataset use = data.filtered(base.include_infeasible);
  if (use.rows.empty()) throw std::invalid_argument("no training rows after filtering");
  // held-out test rows first, then train/validation from the remainder
  const std::vector<double> shed = use.targets(Target::kShed);
  const Split outer = stratified_split(shed, 0.1, derive_seed({seed, 0x74657374}));
  std::vector<double> rest_shed;
  for (std::size_t r : outer.train) rest_shed.push_back(shed[r]);
  const Split inner = stratified_split(rest_shed, base.validation_fraction, seed);
  Split split;
  for (std::size_t i : inner.train) split.train.push_back(outer.train[i]);
  for (std::size_t i : inner.validation) split.validation.push_back(outer.train[i]);

  std::vector<HpoTrial> trials(budget);
  std::vector<TrainResult> results(budget);
  parallel_for(budget, jobs, [&](std::size_t k) {
    HpoTrial& t = trials[k];
    t.index = k;
    t.config = sample_hyperparameters(base, derive_seed({seed, k}));
    try {
      results[k] = train_on_split(use, target, t.config, split);
      t.validation_loss = results[k].model.metrics.validation_loss;
      t.test_loss = evaluate_loss(results[k].model, use, outer.validation);
      results[k].model.metrics.test_loss = t.test_loss;
    } catch (const std::runtime_error& e) {
      t.diverged = true;
      t.validation_loss = INFINITY;
      t.test_loss = INFINITY;
      t.message = e.what();
    }
  });
  HpoResult out;
  out.leaderboard = trials;
  std::stable_sort(out.leaderboard.begin(), out.leaderboard.end(),
                   [](const HpoTrial& a, const HpoTrial& b) {
                     if (a.diverged != b.diverged) return !a.diverged;
                     return a.validation_loss < b.validation_loss;
                   });
  if (out.leaderboard.front().diverged) {
    std::ostringstream msg;
    msg << "all " << budget << " trials diverged:";
    for (const HpoTrial& t : trials) msg << "\n  trial " << t.index << ": " << t.message;
    throw std::runtime_error(msg.str());
  }
  const std::size_t w = out.leaderboard.front().index;
  out.best = std::move(results[w].model);
  out.best_history = std::move(results[w].history);
  return out;
}

}  // namespace steplearn
