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
#include <numeric>
#include <stdexcept>

#include "steplearn/explain.hpp"
#include "steplearn/random.hpp"
#include "steplearn/sampler.hpp"

namespace steplearn {

std::size_t AttributionReport::efficiency_passes(double sigmas) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < efficiency_residual.size(); ++p) {
    n += std::abs(efficiency_residual[p]) <= sigmas * efficiency_std_error[p] + 1e-9 *
         std::max(1.0, std::abs(prediction[p]));
  }
  return n;
}

std::string AttributionReport::attributions_csv() const {
  std::string out = "point,prediction";
  for (const std::string& f : features) out += ',' + f;
  out += ",efficiency_residual,efficiency_se\n";
  for (std::size_t p = 0; p < phi.size(); ++p) {
    out += std::to_string(p) + ',' + format_double(prediction[p]);
    for (double v : phi[p]) out += ',' + format_double(v);
    out += ',' + format_double(efficiency_residual[p]) + ',' +
           format_double(efficiency_std_error[p]) + '\n';
  }
  return out;
}

namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / double(n);
    m2 += d * (x - mean);
  }
  double std_error() const {
    return n > 1 ? std::sqrt(m2 / double(n - 1) / double(n)) : 0.0;
  }
};

// One walk from background row b to x along `order`; adds each feature's
// marginal contribution to `acc`. Returns f(b).
double walk(const Predictor& f, std::span<const double> x, std::span<const double> b,
            const std::vector<std::size_t>& order, std::vector<double>& z,
            std::vector<double>& contrib) {
  z.assign(b.begin(), b.end());
  const double fb = f(z);
  double prev = fb;
  for (std::size_t i : order) {
    z[i] = x[i];
    const double cur = f(z);
    contrib[i] = cur - prev;
    prev = cur;
  }
  return fb;
}

}  // namespace

AttributionReport shapley_attribute(const Predictor& f, std::vector<std::string> features,
                                    const std::vector<std::vector<double>>& background,
                                    const std::vector<std::vector<double>>& evaluation,
                                    const ShapleyConfig& config) {
  const std::size_t d = features.size();
  if (background.empty()) throw std::invalid_argument("background set is empty");
  if (!config.exhaustive && config.permutations < 1) {
    throw std::invalid_argument("at least one permutation is required");
  }
  for (const auto& b : background) {
    if (b.size() != d) throw std::invalid_argument("background row does not match the features");
  }
  for (const auto& x : evaluation) {
    if (x.size() != d) throw std::invalid_argument("evaluation row does not match the features");
  }
  if (config.exhaustive && d > 9) {
    throw std::invalid_argument("exhaustive attribution is limited to 9 features");
  }
  AttributionReport rep;
  rep.features = std::move(features);
  rep.config = config;
  rep.background_size = background.size();
  double base = 0.0;
  for (const auto& b : background) base += f(b);
  rep.baseline = base / double(background.size());

  const std::size_t P = evaluation.size();
  rep.phi.assign(P, std::vector<double>(d, 0.0));
  rep.std_error.assign(P, std::vector<double>(d, 0.0));
  rep.prediction.assign(P, 0.0);
  rep.efficiency_residual.assign(P, 0.0);
  rep.efficiency_std_error.assign(P, 0.0);

  parallel_for(P, config.jobs, [&](std::size_t p) {
    const std::vector<double>& x = evaluation[p];
    std::vector<double> z, contrib(d);
    std::vector<Welford> acc(d);
    Welford fb_acc;
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    if (config.exhaustive) {
      do {
        for (const auto& b : background) {
          fb_acc.add(walk(f, x, b, order, z, contrib));
          for (std::size_t i = 0; i < d; ++i) acc[i].add(contrib[i]);
        }
      } while (std::next_permutation(order.begin(), order.end()));
    } else {
      Rng rng(derive_seed({config.seed, p}));
      // systematic subsample of the background: random start, fixed stride
      const std::size_t B = std::min(config.background_samples, background.size());
      const double stride = double(background.size()) / double(std::max<std::size_t>(1, B));
      const double start = rng.uniform() * stride;
      std::vector<std::size_t> rows(B);
      for (std::size_t k = 0; k < B; ++k) {
        rows[k] = std::min(background.size() - 1, std::size_t(start + double(k) * stride));
      }
      for (std::size_t w = 0; w < config.permutations; ++w) {
        rng.shuffle(order.begin(), order.end());
        fb_acc.add(walk(f, x, background[rows[w % B]], order, z, contrib));
        for (std::size_t i = 0; i < d; ++i) acc[i].add(contrib[i]);
      }
    }
    rep.prediction[p] = f(x);
    double sum = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      rep.phi[p][i] = acc[i].mean;
      rep.std_error[p][i] = config.exhaustive ? 0.0 : acc[i].std_error();
      sum += acc[i].mean;
    }
    rep.efficiency_residual[p] = sum - (rep.prediction[p] - rep.baseline);
    rep.efficiency_std_error[p] = config.exhaustive ? 0.0 : fb_acc.std_error();
  });

  rep.mean_shap.assign(d, 0.0);
  rep.mean_abs_shap.assign(d, 0.0);
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      rep.mean_shap[i] += rep.phi[p][i] / double(P);
      rep.mean_abs_shap[i] += std::abs(rep.phi[p][i]) / double(P);
    }
  }
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return rep.mean_abs_shap[a] > rep.mean_abs_shap[b];
  });
  rep.rank.assign(d, 0);
  for (std::size_t r = 0; r < d; ++r) rep.rank[idx[r]] = r + 1;
  return rep;
}

AttributionReport shapley_attribute(const MlpModel& model,
                                    const std::vector<std::vector<double>>& background,
                                    const std::vector<std::vector<double>>& evaluation,
                                    const ShapleyConfig& config) {
  Predictor f = [&model](std::span<const double> x) { return model.predict(x); };
  return shapley_attribute(f, model.schema.names, background, evaluation, config);
}

std::vector<SummaryRow> summarize_attributions(const AttributionReport& report,
                                               std::size_t top_k) {
  if (report.features.empty()) throw std::invalid_argument("empty attribution report");
  double total = 0.0;
  for (double v : report.mean_abs_shap) total += v;
  std::vector<std::size_t> idx(report.features.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return report.rank[a] < report.rank[b]; });
  std::vector<SummaryRow> out;
  for (std::size_t r = 0; r < std::min(top_k, idx.size()); ++r) {
    const std::size_t i = idx[r];
    out.push_back({report.features[i], report.mean_shap[i], report.mean_abs_shap[i],
                   total > 0.0 ? 100.0 * report.mean_abs_shap[i] / total : 0.0});
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "rank,feature,mean_shap,mean_abs_shap,share_percent\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += std::to_string(r + 1) + ',' + rows[r].feature + ',' + format_double(rows[r].mean_shap) +
           ',' + format_double(rows[r].mean_abs_shap) + ',' + format_double(rows[r].share) + '\n';
  }
  return out;
}

}  // namespace steplearn
