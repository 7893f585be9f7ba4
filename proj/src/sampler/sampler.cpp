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

#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "steplearn/random.hpp"
#include "steplearn/sampler.hpp"

namespace steplearn {

std::vector<std::vector<std::uint8_t>> enumerate_configs(std::size_t num_candidates,
                                                         std::size_t cap) {
  if (num_candidates > cap) {
    throw std::length_error("2^" + std::to_string(num_candidates) +
                            " configurations exceed the enumeration cap of 2^" +
                            std::to_string(cap) +
                            "; reduce the candidate set (see docs/formats.md, sampling limits)");
  }
  const std::size_t count = std::size_t{1} << num_candidates;
  std::vector<std::vector<std::uint8_t>> out(count, std::vector<std::uint8_t>(num_candidates));
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t k = 0; k < num_candidates; ++k) {
      out[m][k] = std::uint8_t((m >> (num_candidates - 1 - k)) & 1u);
    }
  }
  return out;
}

std::uint32_t config_mask(const std::vector<std::uint8_t>& built) {
  std::uint32_t m = 0;
  for (std::uint8_t b : built) m = (m << 1) | (b ? 1u : 0u);
  return m;
}

NodeScenario draw_perturbation(const Network& net, double half_range, std::uint64_t seed,
                               int node_id, std::uint64_t draw) {
  if (!(half_range >= 0.0)) throw std::invalid_argument("half-range must be nonnegative");
  Rng rng(derive_seed({seed, std::uint64_t(std::int64_t(node_id)), draw}));
  NodeScenario s = NodeScenario::identity(net);
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    if (!net.generators[g].renewable()) continue;
    const double u = rng.uniform();
    s.generator_factor[g] = half_range == 0.0 ? 1.0 : 1.0 + half_range * (2.0 * u - 1.0);
  }
  for (std::size_t d = 0; d < net.loads.size(); ++d) {
    const double u = rng.uniform();
    s.load_factor[d] = half_range == 0.0 ? 1.0 : 1.0 + half_range * (2.0 * u - 1.0);
  }
  return s;
}

FeatureSchema feature_schema(const Network& net) {
  FeatureSchema s;
  auto add = [&](std::string name, bool binary) {
    s.names.push_back(std::move(name));
    s.binary.push_back(binary);
  };
  for (std::size_t k = 0; k < net.num_candidates(); ++k) {
    add("y_" + std::to_string(net.candidate(k).id), true);
  }
  for (std::size_t g : net.wind_generators()) add("wfac_" + net.generators[g].id, false);
  for (std::size_t g : net.solar_generators()) add("sfac_" + net.generators[g].id, false);
  for (const Load& d : net.loads) add("dfac_" + d.id, false);
  for (std::size_t k = 0; k < net.num_candidates(); ++k) {
    add("tau_" + std::to_string(net.candidate(k).id), false);
  }
  add("growth", false);
  for (const Generator& g : net.generators) add("gmul_" + g.id, false);
  for (const Load& d : net.loads) add("lmul_" + d.id, false);
  return s;
}

std::vector<double> node_features(const Network& net, const ScenarioTree& tree,
                                  std::size_t node, const NodeScenario& scenario,
                                  const std::vector<std::uint8_t>& built) {
  const TreeNode& n = tree.nodes.at(node);
  std::vector<double> f;
  for (std::uint8_t b : built) f.push_back(b ? 1.0 : 0.0);
  for (std::size_t g : net.wind_generators()) f.push_back(scenario.generator_factor[g]);
  for (std::size_t g : net.solar_generators()) f.push_back(scenario.generator_factor[g]);
  for (double v : scenario.load_factor) f.push_back(v);
  for (std::size_t k = 0; k < net.num_candidates(); ++k) f.push_back(net.candidate(k).capacity);
  f.push_back(n.growth);
  for (const Generator& g : net.generators) f.push_back(n.generator_multiplier(g.id));
  for (const Load& d : net.loads) f.push_back(n.load_multiplier(d.id));
  return f;
}

NodeScenario scenario_from_features(const Network& net, const FeatureSchema& schema,
                                    const std::vector<double>& features) {
  NodeScenario s = NodeScenario::identity(net);
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    if (gen.kind == GeneratorKind::kWind) {
      s.generator_factor[g] = features.at(schema.index_of("wfac_" + gen.id));
    } else if (gen.kind == GeneratorKind::kSolar) {
      s.generator_factor[g] = features.at(schema.index_of("sfac_" + gen.id));
    }
  }
  for (std::size_t d = 0; d < net.loads.size(); ++d) {
    s.load_factor[d] = features.at(schema.index_of("dfac_" + net.loads[d].id));
  }
  return s;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Dataset generate_dataset(const Network& net, const ScenarioTree& tree,
                         const SamplerConfig& config, SampleSummary* summary) {
  if (config.runs < 1) throw std::invalid_argument("sampler needs at least one run");
  const auto start = std::chrono::steady_clock::now();
  const auto configs = enumerate_configs(net.num_candidates(), config.config_cap);
  const std::size_t S = tree.size(), C = configs.size();
  const std::size_t total = config.runs * S * C;

  struct Slot {
    DataRow row;
    bool ok = false;
    std::string error;
  };
  std::vector<Slot> slots(total);
  parallel_for(config.runs * S, config.jobs, [&](std::size_t task) {
    const std::size_t draw = task / S, s = task % S;
    const int id = tree.nodes[s].id;
    const NodeScenario sc = draw_perturbation(net, config.half_range, config.seed, id, draw);
    for (std::size_t c = 0; c < C; ++c) {
      Slot& slot = slots[task * C + c];
      try {
        const OpfResult r = solve_opf(net, make_context(net, tree, s, configs[c], &sc));
        slot.row.node_id = id;
        slot.row.config_mask = config_mask(configs[c]);
        slot.row.features = node_features(net, tree, s, sc, configs[c]);
        slot.row.cost = r.generation_cost;
        slot.row.shed = r.total_shed;
        slot.row.infeasible = r.infeasible_under_standard;
        slot.ok = true;
      } catch (const std::runtime_error& e) {
        slot.error = "draw " + std::to_string(draw) + " node " + std::to_string(id) +
                     " config " + std::to_string(c) + ": " + e.what();
      }
    }
  });

  Dataset data;
  data.schema = feature_schema(net);
  data.rows.reserve(total);
  SampleSummary sum;
  sum.expected_rows = total;
  for (Slot& slot : slots) {
    if (!slot.ok) {
      ++sum.failures;
      sum.failure_messages.push_back(slot.error);
      continue;
    }
    sum.infeasible_rows += slot.row.infeasible;
    sum.shed_rows += slot.row.shed > 1e-9;
    data.rows.push_back(std::move(slot.row));
  }
  sum.rows = data.rows.size();
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (summary) *summary = sum;
  return data;
}

AuditReport audit_dataset(const Network& net, const ScenarioTree& tree, const Dataset& data,
                          std::size_t stride, double tolerance) {
  if (!(data.schema == feature_schema(net))) {
    throw std::invalid_argument("dataset schema does not match the network");
  }
  AuditReport rep;
  const std::size_t K = net.num_candidates();
  for (std::size_t i = 0; i < data.rows.size(); i += std::max<std::size_t>(1, stride)) {
    const DataRow& r = data.rows[i];
    const std::size_t s = tree.index_of(r.node_id);
    std::vector<std::uint8_t> built(K);
    for (std::size_t k = 0; k < K; ++k) built[k] = r.features[k] > 0.5;
    const NodeScenario sc = scenario_from_features(net, data.schema, r.features);
    const OpfResult o = solve_opf(net, make_context(net, tree, s, built, &sc));
    const double ec = std::abs(o.generation_cost - r.cost) / std::max(1.0, std::abs(r.cost));
    const double es = std::abs(o.total_shed - r.shed) / std::max(1.0, std::abs(r.shed));
    const double e = std::max(ec, es);
    rep.worst_relative_error = std::max(rep.worst_relative_error, e);
    ++rep.checked;
    if (e > tolerance || o.infeasible_under_standard != r.infeasible) ++rep.mismatches;
  }
  return rep;
}

}  // namespace steplearn
