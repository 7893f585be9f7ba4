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

#include <doctest.h>

#include <random>
#include <sstream>

#include "steplearn/embed.hpp"
#include "steplearn/sampler.hpp"
#include "support/embed_oracles.hpp"
#include "support/fixtures.hpp"
#include "support/trained.hpp"

using namespace steplearn;
using namespace steplearn::testing;

namespace {

MlpModel zero_model(std::size_t inputs, std::vector<std::size_t> hidden) {
  MlpModel m = random_model(inputs, hidden, 0);
  for (Layer& L : m.layers) {
    std::fill(L.weights.begin(), L.weights.end(), 0.0);
    std::fill(L.bias.begin(), L.bias.end(), 0.0);
  }
  return m;
}

}  // namespace

TEST_CASE("interval bounds on hand-built layers") {
  MlpModel m = random_model(2, {1}, 0);
  m.layers[0].weights = {1.0, -1.0};
  m.layers[0].bias = {0.0};
  const std::vector<Interval> unit{{0, 1}, {0, 1}};
  const NeuronBounds b = propagate_bounds(m, unit);
  CHECK(b.hidden[0][0].lo == -1.0);
  CHECK(b.hidden[0][0].hi == 1.0);

  MlpModel c = zero_model(3, {4});
  std::fill(c.layers[0].bias.begin(), c.layers[0].bias.end(), 2.5);
  const std::vector<Interval> box{{-5, 5}, {0, 1}, {3, 3}};
  const NeuronBounds cb = propagate_bounds(c, box);
  for (const Interval& i : cb.hidden[0]) {
    CHECK(i.lo == 2.5);
    CHECK(i.hi == 2.5);
  }
  const std::vector<Interval> bad{{0, INFINITY}, {0, 1}, {0, 1}};
  CHECK_THROWS_AS(propagate_bounds(c, bad), std::invalid_argument);
}

TEST_CASE("bounds contain sampled pre-activations and tighten with the box") {
  std::mt19937_64 rng(17);
  for (int net = 0; net < 5; ++net) {
    MlpModel m = random_model(4, {12, 8}, net);
    std::normal_distribution<double> nd;
    for (Layer& L : m.layers) {
      for (double& v : L.bias) v = 0.3 * nd(rng);
    }
    std::vector<Interval> box(4);
    for (auto& i : box) {
      const double a = nd(rng), w = std::abs(nd(rng));
      i = {a - w, a + w};
    }
    const NeuronBounds b = propagate_bounds(m, box);
    for (int k = 0; k < 20000; ++k) {
      std::vector<double> x(4);
      for (std::size_t i = 0; i < 4; ++i) {
        x[i] = std::uniform_real_distribution<double>(box[i].lo, box[i].hi)(rng);
      }
      const auto pre = naive_preactivations(m, x);
      std::size_t j = 0;
      for (const auto& layer : b.hidden) {
        for (const Interval& iv : layer) {
          REQUIRE(pre[j] >= iv.lo - 1e-12);
          REQUIRE(pre[j] <= iv.hi + 1e-12);
          ++j;
        }
      }
    }
    std::vector<Interval> inner = box;
    for (auto& i : inner) {
      const double mid = 0.5 * (i.lo + i.hi), half = 0.25 * (i.hi - i.lo);
      i = {mid - half, mid + half};
    }
    const NeuronBounds t = propagate_bounds(m, inner);
    for (std::size_t l = 0; l < b.hidden.size(); ++l) {
      for (std::size_t r = 0; r < b.hidden[l].size(); ++r) {
        CHECK(t.hidden[l][r].lo >= b.hidden[l][r].lo);
        CHECK(t.hidden[l][r].hi <= b.hidden[l][r].hi);
      }
    }
  }
}

TEST_CASE("corner bounds are attained and sit inside the interval bounds") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> nd;
  for (int net = 0; net < 6; ++net) {
    MlpModel m = random_model(5, {10, 7}, 40 + net);
    for (Layer& L : m.layers) {
      for (double& v : L.bias) v = 0.5 * nd(rng);
    }
    // inputs 0..2 binary, 3..4 fixed
    const std::vector<Interval> box{{0, 1}, {0, 1}, {0, 1}, {0.3, 0.3}, {-1.2, -1.2}};
    const NeuronBounds c = corner_bounds(m, box);
    const NeuronBounds iv = propagate_bounds(m, box);
    std::vector<double> lo(c.neurons(), INFINITY), hi(c.neurons(), -INFINITY);
    for (int mask = 0; mask < 8; ++mask) {
      const std::vector<double> x{double(mask & 1), double(mask >> 1 & 1), double(mask >> 2 & 1),
                                  0.3, -1.2};
      const auto pre = naive_preactivations(m, x);
      for (std::size_t j = 0; j < lo.size(); ++j) {
        lo[j] = std::min(lo[j], pre[j]);
        hi[j] = std::max(hi[j], pre[j]);
      }
    }
    std::size_t j = 0;
    for (std::size_t l = 0; l < c.hidden.size(); ++l) {
      for (std::size_t r = 0; r < c.hidden[l].size(); ++r, ++j) {
        const Interval& b = c.hidden[l][r];
        CHECK(b.lo <= lo[j]);
        CHECK(b.hi >= hi[j]);
        CHECK(b.lo >= lo[j] - 1e-8);
        CHECK(b.hi <= hi[j] + 1e-8);
        CHECK(b.lo >= iv.hidden[l][r].lo - 1e-8);
        CHECK(b.hi <= iv.hidden[l][r].hi + 1e-8);
      }
    }
    CHECK(c.stable_active() + c.stable_inactive() >= iv.stable_active() + iv.stable_inactive());
  }
  MlpModel wide = random_model(3, {2}, 0);
  const std::vector<Interval> box3{{0, 1}, {0, 1}, {0, 1}};
  CHECK_THROWS_AS(corner_bounds(wide, box3, 2), std::invalid_argument);
}

TEST_CASE("embedded minimum equals the clamped forward pass") {
  std::mt19937_64 rng(3);
  for (int net = 0; net < 8; ++net) {
    const std::size_t inputs = 2 + net % 3;
    const std::vector<std::size_t> hidden =
        net % 2 ? std::vector<std::size_t>{8, 6} : std::vector<std::size_t>{10, 6, 4};
    const MlpModel m = briefly_trained(net, inputs, hidden, 15);
    for (int k = 0; k < 5; ++k) {
      std::vector<double> x(m.input_dim());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::uniform_real_distribution<double>(m.x_min[i], m.x_max[i])(rng);
      }
      for (bool elim : {false, true}) {
        const EmbedCheck c = embedded_minimum(m, x, elim);
        CAPTURE(net);
        CAPTURE(k);
        REQUIRE(c.solved);
        CHECK(std::abs(c.embedded - c.expected) <= 1e-5);
      }
    }
  }
}

TEST_CASE("always-active networks and the zero network") {
  MlpModel m = random_model(2, {3}, 4);
  m.layers[0].weights = {1.0, 0.5, 2.0, 1.0, 0.25, 0.25};
  m.layers[0].bias = {0.1, 0.2, 0.3};
  m.layers[1].weights = {1.0, -1.0, 0.5};
  m.layers[1].bias = {4.0};
  m.x_min = {0.0, 0.0};
  m.x_max = {1.0, 1.0};
  const NeuronBounds b = propagate_bounds(m, std::vector<Interval>{{0, 1}, {0, 1}});
  CHECK(b.stable_active() == 3);
  MilpProblem p;
  const std::size_t x0 = p.add_variable("x0", 0.3, 0.3), x1 = p.add_variable("x1", 0.9, 0.9);
  const EmbeddedNetwork e =
      embed_network(p, m, b, InputWiring{{x0, x1}, {0, 0}}, "n", EmbedOptions{false, 0.0});
  for (const EmbeddedNeuron& n : e.neurons) CHECK(p.variables()[*n.lower_part].upper == 0.0);
  p.set_objective(e.output, 1.0);
  const MilpSolution s = solve_milp(p);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.values[e.output] == doctest::Approx(m.forward(std::vector<double>{0.3, 0.9})).epsilon(1e-9));

  const MlpModel z = zero_model(3, {5, 5});
  for (int bits = 0; bits < 8; ++bits) {
    MilpProblem q;
    InputWiring w;
    for (int i = 0; i < 3; ++i) {
      const std::size_t v = q.add_binary("y" + std::to_string(i));
      q.set_bounds(v, (bits >> i) & 1, (bits >> i) & 1);
      w.var.push_back(v);
      w.value.push_back(0.0);
    }
    const NeuronBounds zb = propagate_bounds(z, std::vector<Interval>(3, {0, 1}));
    const EmbeddedNetwork ze = embed_network(q, z, zb, w, "z");
    q.set_objective(ze.output, 1.0);
    const MilpSolution s2 = solve_milp(q);
    CHECK(s2.objective == 0.0);
    CHECK(ze.binaries_added == 0);  // every neuron is stable at zero
  }
}

TEST_CASE("surrogate with zero networks on a single node invests nothing") {
  const Network net = pocket();
  ScenarioTree tree;
  tree.voll = 100.0;
  tree.gamma = 0.1;
  tree.nodes.push_back(TreeNode{1, std::nullopt, 0, 0, 1.0, 1.0, {}, {}});
  tree.finalize();
  MlpModel c = zero_model(feature_schema(net).size(), {4});
  c.schema = feature_schema(net);
  c.kept.assign(c.schema.size(), true);
  c.dropped_values.assign(c.schema.size(), 0.0);
  MlpModel s = c;
  s.target = Target::kShed;
  const SurrogateStepModel m =
      build_surrogate_step(net, tree, c, s, baseline_node_features(net, tree));
  const SurrogateSolution sol = solve_surrogate_step(m);
  REQUIRE(sol.feasible());
  CHECK(sol.predicted_objective == 0.0);
  CHECK(sol.plan.invest_string().find('1') == std::string::npos);
}

TEST_CASE("surrogate model sizes, plans and predictions") {
  const Network net = pocket();
  const ScenarioTree tree = three_nodes();
  const TrainedPair& tp = pocket_models();
  const auto features = baseline_node_features(net, tree);

  SurrogateOptions full;
  full.embed.eliminate_stable = false;
  const SurrogateStepModel big = build_surrogate_step(net, tree, tp.cost, tp.shed, features, full);
  CHECK(big.problem.num_variables() ==
        SurrogateStepModel::expected_variables(tp.cost, tp.shed, tree.size(), 2));
  CHECK(big.problem.num_binaries() ==
        SurrogateStepModel::expected_binaries(tp.cost, tp.shed, tree.size(), 2));

  const SurrogateStepModel small = build_surrogate_step(net, tree, tp.cost, tp.shed, features);
  CHECK(small.problem.num_constraints() <= big.problem.num_constraints());

  MilpOptions mo;
  mo.relative_gap = 0.0;
  const SurrogateSolution a = solve_surrogate_step(big, mo);
  const SurrogateSolution b = solve_surrogate_step(small, mo);
  REQUIRE(a.feasible());
  REQUIRE(b.feasible());
  CHECK(a.predicted_objective == doctest::Approx(b.predicted_objective).epsilon(1e-7));
  CHECK(validate_plan(b.plan, tree, 2).empty());

  for (std::size_t s = 0; s < tree.size(); ++s) {
    std::vector<double> f = features[s];
    for (std::size_t k = 0; k < 2; ++k) f[k] = b.plan.at(k, s).built ? 1.0 : 0.0;
    CHECK(std::abs(b.predicted_cost[s] - std::max(0.0, tp.cost.predict(f))) <=
          1e-5 * tp.cost.y_scale);
    CHECK(std::abs(b.predicted_shed[s] - std::max(0.0, tp.shed.predict(f))) <=
          1e-5 * tp.shed.y_scale);
  }

  SurrogateOptions interval;
  interval.corner_bounds = false;
  const SurrogateStepModel loose =
      build_surrogate_step(net, tree, tp.cost, tp.shed, features, interval);
  CHECK(loose.problem.num_binaries() >= small.problem.num_binaries());
  const SurrogateSolution c = solve_surrogate_step(loose, mo);
  REQUIRE(c.feasible());
  CHECK(c.predicted_objective == doctest::Approx(b.predicted_objective).epsilon(1e-7));

  const ExactStepModel exact = build_exact_step(net, tree);
  const StepSolution eval = evaluate_plan(net, tree, exact, b.plan, {});
  CHECK(eval.feasible());
  CHECK(std::isfinite(eval.total_cost));

  const std::string report = embedding_report_csv({{"cost@1", &small.cost[0]}});
  CHECK(report.rfind("network,layer,neuron,lower,upper,big_m,state\n", 0) == 0);
  std::ostringstream lp;
  write_lp_format(small.problem, lp);
  CHECK(lp.str().find("Binaries") != std::string::npos);
}

TEST_CASE("surrogate rejects mismatched models") {
  const Network net = pocket();
  const ScenarioTree tree = three_nodes();
  const TrainedPair& tp = pocket_models();
  const auto features = baseline_node_features(net, tree);
  CHECK_THROWS_AS(build_surrogate_step(net, tree, tp.shed, tp.cost, features),
                  std::invalid_argument);
  MlpModel other = tp.cost;
  other.schema.names[0] = "y_99";
  CHECK_THROWS_AS(build_surrogate_step(net, tree, other, tp.shed, features),
                  std::invalid_argument);
}
