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

#include "steplearn/grid.hpp"

using namespace steplearn;

namespace {

const char* kTwoBus = R"(
name: two-bus
horizon: 1
buses: [1, 2]
lines:
  - {id: 1, from: 1, to: 2, capacity: 10}
generators:
  - {id: G1, bus: 1, kind: thermal, capacity: 10, cost: 5}
loads:
  - {id: D2, bus: 2, profile: [8]}
)";

const char* kSmall = R"(
name: small
horizon: 2
buses: [1, 2, 3]
profiles:
  demand: [0.5, 1.0]
  wind: [0.2, 0.9]
lines:
  - {id: 1, from: 1, to: 2, capacity: 10}
  - {id: 2, from: 2, to: 3, capacity: 4}
  - {id: 3, from: 1, to: 3, capacity: 3.8, candidate: true, cost_per_mw: 100000}
generators:
  - {id: G1, bus: 1, kind: thermal, capacity: 20, cost: 30}
  - {id: WT1, bus: 3, kind: wind, capacity: 5, cost: 0}
loads:
  - {id: D2, bus: 2, peak: 6}
  - {id: D3, bus: 3, profile: [1.5, 2.25]}
)";

const char* kTree = R"(
discount_rate: 0.06
voll: 15000
gamma: 0.00002
nodes:
  - {id: 2, parent: 1, year: 5, probability: 0.4, growth: 1.1}
  - {id: 1, parent: null, year: 0, probability: 1.0}
  - {id: 3, parent: 1, year: 5, probability: 0.35, generator_multipliers: {WT1: 1.5}}
  - {id: 4, parent: 1, year: 5, probability: 0.25, load_multipliers: {D2: 0.9}}
)";

ScenarioTree chain_tree(int depth, int branching) {
  ScenarioTree t;
  t.voll = 1000;
  t.gamma = 0.1;
  int next = 1;
  t.nodes.push_back(TreeNode{next++, std::nullopt, 0, 0, 1.0, 1.0, {}, {}});
  std::vector<std::pair<int, double>> frontier{{1, 1.0}};
  for (int d = 1; d <= depth; ++d) {
    std::vector<std::pair<int, double>> nf;
    for (auto [id, p] : frontier) {
      for (int b = 0; b < branching; ++b) {
        t.nodes.push_back(TreeNode{next, id, 0, 5 * d, p / branching, 1.0, {}, {}});
        nf.emplace_back(next++, p / branching);
      }
    }
    frontier = nf;
  }
  t.finalize();
  return t;
}

}  // namespace

TEST_CASE("load the minimal two-bus network") {
  const Network n = parse_network(kTwoBus);
  CHECK(n.buses.size() == 2);
  CHECK(n.num_candidates() == 0);
  CHECK(n.generators[0].availability == std::vector<double>{1.0});
  CHECK(n.total_load(0) == 8.0);
}

TEST_CASE("profiles, candidates and round trip") {
  const Network n = parse_network(kSmall);
  REQUIRE(n.num_candidates() == 1);
  const Line& c = n.candidate(0);
  CHECK(c.from_bus == 1);
  CHECK(c.to_bus == 3);
  CHECK(c.capacity == 3.8);
  CHECK(n.candidate_base_cost(0) == doctest::Approx(380000.0));
  CHECK(n.loads[0].profile == std::vector<double>{3.0, 6.0});
  CHECK(n.generators[1].availability == std::vector<double>{0.2, 0.9});
  CHECK(n.wind_generators() == std::vector<std::size_t>{1});

  const Network again = parse_network(serialize_network(n));
  CHECK(again.name == n.name);
  CHECK(again.buses == n.buses);
  REQUIRE(again.lines.size() == n.lines.size());
  for (std::size_t i = 0; i < n.lines.size(); ++i) {
    CHECK(again.lines[i].capacity == n.lines[i].capacity);
    CHECK(again.lines[i].is_candidate == n.lines[i].is_candidate);
    CHECK(again.lines[i].cost_per_mw == n.lines[i].cost_per_mw);
  }
  for (std::size_t g = 0; g < n.generators.size(); ++g) {
    CHECK(again.generators[g].availability == n.generators[g].availability);
    CHECK(again.generators[g].kind == n.generators[g].kind);
  }
  for (std::size_t d = 0; d < n.loads.size(); ++d) {
    CHECK(again.loads[d].profile == n.loads[d].profile);
  }
}

TEST_CASE("network validation errors name the field") {
  std::string bad = kTwoBus;
  bad.replace(bad.find("to: 2"), 5, "to: 99");
  try {
    parse_network(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "lines[0].to");
  }
  std::string neg = kTwoBus;
  neg.replace(neg.find("capacity: 10, cost"), 12, "capacity: -1");
  CHECK_THROWS_AS(parse_network(neg), ValidationError);
  CHECK_THROWS_AS(parse_network("buses: [1, 2\n"), ParseError);
  std::string ragged = kSmall;
  ragged.replace(ragged.find("[1.5, 2.25]"), 11, "[1.5]");
  CHECK_THROWS_AS(parse_network(ragged), ValidationError);
}

TEST_CASE("scenario tree loading and invariants") {
  const ScenarioTree t = parse_tree(kTree);
  REQUIRE(t.size() == 4);
  CHECK(t.nodes[0].id == 1);
  CHECK(t.children(0).size() == 3);
  double leaves = 0.0;
  for (std::size_t s : t.leaves()) leaves += t.nodes[s].probability;
  CHECK(leaves == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t.nodes[t.index_of(3)].generator_multiplier("WT1") == 1.5);
  CHECK(t.nodes[t.index_of(3)].generator_multiplier("G1") == 1.0);
  CHECK(t.nodes[t.index_of(2)].stage == 1);

  const ScenarioTree again = parse_tree(serialize_tree(t));
  REQUIRE(again.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(again.nodes[i].id == t.nodes[i].id);
    CHECK(again.nodes[i].parent == t.nodes[i].parent);
    CHECK(again.nodes[i].probability == t.nodes[i].probability);
    CHECK(again.nodes[i].growth == t.nodes[i].growth);
    CHECK(again.nodes[i].generator_multipliers == t.nodes[i].generator_multipliers);
    CHECK(again.nodes[i].load_multipliers == t.nodes[i].load_multipliers);
  }
  CHECK(again.gamma == t.gamma);
  CHECK(again.voll == t.voll);

  const ScenarioTree single = parse_tree(
      "voll: 1\ngamma: 0\nnodes:\n  - {id: 7, parent: null, year: 0, probability: 1}\n");
  CHECK(single.size() == 1);
  CHECK(single.is_leaf(0));
}

TEST_CASE("scenario tree rejects malformed structure") {
  CHECK_THROWS_AS(parse_tree(R"(
voll: 1
gamma: 0
nodes:
  - {id: 1, parent: null, year: 0, probability: 1}
  - {id: 2, parent: 1, year: 1, probability: 0.5}
  - {id: 3, parent: 1, year: 1, probability: 0.6}
)"),
                  ValidationError);
  CHECK_THROWS_AS(parse_tree(R"(
voll: 1
gamma: 0
nodes:
  - {id: 1, parent: null, year: 0, probability: 1}
  - {id: 2, parent: null, year: 0, probability: 1}
)"),
                  ValidationError);
  CHECK_THROWS_AS(parse_tree(R"(
voll: 1
gamma: 0
nodes:
  - {id: 1, parent: 2, year: 0, probability: 1}
  - {id: 2, parent: 1, year: 1, probability: 1}
)"),
                  ValidationError);
  CHECK_THROWS_AS(parse_tree(R"(
voll: 1
gamma: 1.0
nodes:
  - {id: 1, parent: null, year: 0, probability: 1}
)"),
                  ValidationError);
  CHECK_THROWS_AS(parse_tree(R"(
voll: 1
gamma: 0
nodes:
  - {id: 1, parent: null, year: 0, probability: 1}
  - {id: 2, parent: 1, year: 0, probability: 1}
)"),
                  ValidationError);
}

TEST_CASE("discount factor") {
  TreeNode n;
  CHECK(discount_factor(n, 0.3) == 1.0);
  n.probability = 0.5;
  n.year = 10;
  CHECK(discount_factor(n, 0.0) == 0.5);
  n.probability = 1.0;
  n.year = 1;
  CHECK(discount_factor(n, 0.06) == doctest::Approx(0.943396).epsilon(1e-6));
  CHECK_THROWS(discount_factor(n, -1.0));
}

TEST_CASE("plan validation examples") {
  const ScenarioTree t = chain_tree(2, 2);
  InvestmentPlan p = InvestmentPlan::from_investments(t, 1, {{0}});
  CHECK(validate_plan(p, t, 1).empty());
  CHECK(p.at(0, 0).fresh);
  for (std::size_t s = 1; s < t.size(); ++s) {
    CHECK(p.at(0, s).built);
    CHECK_FALSE(p.at(0, s).fresh);
  }

  InvestmentPlan drop = p;
  drop.at(0, 3).built = false;
  drop.at(0, 3).invest = false;
  bool persistence = false;
  for (const auto& v : validate_plan(drop, t, 1)) {
    persistence = persistence || v.kind == PlanViolation::Kind::kPersistence;
  }
  CHECK(persistence);

  InvestmentPlan twice = p;
  twice.at(0, 1).fresh = true;
  auto report = validate_plan(twice, t, 1);
  REQUIRE(report.size() == 1);
  CHECK(report[0].kind == PlanViolation::Kind::kUniqueInvestment);

  CHECK_THROWS_AS(validate_plan(InvestmentPlan(2, t.size()), t, 1), std::invalid_argument);
}

TEST_CASE("plan validation matches the transition system") {
  const ScenarioTree t = chain_tree(2, 3);  // 13 nodes
  const std::size_t k = 2;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    // Random antichain of internal nodes per line, by random top-down walk.
    std::vector<std::vector<std::size_t>> firsts(k);
    for (std::size_t l = 0; l < k; ++l) {
      std::vector<std::size_t> stack{0};
      while (!stack.empty()) {
        std::size_t s = stack.back();
        stack.pop_back();
        if (t.is_leaf(s)) continue;
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) {
          firsts[l].push_back(s);
        } else {
          for (std::size_t c : t.children(s)) stack.push_back(c);
        }
      }
    }
    const InvestmentPlan p = InvestmentPlan::from_investments(t, k, firsts);
    REQUIRE(validate_plan(p, t, k).empty());
    InvestmentPlan flipped = p;
    const std::size_t l = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
    const std::size_t s = std::uniform_int_distribution<std::size_t>(0, t.size() - 1)(rng);
    flipped.at(l, s).built = !flipped.at(l, s).built;
    CHECK_FALSE(validate_plan(flipped, t, k).empty());
  }
}

TEST_CASE("plan enumeration counts antichains") {
  const ScenarioTree t = chain_tree(2, 2);  // 7 nodes
  const auto plans = enumerate_plans(t, 1, 1000);
  CHECK(plans.size() == 5);
  for (const auto& p : plans) CHECK(validate_plan(p, t, 1).empty());
  CHECK(enumerate_plans(t, 3, 1000).size() == 125);
  CHECK_THROWS_AS(enumerate_plans(t, 4, 256), std::length_error);
}
