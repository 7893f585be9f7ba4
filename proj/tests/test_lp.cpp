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

#include "steplearn/lp/propagate.hpp"
#include "steplearn/milp.hpp"
#include "support/oracles.hpp"

using namespace steplearn;

TEST_CASE("one-dimensional LP") {
  MilpProblem p;
  const auto x = p.add_variable("x", 0.0, kInf, VarKind::kContinuous, -1.0);
  p.add_constraint("cap", {{x, 1.0}}, RowSense::kLe, 3.0);
  const MilpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.values[x] == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(-3.0));
  CHECK(s.dual_objective == doctest::Approx(-3.0));
  CHECK(s.duals[0] == doctest::Approx(-1.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  MilpProblem p;
  const auto x = p.add_variable("x", -kInf, kInf);
  p.add_constraint("lo", {{x, 1.0}}, RowSense::kGe, 2.0);
  p.add_constraint("hi", {{x, 1.0}}, RowSense::kLe, 1.0);
  CHECK(solve_lp(p).status == SolveStatus::kInfeasible);
  CHECK(solve_milp(p).status == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded LP is detected") {
  MilpProblem p;
  const auto x = p.add_variable("x", 0.0, kInf, VarKind::kContinuous, -1.0);
  const auto y = p.add_variable("y", 0.0, kInf);
  p.add_constraint("r", {{x, 1.0}, {y, -1.0}}, RowSense::kLe, 1.0);
  CHECK(solve_lp(p).status == SolveStatus::kUnbounded);
}

TEST_CASE("free variables and equality rows") {
  MilpProblem p;
  const auto x = p.add_variable("x", -kInf, kInf, VarKind::kContinuous, 1.0);
  const auto y = p.add_variable("y", -kInf, kInf, VarKind::kContinuous, 2.0);
  p.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, RowSense::kEq, 4.0);
  p.add_constraint("diff", {{x, 1.0}, {y, -1.0}}, RowSense::kLe, 2.0);
  const MilpSolution s = solve_lp(p);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.values[x] == doctest::Approx(3.0));
  CHECK(s.values[y] == doctest::Approx(1.0));
  CHECK(s.objective == doctest::Approx(5.0));
}

TEST_CASE("random 5x8 LPs match vertex enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int inst = 0; inst < 12; ++inst) {
    const std::size_t m = 5, n = 8;
    std::vector<std::vector<double>> a(m, std::vector<double>(n));
    std::vector<double> b(m), lo(n, 0.0), hi(n), c(n);
    for (auto& row : a)
      for (double& v : row) v = 3.0 * u(rng);
    for (double& v : b) v = 2.0 + 3.0 * u(rng);
    for (double& v : hi) v = 2.0 + u(rng);
    for (double& v : c) v = 5.0 * u(rng);
    MilpProblem p;
    for (std::size_t j = 0; j < n; ++j) {
      p.add_variable("x" + std::to_string(j), lo[j], hi[j], VarKind::kContinuous, c[j]);
    }
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<Term> t;
      for (std::size_t j = 0; j < n; ++j) t.push_back({j, a[r][j]});
      p.add_constraint("r" + std::to_string(r), t, RowSense::kLe, b[r]);
    }
    const double oracle = testing::vertex_enumeration(a, b, lo, hi, c);
    const MilpSolution s = solve_lp(p);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(std::abs(s.objective - s.dual_objective) <= 1e-7 * (1.0 + std::abs(s.objective)));
    CHECK(p.max_violation(s.values) <= 1e-7);
  }
}

TEST_CASE("unit knapsack") {
  MilpProblem p;
  const auto y1 = p.add_binary("y1", -3.0);
  const auto y2 = p.add_binary("y2", -2.0);
  p.add_constraint("one", {{y1, 1.0}, {y2, 1.0}}, RowSense::kLe, 1.0);
  const MilpSolution s = solve_milp(p);
  REQUIRE(s.status == SolveStatus::kOptimal);
  CHECK(s.values[y1] == doctest::Approx(1.0));
  CHECK(s.values[y2] == doctest::Approx(0.0));
  CHECK(s.objective == doctest::Approx(-3.0));
}

TEST_CASE("random MILPs match 2^k enumeration") {
  std::mt19937_64 rng(2024);
  for (int inst = 0; inst < 120; ++inst) {
    const MilpProblem p = testing::random_milp(rng, 3 + inst % 8, 4 + inst % 11, 6 + inst % 20);
    const double oracle = testing::enumerate_binaries(p);
    MilpOptions o;
    o.relative_gap = 1e-9;
    const MilpSolution s = solve_milp(p, o);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(s.max_duality_residual <= 1e-7);
    CHECK(p.max_violation(s.values) <= 1e-6);
  }
}

TEST_CASE("branch-and-bound trace is monotone and deterministic") {
  std::mt19937_64 rng(5);
  const MilpProblem p = testing::random_milp(rng, 10, 12, 25);
  MilpOptions o;
  o.relative_gap = 1e-9;
  o.record_trace = true;
  const MilpSolution a = solve_milp(p, o);
  const MilpSolution b = solve_milp(p, o);
  REQUIRE(a.status == SolveStatus::kOptimal);
  CHECK(a.nodes == b.nodes);
  CHECK(a.values == b.values);
  for (std::size_t i = 1; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].best_bound >= a.trace[i - 1].best_bound - 1e-9);
    CHECK(a.trace[i].incumbent <= a.trace[i - 1].incumbent);
  }
}

TEST_CASE("warm start with the optimum") {
  std::mt19937_64 rng(8);
  const MilpProblem p = testing::random_milp(rng, 8, 6, 12);
  MilpOptions o;
  o.relative_gap = 1e-9;
  const MilpSolution first = solve_milp(p, o);
  REQUIRE(first.status == SolveStatus::kOptimal);
  o.warm_start = first.values;
  const MilpSolution again = solve_milp(p, o);
  REQUIRE(again.has_solution());
  CHECK(again.objective == doctest::Approx(first.objective).epsilon(1e-9));
}

TEST_CASE("infeasible warm start is rejected") {
  MilpProblem p;
  const auto y1 = p.add_binary("y1", -1.0);
  const auto y2 = p.add_binary("y2", -1.0);
  p.add_constraint("one", {{y1, 1.0}, {y2, 1.0}}, RowSense::kLe, 1.0);
  MilpOptions o;
  o.warm_start = std::vector<double>{1.0, 1.0};
  CHECK_THROWS_WITH_AS(solve_milp(p, o), doctest::Contains("warm start rejected"),
                       std::invalid_argument);
}

TEST_CASE("fixing binaries") {
  MilpProblem p;
  const auto y = p.add_binary("y", 5.0);
  const auto x = p.add_variable("x", 0.0, 10.0, VarKind::kContinuous, 1.0);
  p.add_constraint("need", {{x, 1.0}, {y, 4.0}}, RowSense::kGe, 6.0);
  const auto s0 = fix_binaries_and_solve(p, {0});
  const auto s1 = fix_binaries_and_solve(p, {1});
  CHECK(s0.objective == doctest::Approx(6.0));
  CHECK(s1.objective == doctest::Approx(7.0));
  const auto m = solve_milp(p);
  CHECK(m.objective == doctest::Approx(6.0));

  // Contradictory fixing.
  p.add_constraint("link", {{y, 1.0}}, RowSense::kEq, 1.0);
  CHECK(fix_binaries_and_solve(p, {0}).status == SolveStatus::kInfeasible);
  CHECK_THROWS_AS(fix_binaries_and_solve(p, {0, 1}), std::invalid_argument);

  MilpProblem lp;
  const auto z = lp.add_variable("z", 1.0, 4.0, VarKind::kContinuous, 2.0);
  (void)z;
  CHECK(fix_binaries_and_solve(lp, {}).objective == doctest::Approx(solve_lp(lp).objective));
}

TEST_CASE("badly scaled big-M rows") {
  // y = max(0, a) encoded with M = 1e6 next to unit coefficients.
  MilpProblem p;
  const auto a = p.add_variable("a", -3.0, 3.0);
  const auto hp = p.add_variable("hp", 0.0, kInf);
  const auto hm = p.add_variable("hm", 0.0, kInf);
  const auto z = p.add_binary("z");
  const auto out = p.add_variable("out", 0.0, kInf, VarKind::kContinuous, 1.0);
  p.add_constraint("split", {{hp, 1.0}, {hm, -1.0}, {a, -1.0}}, RowSense::kEq, 0.0);
  p.add_constraint("up", {{hp, 1.0}, {z, 1e6}}, RowSense::kLe, 1e6);
  p.add_constraint("dn", {{hm, 1.0}, {z, -1e6}}, RowSense::kLe, 0.0);
  p.add_constraint("out", {{hp, 1.0}, {out, -1.0}}, RowSense::kLe, 0.0);
  for (double v : {-2.0, 0.5, 2.5}) {
    p.set_bounds(a, v, v);
    MilpOptions o;
    o.relative_gap = 1e-9;
    const auto s = solve_milp(p, o);
    REQUIRE(s.status == SolveStatus::kOptimal);
    CHECK(s.objective == doctest::Approx(std::max(0.0, v)).epsilon(1e-9));
  }
}

TEST_CASE("propagation fixes a big-M ReLU with a known input") {
  for (double v : {-2.0, 1.5}) {
    MilpProblem p;
    const auto a = p.add_variable("a", v, v);
    const auto hp = p.add_variable("hp", 0.0, 10.0);
    const auto hm = p.add_variable("hm", 0.0, 10.0);
    const auto z = p.add_binary("z");
    p.add_constraint("split", {{hp, 1.0}, {hm, -1.0}, {a, -1.0}}, RowSense::kEq, 0.0);
    p.add_constraint("up", {{hp, 1.0}, {z, -10.0}}, RowSense::kLe, 0.0);
    p.add_constraint("dn", {{hm, 1.0}, {z, 10.0}}, RowSense::kLe, 10.0);
    std::vector<double> lo, hi;
    for (const auto& var : p.variables()) {
      lo.push_back(var.lower);
      hi.push_back(var.upper);
    }
    REQUIRE(lp::BoundPropagator(p).propagate(lo, hi));
    const double expect = v > 0 ? 1.0 : 0.0;
    CHECK(lo[z] == expect);
    CHECK(hi[z] == expect);
  }
}

TEST_CASE("propagation detects infeasible rows and keeps optima") {
  MilpProblem bad;
  const auto x = bad.add_binary("x");
  const auto y = bad.add_binary("y");
  bad.add_constraint("sum", {{x, 1.0}, {y, 1.0}}, RowSense::kGe, 3.0);
  std::vector<double> lo{0.0, 0.0}, hi{1.0, 1.0};
  CHECK_FALSE(lp::BoundPropagator(bad).propagate(lo, hi));
  CHECK(solve_milp(bad).status == SolveStatus::kInfeasible);

  std::mt19937_64 rng(77);
  for (int inst = 0; inst < 40; ++inst) {
    const MilpProblem p = testing::random_milp(rng, 2 + inst % 6, 3 + inst % 9, 5 + inst % 15);
    MilpOptions o;
    o.relative_gap = 1e-9;
    const MilpSolution s = solve_milp(p, o);
    if (s.status != SolveStatus::kOptimal) continue;
    std::vector<double> plo, phi;
    for (const auto& var : p.variables()) {
      plo.push_back(var.lower);
      phi.push_back(var.upper);
    }
    REQUIRE(lp::BoundPropagator(p).propagate(plo, phi));
    for (std::size_t j = 0; j < plo.size(); ++j) {
      CHECK(s.values[j] >= plo[j] - 1e-6);
      CHECK(s.values[j] <= phi[j] + 1e-6);
    }
  }
}

TEST_CASE("LP text export") {
  MilpProblem p;
  const auto y = p.add_binary("y[1]", -1.0);
  const auto x = p.add_variable("x", -kInf, kInf, VarKind::kContinuous, 0.5);
  p.add_constraint("c1", {{x, 1.0}, {y, -2.0}}, RowSense::kGe, -1.0);
  std::ostringstream os;
  write_lp_format(p, os);
  const std::string s = os.str();
  CHECK(s.find("Minimize") != std::string::npos);
  CHECK(s.find("c1: 1 x - 2 y_1_ >= -1") != std::string::npos);
  CHECK(s.find("x free") != std::string::npos);
  CHECK(s.find("Binaries\n y_1_") != std::string::npos);
}
