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

// Acceptance suite: one line per criterion, "criterion N: PASS|FAIL detail".
// Criteria 1-8 run twice into separate folders; criterion 9 compares the
// hashes of every file the two runs wrote.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "steplearn/pipeline.hpp"
#include "steplearn/random.hpp"
#include "support/embed_oracles.hpp"
#include "support/fixtures.hpp"
#include "support/mlp_oracles.hpp"
#include "support/oracles.hpp"

using namespace steplearn;
using namespace steplearn::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// ---- 1: embedding exactness ----
Outcome embedding_exactness(const fs::path& dir) {
  std::mt19937_64 rng(101);
  std::ostringstream csv;
  csv << "net,fixing,embedded,expected,abs_error\n";
  double worst = 0.0;
  std::size_t unsolved = 0, checks = 0;
  for (int net = 0; net < 50; ++net) {
    const std::size_t depth = 2 + net % 2;
    std::vector<std::size_t> hidden;
    for (std::size_t l = 0; l < depth; ++l) {
      hidden.push_back(std::uniform_int_distribution<std::size_t>(4, 64)(rng));
    }
    const std::size_t inputs = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
    const MlpModel m = briefly_trained(1000 + net, inputs, hidden, 20);
    for (int k = 0; k < 20; ++k) {
      std::vector<double> x(m.input_dim()), z(m.input_dim());
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::uniform_real_distribution<double>(m.x_min[i], m.x_max[i])(rng);
        z[i] = (x[i] - m.x_mean[i]) / m.x_scale[i];
      }
      // alternate the full and the stable-eliminated encodings
      const EmbedCheck c = embedded_minimum(m, x, k % 2 == 1);
      const double expected = std::max(m.normalize_target(0.0), naive_forward_normalized(m, z));
      const double err = std::abs(c.embedded - expected);
      unsolved += !c.solved;
      worst = std::max(worst, c.solved ? err : kInf);
      ++checks;
      csv << net << ',' << k << ',' << format_double(c.embedded) << ','
          << format_double(expected) << ',' << format_double(err) << '\n';
    }
  }
  write_text((dir / "embedding.csv").string(), csv.str());
  return {unsolved == 0 && worst <= 1e-5,
          std::to_string(checks) + " fixings, worst |embedded - forward| " + fmt(worst) +
              " (normalized), unsolved " + std::to_string(unsolved)};
}

// ---- 2: MILP vs enumeration ----
Outcome milp_oracle(const fs::path& dir) {
  std::mt19937_64 rng(202);
  std::ostringstream csv;
  csv << "instance,binaries,continuous,rows,solver,oracle,duality_residual\n";
  double worst_rel = 0.0, worst_dual = 0.0;
  std::size_t bad_status = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t nb = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t nc = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const std::size_t nr = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
    const MilpProblem p = random_milp(rng, nb, nc, nr);
    const double oracle = enumerate_binaries(p);
    MilpOptions o;
    o.relative_gap = 1e-9;
    const MilpSolution s = solve_milp(p, o);
    if (s.status != SolveStatus::kOptimal) {
      ++bad_status;
      continue;
    }
    worst_rel = std::max(worst_rel, std::abs(s.objective - oracle) / std::max(1.0, std::abs(oracle)));
    worst_dual = std::max(worst_dual, s.max_duality_residual);
    csv << i << ',' << nb << ',' << nc << ',' << nr << ',' << format_double(s.objective) << ','
        << format_double(oracle) << ',' << format_double(s.max_duality_residual) << '\n';
  }
  write_text((dir / "milp.csv").string(), csv.str());
  return {bad_status == 0 && worst_rel <= 1e-6 && worst_dual <= 1e-7,
          "100 instances, worst objective rel error " + fmt(worst_rel) +
              ", worst node duality residual " + fmt(worst_dual) + ", non-optimal " +
              std::to_string(bad_status)};
}

// ---- 3: gradients ----
Outcome gradient_check(const fs::path& dir) {
  struct Cfg {
    std::size_t inputs;
    std::vector<std::size_t> hidden;
    double delta, l2;
  };
  const std::vector<Cfg> cfgs{
      {3, {8}, 1.0, 0.0},          {5, {16, 8}, 1.0, 1e-4},    {4, {12, 12}, 0.5, 1e-3},
      {6, {32, 32}, 1.0, 1e-6},    {2, {6, 6, 6}, 2.0, 0.0},   {8, {24, 16}, 0.1, 1e-5},
      {10, {16, 16, 8}, 1.0, 0.0}, {3, {64}, 0.75, 1e-2},      {7, {10, 20}, 1.5, 1e-4},
      {5, {9, 9, 9}, 0.3, 1e-3}};
  std::ostringstream csv;
  csv << "config,checked,worst_relative_error\n";
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const GradientCheck g = finite_difference_check(300 + i, cfgs[i].inputs, cfgs[i].hidden, 40,
                                                    cfgs[i].delta, cfgs[i].l2, 100);
    worst = std::max(worst, g.worst_relative_error);
    checked += g.checked;
    csv << i << ',' << g.checked << ',' << format_double(g.worst_relative_error) << '\n';
  }
  write_text((dir / "gradients.csv").string(), csv.str());
  return {checked == 1000 && worst < 1e-4,
          std::to_string(checked) + " coordinates over 10 configurations, worst relative error " +
              fmt(worst)};
}

// ---- 4: training sanity ----
Outcome training_sanity(const fs::path& dir) {
  const Dataset d = affine_dataset(20, 5000, 404);
  TrainConfig cfg;
  cfg.seed = 4;
  const TrainResult r = train(d, Target::kCost, cfg);
  write_text((dir / "loss.csv").string(), r.history.to_csv());
  write_text((dir / "model.json").string(), model_to_json(r.model));
  const TrainMetrics& m = r.model.metrics;
  return {m.validation_r2 >= 0.999 && m.epochs_run <= 5000,
          "validation R2 " + fmt(m.validation_r2) + " after " + std::to_string(m.epochs_run) +
              " epochs (best " + std::to_string(m.best_epoch) + ")"};
}

// ---- 5: exact STEP vs plan enumeration ----
ScenarioTree seven_nodes(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> g(1.0, 1.4);
  ScenarioTree t;
  t.voll = std::uniform_real_distribution<double>(200.0, 3000.0)(rng);
  t.gamma = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
  t.nodes.push_back(TreeNode{1, std::nullopt, 0, 0, 1.0, 1.0, {}, {}});
  t.nodes.push_back(TreeNode{2, 1, 0, 5, 0.5, g(rng), {{"WT1", 1.1}}, {}});
  t.nodes.push_back(TreeNode{3, 1, 0, 5, 0.5, g(rng), {}, {}});
  t.nodes.push_back(TreeNode{4, 2, 0, 10, 0.25, g(rng), {}, {{"D3", 1.2}}});
  t.nodes.push_back(TreeNode{5, 2, 0, 10, 0.25, g(rng), {}, {}});
  t.nodes.push_back(TreeNode{6, 3, 0, 10, 0.25, g(rng), {{"PV1", 1.3}}, {}});
  t.nodes.push_back(TreeNode{7, 3, 0, 10, 0.25, g(rng), {}, {{"D2", 1.3}}});
  t.finalize();
  return t;
}

Outcome exact_step_oracle(const fs::path& dir) {
  std::mt19937_64 rng(505);
  std::ostringstream csv;
  csv << "instance,plans,feasible_plans,enumerated,solver,rel_diff\n";
  double worst = 0.0;
  std::size_t mismatched_feasibility = 0, instances = 0;
  for (int inst = 0; inst < 6; ++inst) {
    Network net = pocket();
    std::uniform_real_distribution<double> cost(200.0, 3000.0);
    for (Line& l : net.lines) {
      if (l.is_candidate) l.cost_per_mw = cost(rng);
    }
    net.lines.push_back(Line{5, 2, 3, 1.5, true, cost(rng)});
    net.finalize();
    const ScenarioTree tree = seven_nodes(rng);
    const ExactStepModel m = build_exact_step(net, tree);
    const auto plans = enumerate_plans(tree, net.num_candidates(), 256);
    double best = kInf;
    std::size_t feasible = 0;
    for (const auto& p : plans) {
      const StepSolution e = evaluate_plan(net, tree, m, p);
      if (e.feasible()) {
        ++feasible;
        best = std::min(best, e.total_cost);
      }
    }
    const StepSolution s = solve_exact_step(net, tree, m);
    double rel = 0.0;
    if (std::isfinite(best) != s.feasible()) {
      ++mismatched_feasibility;
    } else if (s.feasible()) {
      rel = (s.total_cost - best) / std::max(1.0, std::abs(best));
      worst = std::max(worst, std::abs(rel));
      // the solver may stop inside the gap but never below the true optimum
      if (rel < -1e-9) ++mismatched_feasibility;
    }
    ++instances;
    csv << inst << ',' << plans.size() << ',' << feasible << ',' << format_double(best) << ','
        << format_double(s.total_cost) << ',' << format_double(rel) << '\n';
  }
  write_text((dir / "step.csv").string(), csv.str());
  return {mismatched_feasibility == 0 && worst <= 1e-3,
          std::to_string(instances) + " seven-node instances with 125 plans each, worst relative "
          "difference " + fmt(worst) + " (gap tolerance 0.001)"};
}

// ---- 6 and 7: IEEE-33 end to end ----
struct DeskRun {
  Outcome six, seven;
  MlpModel cost;
  Dataset data;
};

double pinned_gap() {
  std::ifstream f(std::string(STEPLEARN_SOURCE_DIR) + "/tests/data/ieee33_pinned_gap.txt");
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty() && line[0] != '#') return std::stod(line);
  }
  throw std::runtime_error("pinned gap file missing");
}

DeskRun desk_scale(const fs::path& dir) {
  DeskRun out;
  ExperimentConfig cfg = load_experiment(std::string(STEPLEARN_SOURCE_DIR) + "/configs/ieee33.yaml");
  cfg.output_dir = dir.string();
  const PipelineInputs in = load_inputs(cfg);
  auto t0 = std::chrono::steady_clock::now();
  const SampleOutcome s = run_sample(cfg, in);
  write_text(cfg.dataset_path(), s.data.to_csv());
  write_text((dir / "sample_summary.json").string(), summary_json(s.summary, false));
  auto fit = [&](const ExperimentConfig& c, Target t) {
    TrainResult r = run_train(c, s.data, t);
    write_text(c.model_path(t), model_to_json(r.model));
    return r.model;
  };
  MlpModel cost = fit(cfg, Target::kCost), shed = fit(cfg, Target::kShed);
  const BenchmarkReport rep = run_benchmark(cfg, in, cost, shed);
  write_text((dir / "benchmark.csv").string(), rep.results_csv());
  write_text((dir / "plan_matrix.csv").string(), rep.plan_matrix_csv(in.network, in.tree));
  write_text((dir / "model_sizes.csv").string(), rep.model_sizes_csv());
  // timings are reported but excluded from the hash comparison
  const fs::path run = dir.parent_path();
  write_text((run.parent_path() / (run.filename().string() + "_timing_" +
                                   dir.filename().string() + ".csv")).string(),
             rep.timing_csv());

  bool valid = true, faster = true;
  double max_gap = 0.0, min_speed = kInf;
  for (const InstanceResult& r : rep.instances) {
    valid = valid && r.error.empty() && r.surrogate.plan_valid;
    max_gap = std::max(max_gap, r.gap_percent());
    faster = faster && r.surrogate.solve_seconds < r.exact.solve_seconds;
    min_speed = std::min(min_speed, r.exact.solve_seconds / r.surrogate.solve_seconds);
  }
  const double pin = pinned_gap();
  const InstanceResult& r0 = rep.instances.front();
  out.six.pass = valid && max_gap <= pin + 1e-6 && faster;
  out.six.detail = "N=" + std::to_string(cfg.sampler.runs) + ", " + std::to_string(s.summary.rows) +
                   " rows, shed rows " + fmt(100.0 * s.summary.shed_fraction()) +
                   "%; plans valid " + (valid ? "yes" : "no") + "; max gap " + fmt(max_gap) +
                   "% (pinned " + fmt(pin) + "%); surrogate faster on every instance " +
                   (faster ? "yes" : "no") + " (min solve speedup " + fmt(min_speed) +
                   "x); rows exact " + std::to_string(r0.exact.constraints) + " vs surrogate " +
                   std::to_string(r0.surrogate.constraints) + "; " +
                   fmt(seconds_since(t0)) + " s";

  SweepReport sw = run_sweep(cfg, in, cost, shed);
  int retries = 0;
  if (sw.agreement_at_zero() < 1.0) {
    // one retrain with fresh training seeds is allowed
    ExperimentConfig again = cfg;
    again.train_cost.seed = derive_seed({cfg.seed, 0x7265747279ULL, 1});
    again.train_shed.seed = derive_seed({cfg.seed, 0x7265747279ULL, 2});
    cost = fit(again, Target::kCost);
    shed = fit(again, Target::kShed);
    sw = run_sweep(again, in, cost, shed);
    retries = 1;
  }
  write_text((dir / "sweep.csv").string(), sw.csv());
  std::size_t agree = 0;
  for (const InstanceResult& c : sw.cells) agree += c.plans_agree();
  out.seven.pass = sw.agreement_at_zero() == 1.0;
  out.seven.detail = "agreement at kappa 0: " + fmt(100.0 * sw.agreement_at_zero()) +
                     "% (retrains used " + std::to_string(retries) + "), all levels " +
                     std::to_string(agree) + "/" + std::to_string(sw.cells.size());
  out.cost = std::move(cost);
  out.data = s.data;
  return out;
}

// ---- 8: Shapley properties ----
Outcome shapley_properties(const fs::path& dir, const MlpModel& model, const Dataset& data) {
  ExperimentConfig cfg;
  cfg.explain_background = 1000;
  cfg.explain_evaluation = 100;
  cfg.shapley.seed = 808;
  const AttributionReport r = run_explain(cfg, data, model);
  write_text((dir / "shap_cost.csv").string(), r.attributions_csv());
  const std::size_t passing = r.efficiency_passes(3.0);

  std::mt19937_64 rng(809);
  std::normal_distribution<double> nd;
  const std::size_t d = 7;
  std::vector<double> w(d);
  for (double& v : w) v = 2.0 * nd(rng);
  std::vector<std::vector<double>> bg(40, std::vector<double>(d)), ev(10, std::vector<double>(d));
  for (auto& row : bg) {
    for (double& v : row) v = nd(rng);
  }
  for (auto& row : ev) {
    for (double& v : row) v = 3.0 * nd(rng);
  }
  const Predictor f = [&](std::span<const double> x) {
    double s = -0.7;
    for (std::size_t i = 0; i < d; ++i) s += w[i] * x[i];
    return s;
  };
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("x" + std::to_string(i));
  ShapleyConfig ex;
  ex.exhaustive = true;
  const AttributionReport a = shapley_attribute(f, names, bg, ev, ex);
  std::vector<double> mu(d, 0.0);
  for (const auto& row : bg) {
    for (std::size_t i = 0; i < d; ++i) mu[i] += row[i] / double(bg.size());
  }
  double worst = 0.0;
  for (std::size_t p = 0; p < ev.size(); ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      worst = std::max(worst, std::abs(a.phi[p][i] - w[i] * (ev[p][i] - mu[i])));
    }
  }
  write_text((dir / "shap_affine.csv").string(), a.attributions_csv());
  return {passing == r.prediction.size() && r.prediction.size() == 100 && worst <= 1e-8,
          "efficiency within 3 SE on " + std::to_string(passing) + "/" +
              std::to_string(r.prediction.size()) + " points; affine closed form worst error " +
              fmt(worst)};
}

std::vector<Outcome> run_all(const fs::path& root) {
  std::vector<Outcome> out(8);
  auto dir = [&](int n) {
    const fs::path p = root / ("c" + std::to_string(n));
    fs::create_directories(p);
    return p;
  };
  auto guarded = [](const std::function<Outcome()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };
  out[0] = guarded([&] { return embedding_exactness(dir(1)); });
  out[1] = guarded([&] { return milp_oracle(dir(2)); });
  out[2] = guarded([&] { return gradient_check(dir(3)); });
  out[3] = guarded([&] { return training_sanity(dir(4)); });
  out[4] = guarded([&] { return exact_step_oracle(dir(5)); });
  DeskRun desk;
  try {
    desk = desk_scale(dir(6));
  } catch (const std::exception& e) {
    desk.six = desk.seven = Outcome{false, std::string("exception: ") + e.what()};
  }
  out[5] = desk.six;
  out[6] = desk.seven;
  out[7] = guarded([&] {
    if (desk.data.rows.empty()) return Outcome{false, "no desk-scale model to explain"};
    return shapley_properties(dir(8), desk.cost, desk.data);
  });
  return out;
}

std::map<std::string, std::size_t> hash_tree(const fs::path& root) {
  std::map<std::string, std::size_t> h;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    h[fs::relative(e.path(), root).string()] = std::hash<std::string>{}(read_text(e.path().string()));
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);
  const auto t0 = std::chrono::steady_clock::now();

  const std::vector<Outcome> first = run_all(out / "run_a");
  bool all = true;
  for (std::size_t i = 0; i < first.size(); ++i) {
    std::printf("criterion %zu: %s %s\n", i + 1, first[i].pass ? "PASS" : "FAIL",
                first[i].detail.c_str());
    std::fflush(stdout);
    all = all && first[i].pass;
  }

  run_all(out / "run_b");
  const auto a = hash_tree(out / "run_a"), b = hash_tree(out / "run_b");
  std::size_t differing = 0;
  std::string first_diff;
  for (const auto& [name, h] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != h) {
      if (first_diff.empty()) first_diff = name;
      ++differing;
    }
  }
  differing += b.size() > a.size() ? b.size() - a.size() : 0;
  std::ostringstream hashes;
  for (const auto& [name, h] : a) hashes << name << ' ' << std::hex << h << '\n';
  write_text((out / "hashes.txt").string(), hashes.str());
  const bool same = differing == 0 && !a.empty();
  std::printf("criterion 9: %s %zu files hashed, %zu differ%s\n", same ? "PASS" : "FAIL", a.size(),
              differing, first_diff.empty() ? "" : (" (first: " + first_diff + ")").c_str());
  all = all && same;
  std::printf("total %.1f s\n", seconds_since(t0));
  return all ? 0 : 1;
}
