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

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "steplearn/pipeline.hpp"
#include "steplearn/random.hpp"

namespace steplearn {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

template <class T>
void read(const YAML::Node& n, const char* key, T& out) {
  if (n && n[key]) out = n[key].as<T>();
}

void read_train(const YAML::Node& n, TrainConfig& c) {
  if (!n) return;
  read(n, "learning_rate", c.learning_rate);
  read(n, "huber_delta", c.huber_delta);
  read(n, "l2", c.l2);
  read(n, "batch_size", c.batch_size);
  read(n, "max_epochs", c.max_epochs);
  read(n, "patience", c.patience);
  read(n, "plateau_patience", c.plateau_patience);
  read(n, "plateau_factor", c.plateau_factor);
  read(n, "lr_floor", c.lr_floor);
  read(n, "validation_fraction", c.validation_fraction);
  read(n, "hidden", c.hidden);
  read(n, "include_infeasible", c.include_infeasible);
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

}  // namespace

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir) {
  YAML::Node y;
  try {
    y = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (!y["network"] || !y["tree"]) {
      throw ParseError("experiment config: 'network' and 'tree' are required");
    }
    c.network_path = resolve(base_dir, y["network"].as<std::string>());
    c.tree_path = resolve(base_dir, y["tree"].as<std::string>());
    if (y["output_dir"]) c.output_dir = resolve(base_dir, y["output_dir"].as<std::string>());
    read(y, "seed", c.seed);
    read(y, "jobs", c.jobs);
    if (const auto s = y["solver"]) {
      read(s, "gap", c.gap);
      read(s, "time_limit", c.time_limit);
    }
    if (const auto s = y["sampler"]) {
      read(s, "runs", c.sampler.runs);
      read(s, "half_range", c.sampler.half_range);
      read(s, "config_cap", c.sampler.config_cap);
    }
    if (const auto t = y["train"]) {
      read_train(t["cost"], c.train_cost);
      read_train(t["shed"], c.train_shed);
    }
    if (const auto t = y["tune"]) read(t, "budget", c.tune_budget);
    if (const auto s = y["surrogate"]) {
      read(s, "reliability_row", c.surrogate.reliability_row);
      read(s, "eliminate_stable", c.surrogate.embed.eliminate_stable);
      read(s, "corner_bounds", c.surrogate.corner_bounds);
    }
    if (const auto b = y["benchmark"]) read(b, "instances", c.instances);
    if (const auto s = y["sweep"]) {
      read(s, "kappa_levels", c.kappa_levels);
      read(s, "gamma_levels", c.gamma_levels);
    }
    if (const auto e = y["explain"]) {
      read(e, "background", c.explain_background);
      read(e, "evaluation", c.explain_evaluation);
      read(e, "permutations", c.shapley.permutations);
      read(e, "background_samples", c.shapley.background_samples);
      read(e, "top_k", c.top_k);
    }
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  if (c.sampler.runs < 1) throw ValidationError("sampler.runs", "must be at least 1");
  if (!(c.sampler.half_range >= 0.0)) {
    throw ValidationError("sampler.half_range", "must be nonnegative");
  }
  if (c.kappa_levels.empty()) throw ValidationError("sweep.kappa_levels", "must not be empty");
  for (double k : c.kappa_levels) {
    if (!(k >= 0.0)) throw ValidationError("sweep.kappa_levels", "levels must be nonnegative");
  }
  for (double g : c.gamma_levels) {
    if (!(g >= 0.0)) throw ValidationError("sweep.gamma_levels", "levels must be nonnegative");
  }
  if (c.instances < 1) throw ValidationError("benchmark.instances", "must be at least 1");
  c.reseed(c.seed);
  c.set_jobs(c.jobs);
  return c;
}

void ExperimentConfig::reseed(std::uint64_t master) {
  seed = master;
  sampler.seed = master;
  train_cost.seed = derive_seed({master, 1});
  train_shed.seed = derive_seed({master, 2});
  shapley.seed = derive_seed({master, 3});
}

void ExperimentConfig::set_jobs(std::size_t n) {
  jobs = std::max<std::size_t>(1, n);
  sampler.jobs = jobs;
  shapley.jobs = jobs;
}

ExperimentConfig load_experiment(const std::string& path) {
  return parse_experiment(read_text(path), fs::path(path).parent_path().string());
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

PipelineInputs load_inputs(const ExperimentConfig& cfg) {
  PipelineInputs in{load_network(cfg.network_path), load_tree(cfg.tree_path)};
  if (in.network.num_candidates() == 0) {
    throw ValidationError("lines", "planning needs at least one candidate line");
  }
  return in;
}

SampleOutcome run_sample(const ExperimentConfig& cfg, const PipelineInputs& in) {
  SampleOutcome out;
  out.data = generate_dataset(in.network, in.tree, cfg.sampler, &out.summary);
  return out;
}

std::string summary_json(const SampleSummary& s, bool include_timing) {
  std::ostringstream o;
  o << "{\n  \"expected_rows\": " << s.expected_rows << ",\n  \"rows\": " << s.rows
    << ",\n  \"infeasible_rows\": " << s.infeasible_rows << ",\n  \"shed_rows\": " << s.shed_rows
    << ",\n  \"shed_fraction\": " << format_double(s.shed_fraction())
    << ",\n  \"failures\": " << s.failures;
  if (include_timing) o << ",\n  \"wall_seconds\": " << format_double(s.wall_seconds);
  o << "\n}\n";
  return o.str();
}

TrainResult run_train(const ExperimentConfig& cfg, const Dataset& data, Target target) {
  return train(data, target, cfg.train_config(target));
}

HpoResult run_tune(const ExperimentConfig& cfg, const Dataset& data, Target target) {
  return hpo_search(data, target, cfg.tune_budget, cfg.train_config(target),
                    cfg.train_config(target).seed, cfg.jobs);
}

std::vector<NodeScenario> instance_scenarios(const Network& net, const ScenarioTree& tree,
                                             double half_range, std::uint64_t seed,
                                             std::size_t index) {
  const std::uint64_t stream = derive_seed({seed, 0x7465737420ULL, index});
  std::vector<NodeScenario> out;
  for (const TreeNode& n : tree.nodes) {
    out.push_back(draw_perturbation(net, half_range, stream, n.id, 0));
  }
  return out;
}

bool InstanceResult::plans_agree() const {
  return exact.feasible() && surrogate.plan_valid && exact.plan == surrogate.plan;
}

double InstanceResult::gap_percent() const {
  if (!exact.feasible() || !std::isfinite(surrogate.true_cost)) return kInf;
  return 100.0 * (surrogate.true_cost - exact.objective) / std::max(1.0, std::abs(exact.objective));
}

InstanceResult run_instance(const PipelineInputs& in, const MlpModel& cost,
                            const MlpModel& shed, const std::vector<NodeScenario>& scenarios,
                            const ExperimentConfig& cfg, bool with_warm_start) {
  InstanceResult r;
  const Network& net = in.network;
  const ScenarioTree& tree = in.tree;
  r.gamma = tree.gamma;
  StepOptions so;
  so.milp.relative_gap = cfg.gap;
  so.milp.time_limit = cfg.time_limit;

  auto t0 = std::chrono::steady_clock::now();
  const ExactStepModel em = build_exact_step(net, tree, &scenarios);
  r.exact.variables = em.problem.num_variables();
  r.exact.constraints = em.problem.num_constraints();
  r.exact.binaries = em.problem.num_binaries();
  const StepSolution es = solve_exact_step(net, tree, em, so);
  r.exact.total_seconds = seconds_since(t0);
  r.exact.solve_seconds = es.milp.wall_seconds;
  r.exact.status = es.milp.status;
  if (es.feasible()) {
    r.exact.objective = es.total_cost;
    r.exact.plan = es.plan;
  }

  t0 = std::chrono::steady_clock::now();
  const SurrogateStepModel sm = build_surrogate_step(
      net, tree, cost, shed, baseline_node_features(net, tree, &scenarios), cfg.surrogate);
  r.surrogate.variables = sm.problem.num_variables();
  r.surrogate.constraints = sm.problem.num_constraints();
  r.surrogate.binaries = sm.problem.num_binaries();
  const SurrogateSolution ss = solve_surrogate_step(sm, so.milp);
  r.surrogate.total_seconds = seconds_since(t0);
  r.surrogate.solve_seconds = ss.milp.wall_seconds;
  r.surrogate.status = ss.milp.status;
  if (ss.feasible()) {
    r.surrogate.plan = ss.plan;
    r.surrogate.plan_valid = validate_plan(ss.plan, tree, net.num_candidates()).empty();
    r.surrogate.predicted_objective = ss.predicted_objective;
    r.surrogate.predicted_cost = ss.predicted_cost;
    r.surrogate.predicted_shed = ss.predicted_shed;
    const StepSolution ev = evaluate_plan(net, tree, em, ss.plan, {});
    if (ev.feasible()) r.surrogate.true_cost = ev.total_cost;
  }

  if (with_warm_start && ss.feasible()) {
    StepOptions wo = so;
    wo.warm_start = ss.plan;
    t0 = std::chrono::steady_clock::now();
    try {
      const ExactStepModel wm = build_exact_step(net, tree, &scenarios);
      const StepSolution ws = solve_exact_step(net, tree, wm, wo);
      r.warm.total_seconds = seconds_since(t0);
      r.warm.solve_seconds = ws.milp.wall_seconds;
      r.warm.status = ws.milp.status;
      if (ws.feasible()) {
        r.warm.objective = ws.total_cost;
        r.warm.plan = ws.plan;
      }
    } catch (const std::invalid_argument& e) {
      r.warm_rejected = true;
      r.error = e.what();
    }
  }
  return r;
}

namespace {

std::string num(double v) { return std::isfinite(v) ? format_double(v) : "inf"; }

}  // namespace

std::string BenchmarkReport::results_csv() const {
  std::string out =
      "instance,half_range,gamma,exact_status,exact_objective,exact_plan,surrogate_status,"
      "surrogate_predicted,surrogate_true_cost,surrogate_plan,plan_valid,plans_agree,gap_percent,"
      "warm_status,warm_objective,warm_rejected\n";
  for (const InstanceResult& r : instances) {
    out += std::to_string(r.index) + ',' + num(r.half_range) + ',' + num(r.gamma) + ',' +
           to_string(r.exact.status) + ',' + num(r.exact.objective) + ',' +
           r.exact.plan.invest_string() + ',' + to_string(r.surrogate.status) + ',' +
           num(r.surrogate.predicted_objective) + ',' + num(r.surrogate.true_cost) + ',' +
           r.surrogate.plan.invest_string() + ',' + (r.surrogate.plan_valid ? "1" : "0") + ',' +
           (r.plans_agree() ? "1" : "0") + ',' + num(r.gap_percent()) + ',' +
           (r.warm_rejected ? "rejected" : to_string(r.warm.status)) + ',' + num(r.warm.objective) +
           ',' + (r.warm_rejected ? "1" : "0") + '\n';
  }
  return out;
}

std::string BenchmarkReport::timing_csv() const {
  std::string out =
      "instance,exact_solve_s,exact_total_s,surrogate_solve_s,surrogate_total_s,warm_solve_s,"
      "warm_total_s,solve_speedup,total_speedup\n";
  for (const InstanceResult& r : instances) {
    const double sp = r.surrogate.solve_seconds > 0
                          ? r.exact.solve_seconds / r.surrogate.solve_seconds
                          : kInf;
    const double tp = r.surrogate.total_seconds > 0
                          ? r.exact.total_seconds / r.surrogate.total_seconds
                          : kInf;
    out += std::to_string(r.index) + ',' + num(r.exact.solve_seconds) + ',' +
           num(r.exact.total_seconds) + ',' + num(r.surrogate.solve_seconds) + ',' +
           num(r.surrogate.total_seconds) + ',' + num(r.warm.solve_seconds) + ',' +
           num(r.warm.total_seconds) + ',' + num(sp) + ',' + num(tp) + '\n';
  }
  return out;
}

std::string BenchmarkReport::plan_matrix_csv(const Network& net,
                                             const ScenarioTree& tree) const {
  std::string out = "line,node,exact_investments,surrogate_investments,instances\n";
  for (std::size_t k = 0; k < net.num_candidates(); ++k) {
    for (std::size_t s = 0; s < tree.size(); ++s) {
      std::size_t e = 0, g = 0;
      for (const InstanceResult& r : instances) {
        if (r.exact.feasible()) e += r.exact.plan.at(k, s).fresh;
        if (r.surrogate.plan_valid) g += r.surrogate.plan.at(k, s).fresh;
      }
      out += std::to_string(net.candidate(k).id) + ',' + std::to_string(tree.nodes[s].id) + ',' +
             std::to_string(e) + ',' + std::to_string(g) + ',' +
             std::to_string(instances.size()) + '\n';
    }
  }
  return out;
}

std::string BenchmarkReport::model_sizes_csv() const {
  std::string out = "model,variables,constraints,binaries\n";
  if (instances.empty()) return out;
  const InstanceResult& r = instances.front();
  out += "exact," + std::to_string(r.exact.variables) + ',' + std::to_string(r.exact.constraints) +
         ',' + std::to_string(r.exact.binaries) + '\n';
  out += "surrogate," + std::to_string(r.surrogate.variables) + ',' +
         std::to_string(r.surrogate.constraints) + ',' + std::to_string(r.surrogate.binaries) +
         '\n';
  return out;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const PipelineInputs& in,
                              const MlpModel& cost, const MlpModel& shed) {
  BenchmarkReport rep;
  rep.instances.resize(cfg.instances);
  parallel_for(cfg.instances, cfg.jobs, [&](std::size_t i) {
    const auto sc = instance_scenarios(in.network, in.tree, cfg.sampler.half_range, cfg.seed, i);
    try {
      rep.instances[i] = run_instance(in, cost, shed, sc, cfg, true);
    } catch (const std::exception& e) {
      rep.instances[i].error = e.what();
    }
    rep.instances[i].index = i;
    rep.instances[i].half_range = cfg.sampler.half_range;
  });
  return rep;
}

std::string SweepReport::csv() const {
  std::string out =
      "kappa,gamma,exact_status,exact_objective,exact_plan,surrogate_plan,"
      "plans_agree,surrogate_true_cost,gap_percent,exact_infeasible\n";
  for (const InstanceResult& r : cells) {
    out += num(r.half_range) + ',' + num(r.gamma) + ',' +
           to_string(r.exact.status) + ',' + num(r.exact.objective) + ',' +
           r.exact.plan.invest_string() + ',' + r.surrogate.plan.invest_string() + ',' +
           (r.plans_agree() ? "1" : "0") + ',' + num(r.surrogate.true_cost) + ',' +
           num(r.gap_percent()) + ',' + (r.exact.feasible() ? "0" : "1") + '\n';
  }
  return out;
}

double SweepReport::agreement_at_zero() const {
  std::size_t n = 0, ok = 0;
  for (const InstanceResult& r : cells) {
    if (r.half_range != 0.0) continue;
    ++n;
    ok += r.plans_agree();
  }
  return n ? double(ok) / double(n) : 0.0;
}

SweepReport run_sweep(const ExperimentConfig& cfg, const PipelineInputs& in,
                      const MlpModel& cost, const MlpModel& shed) {
  SweepReport rep;
  std::vector<double> gammas = cfg.gamma_levels;
  if (gammas.empty()) gammas.push_back(in.tree.gamma);
  const std::size_t ng = gammas.size();
  rep.cells.resize(cfg.kappa_levels.size() * ng);
  parallel_for(rep.cells.size(), cfg.jobs, [&](std::size_t cell) {
    const double kappa = cfg.kappa_levels[cell / ng];
    const double gamma = gammas[cell % ng];
    PipelineInputs local = in;
    // shedding never exceeds demand, so the largest admissible gamma already means no cap
    local.tree.gamma = std::min(gamma, std::nextafter(1.0, 0.0));
    const double h = kappa * cfg.sampler.half_range;
    const auto sc = instance_scenarios(in.network, in.tree, h,
                                       derive_seed({cfg.seed, 0x73776565ULL}), cell);
    InstanceResult r;
    try {
      r = run_instance(local, cost, shed, sc, cfg, false);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.index = cell;
    r.half_range = kappa;
    r.gamma = gamma;
    rep.cells[cell] = std::move(r);
  });
  return rep;
}

AttributionReport run_explain(const ExperimentConfig& cfg, const Dataset& data,
                              const MlpModel& model) {
  const Dataset use = data.filtered(model.config.include_infeasible);
  if (use.rows.empty()) throw std::invalid_argument("no rows to explain");
  if (!(use.schema == model.schema)) {
    throw std::invalid_argument("dataset schema does not match the model");
  }
  std::vector<std::size_t> idx(use.rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed({cfg.shapley.seed, 0x6578706cULL}));
  rng.shuffle(idx.begin(), idx.end());
  const std::size_t nb = std::min(cfg.explain_background, idx.size());
  std::vector<std::vector<double>> bg, ev;
  for (std::size_t i = 0; i < nb; ++i) bg.push_back(use.rows[idx[i]].features);
  for (std::size_t i = nb; i < idx.size() && ev.size() < cfg.explain_evaluation; ++i) {
    ev.push_back(use.rows[idx[i]].features);
  }
  // small datasets: evaluate on background rows rather than nothing
  for (std::size_t i = 0; ev.size() < std::min(cfg.explain_evaluation, idx.size()); ++i) {
    ev.push_back(use.rows[idx[i]].features);
  }
  return shapley_attribute(model, bg, ev, cfg.shapley);
}

InvestmentPlan parse_plan(const Network& net, const ScenarioTree& tree, const std::string& text) {
  std::vector<std::vector<std::size_t>> first(net.num_candidates());
  std::string item;
  std::string norm = text;
  for (char& c : norm) {
    if (c == '\n' || c == ';' || c == ' ' || c == '\t') c = ',';
  }
  std::istringstream is(norm);
  while (std::getline(is, item, ',')) {
    if (item.empty() || item[0] == '#' || item == "none") continue;
    const auto at = item.find('@');
    if (at == std::string::npos) throw ParseError("plan entry '" + item + "' is not line@node");
    const int line = std::stoi(item.substr(0, at));
    const int node = std::stoi(item.substr(at + 1));
    std::optional<std::size_t> k;
    for (std::size_t c = 0; c < net.num_candidates(); ++c) {
      if (net.candidate(c).id == line) k = c;
    }
    if (!k) throw ValidationError("plan", "line " + std::to_string(line) + " is not a candidate");
    first[*k].push_back(tree.index_of(node));
  }
  return InvestmentPlan::from_investments(tree, net.num_candidates(), first);
}

std::string format_plan(const Network& net, const ScenarioTree& tree,
                        const InvestmentPlan& plan) {
  if (plan.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < net.num_candidates(); ++k) {
    for (std::size_t s = 0; s < tree.size(); ++s) {
      if (!plan.at(k, s).fresh) continue;
      if (!out.empty()) out += ',';
      out += std::to_string(net.candidate(k).id) + '@' + std::to_string(tree.nodes[s].id);
    }
  }
  return out.empty() ? "none" : out;
}

}  // namespace steplearn
