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

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "steplearn/pipeline.hpp"

using namespace steplearn;

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out;
  std::size_t jobs = 0;
  std::string target = "both";
};

void add_common(CLI::App* app, Common& c, bool with_target) {
  app->add_option("-c,--config", c.config, "experiment YAML file")->required()->check(
      CLI::ExistingFile);
  app->add_option_function<std::uint64_t>(
      "--seed",
      [&c](const std::uint64_t& v) {
        c.seed = v;
        c.has_seed = true;
      },
      "master seed (overrides the config)");
  app->add_option("--out", c.out, "output folder (overrides the config)");
  app->add_option("-j,--jobs", c.jobs, "worker threads (overrides the config)");
  if (with_target) {
    app->add_option("--target", c.target, "cost, shed or both")
        ->check(CLI::IsMember({"cost", "shed", "both"}));
  }
}

ExperimentConfig configure(const Common& c) {
  ExperimentConfig cfg = load_experiment(c.config);
  if (c.has_seed) cfg.reseed(c.seed);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.jobs) cfg.set_jobs(c.jobs);
  return cfg;
}

std::vector<Target> targets(const Common& c) {
  if (c.target == "cost") return {Target::kCost};
  if (c.target == "shed") return {Target::kShed};
  return {Target::kCost, Target::kShed};
}

std::string path(const ExperimentConfig& cfg, const std::string& name) {
  return cfg.output_dir + "/" + name;
}

int cmd_sample(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const PipelineInputs in = load_inputs(cfg);
  const SampleOutcome s = run_sample(cfg, in);
  write_text(cfg.dataset_path(), s.data.to_csv());
  write_text(path(cfg, "sample_summary.json"), summary_json(s.summary, false));
  std::printf("rows %zu = %zu runs x %zu nodes x %zu configurations\n", s.summary.rows,
              cfg.sampler.runs, in.tree.size(),
              cfg.sampler.runs ? s.summary.expected_rows / cfg.sampler.runs / in.tree.size() : 0);
  std::printf("infeasible %zu, with shedding %zu (%.1f%%), failures %zu, %.1f s\n",
              s.summary.infeasible_rows, s.summary.shed_rows, 100.0 * s.summary.shed_fraction(),
              s.summary.failures, s.summary.wall_seconds);
  for (const auto& m : s.summary.failure_messages) std::fprintf(stderr, "failed: %s\n", m.c_str());
  return s.summary.failures == 0 ? 0 : 1;
}

void report_metrics(Target t, const TrainMetrics& m) {
  std::printf("%s: train loss %.3g, val loss %.3g, val R2 %.5f, val MAE %.4g, test loss %.3g, "
              "best epoch %zu of %zu\n",
              to_string(t), m.train_loss, m.validation_loss, m.validation_r2,
              m.validation_mae, m.test_loss, m.best_epoch, m.epochs_run);
}

int cmd_train(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const Dataset data = Dataset::read_csv(cfg.dataset_path());
  for (Target t : targets(c)) {
    const TrainResult r = run_train(cfg, data, t);
    save_model(r.model, cfg.model_path(t));
    write_text(path(cfg, std::string("loss_") + to_string(t) + ".csv"), r.history.to_csv());
    report_metrics(t, r.model.metrics);
  }
  return 0;
}

int cmd_tune(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const Dataset data = Dataset::read_csv(cfg.dataset_path());
  for (Target t : targets(c)) {
    const HpoResult r = run_tune(cfg, data, t);
    save_model(r.best, cfg.model_path(t));
    write_text(path(cfg, std::string("loss_") + to_string(t) + ".csv"), r.best_history.to_csv());
    write_text(path(cfg, std::string("tune_") + to_string(t) + ".csv"), r.leaderboard_csv());
    report_metrics(t, r.best.metrics);
  }
  return 0;
}

int cmd_benchmark(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const PipelineInputs in = load_inputs(cfg);
  const MlpModel cost = load_model(cfg.model_path(Target::kCost));
  const MlpModel shed = load_model(cfg.model_path(Target::kShed));
  const BenchmarkReport rep = run_benchmark(cfg, in, cost, shed);
  write_text(path(cfg, "benchmark.csv"), rep.results_csv());
  write_text(path(cfg, "benchmark_timing.csv"), rep.timing_csv());
  write_text(path(cfg, "plan_matrix.csv"), rep.plan_matrix_csv(in.network, in.tree));
  write_text(path(cfg, "model_sizes.csv"), rep.model_sizes_csv());
  int rc = 0;
  for (const InstanceResult& r : rep.instances) {
    if (!r.error.empty() && !r.warm_rejected) {
      std::fprintf(stderr, "instance %zu failed: %s\n", r.index, r.error.c_str());
      rc = 1;
      continue;
    }
    if (r.exact.plan.empty()) {
      std::printf("instance %zu: exact %s, no plan to compare\n", r.index,
                  to_string(r.exact.status));
      continue;
    }
    std::printf("instance %zu: exact %s (%.3f s), surrogate %s (%.3f s), gap %.3f%%%s\n", r.index,
                format_plan(in.network, in.tree, r.exact.plan).c_str(), r.exact.solve_seconds,
                format_plan(in.network, in.tree, r.surrogate.plan).c_str(),
                r.surrogate.solve_seconds, r.gap_percent(),
                r.warm_rejected ? ", warm start rejected" : "");
  }
  std::fputs(rep.model_sizes_csv().c_str(), stdout);
  return rc;
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const PipelineInputs in = load_inputs(cfg);
  const MlpModel cost = load_model(cfg.model_path(Target::kCost));
  const MlpModel shed = load_model(cfg.model_path(Target::kShed));
  const SweepReport rep = run_sweep(cfg, in, cost, shed);
  write_text(path(cfg, "sweep.csv"), rep.csv());
  int rc = 0;
  for (const InstanceResult& r : rep.cells) {
    if (!r.error.empty()) {
      std::fprintf(stderr, "cell %zu failed: %s\n", r.index, r.error.c_str());
      rc = 1;
    }
  }
  std::printf("plan agreement at kappa 0: %.0f%%\n", 100.0 * rep.agreement_at_zero());
  return rc;
}

int cmd_explain(const Common& c) {
  const ExperimentConfig cfg = configure(c);
  const Dataset data = Dataset::read_csv(cfg.dataset_path());
  for (Target t : targets(c)) {
    const MlpModel model = load_model(cfg.model_path(t));
    const AttributionReport rep = run_explain(cfg, data, model);
    write_text(path(cfg, std::string("shap_") + to_string(t) + ".csv"), rep.attributions_csv());
    write_text(path(cfg, std::string("shap_summary_") + to_string(t) + ".csv"),
               summary_csv(summarize_attributions(rep, cfg.top_k)));
    std::printf("%s: %zu points, efficiency within 3 sigma: %s\n", to_string(t),
                rep.prediction.size(), rep.efficiency_passes(3.0) == rep.prediction.size() ? "yes" : "no");
  }
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& plan_text) {
  const ExperimentConfig cfg = configure(c);
  const PipelineInputs in = load_inputs(cfg);
  const InvestmentPlan plan = parse_plan(in.network, in.tree, plan_text);
  const auto bad = validate_plan(plan, in.tree, in.network.num_candidates());
  if (!bad.empty()) {
    for (const auto& v : bad) std::fprintf(stderr, "invalid plan: %s\n", v.message.c_str());
    return 1;
  }
  const ExactStepModel m = build_exact_step(in.network, in.tree);
  const StepSolution s = evaluate_plan(in.network, in.tree, m, plan);
  if (!s.feasible()) {
    std::printf("plan %s: operations infeasible\n", format_plan(in.network, in.tree, plan).c_str());
    return 0;
  }
  std::printf("plan %s: total %.6g, investment %.6g, operations %.6g\n",
              format_plan(in.network, in.tree, plan).c_str(), s.total_cost, s.investment_cost,
              s.operational_cost);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steplearn: stochastic transmission expansion with ReLU surrogates"};
  app.require_subcommand(1);
  Common c;
  std::string plan_text;
  auto* sample = app.add_subcommand("sample", "generate the training dataset");
  auto* train = app.add_subcommand("train", "train surrogate networks");
  auto* tune = app.add_subcommand("tune", "random hyperparameter search");
  auto* bench = app.add_subcommand("benchmark", "exact vs surrogate vs warm start");
  auto* sweep = app.add_subcommand("sweep", "perturbation and reliability sensitivity grid");
  auto* explain = app.add_subcommand("explain", "Shapley attributions");
  auto* eval = app.add_subcommand("evaluate-plan", "cost of a fixed investment plan");
  add_common(sample, c, false);
  add_common(train, c, true);
  add_common(tune, c, true);
  add_common(bench, c, false);
  add_common(sweep, c, false);
  add_common(explain, c, true);
  add_common(eval, c, false);
  eval->add_option("--plan", plan_text, "comma separated line@node entries, or 'none'")
      ->required();
  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) return cmd_sample(c);
    if (*train) return cmd_train(c);
    if (*tune) return cmd_tune(c);
    if (*bench) return cmd_benchmark(c);
    if (*sweep) return cmd_sweep(c);
    if (*explain) return cmd_explain(c);
    if (*eval) return cmd_evaluate(c, plan_text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
