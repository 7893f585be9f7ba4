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
#include <map>
#include <stdexcept>

#include "steplearn/embed.hpp"
#include "steplearn/sampler.hpp"

namespace steplearn {

std::size_t NeuronBounds::neurons() const {
  std::size_t n = 0;
  for (const auto& l : hidden) n += l.size();
  return n;
}

std::size_t NeuronBounds::stable_active() const {
  std::size_t n = 0;
  for (const auto& l : hidden) {
    for (const Interval& b : l) n += b.lo >= 0.0;
  }
  return n;
}

std::size_t NeuronBounds::stable_inactive() const {
  std::size_t n = 0;
  for (const auto& l : hidden) {
    for (const Interval& b : l) n += b.hi <= 0.0;
  }
  return n;
}

NeuronBounds propagate_bounds(const MlpModel& model, std::span<const Interval> box) {
  if (box.size() != model.input_dim()) {
    throw std::invalid_argument("input box has " + std::to_string(box.size()) +
                                " intervals, model expects " +
                                std::to_string(model.input_dim()));
  }
  std::vector<Interval> a(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!std::isfinite(box[i].lo) || !std::isfinite(box[i].hi) || box[i].lo > box[i].hi) {
      throw std::invalid_argument("input box interval " + std::to_string(i) +
                                  " is empty or unbounded");
    }
    a[i] = {(box[i].lo - model.x_mean[i]) / model.x_scale[i],
            (box[i].hi - model.x_mean[i]) / model.x_scale[i]};
  }
  NeuronBounds out;
  for (std::size_t m = 0; m < model.layers.size(); ++m) {
    const Layer& L = model.layers[m];
    std::vector<Interval> pre(L.rows);
    for (std::size_t r = 0; r < L.rows; ++r) {
      double lo = L.bias[r], hi = L.bias[r];
      for (std::size_t c = 0; c < L.cols; ++c) {
        const double w = L.w(r, c);
        if (!std::isfinite(w)) throw std::invalid_argument("non-finite weight in model");
        if (w >= 0.0) {
          lo += w * a[c].lo;
          hi += w * a[c].hi;
        } else {
          lo += w * a[c].hi;
          hi += w * a[c].lo;
        }
      }
      pre[r] = {lo, hi};
    }
    if (m + 1 == model.layers.size()) {
      out.output = pre[0];
      break;
    }
    a.resize(L.rows);
    for (std::size_t r = 0; r < L.rows; ++r) {
      a[r] = {std::max(0.0, pre[r].lo), std::max(0.0, pre[r].hi)};
    }
    out.hidden.push_back(std::move(pre));
  }
  return out;
}

NeuronBounds corner_bounds(const MlpModel& model, std::span<const Interval> box,
                           std::size_t max_free) {
  // reuse the interval pass for validation and the layer shapes
  NeuronBounds out = propagate_bounds(model, box);
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (box[i].lo < box[i].hi) free.push_back(i);
  }
  if (free.size() > max_free) {
    throw std::invalid_argument(std::to_string(free.size()) +
                                " varying inputs exceed the corner enumeration limit");
  }
  for (auto& l : out.hidden) {
    for (Interval& b : l) b = {kInf, -kInf};
  }
  out.output = {kInf, -kInf};
  std::vector<double> x(box.size()), a, next;
  for (std::size_t mask = 0; mask < (std::size_t{1} << free.size()); ++mask) {
    for (std::size_t i = 0; i < box.size(); ++i) x[i] = box[i].lo;
    for (std::size_t j = 0; j < free.size(); ++j) {
      if (mask >> j & 1) x[free[j]] = box[free[j]].hi;
    }
    a.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = (x[i] - model.x_mean[i]) / model.x_scale[i];
    for (std::size_t m = 0; m < model.layers.size(); ++m) {
      const Layer& L = model.layers[m];
      next.assign(L.rows, 0.0);
      for (std::size_t r = 0; r < L.rows; ++r) {
        double v = L.bias[r];
        for (std::size_t c = 0; c < L.cols; ++c) v += L.w(r, c) * a[c];
        Interval& b = m + 1 == model.layers.size() ? out.output : out.hidden[m][r];
        b.lo = std::min(b.lo, v);
        b.hi = std::max(b.hi, v);
        next[r] = std::max(0.0, v);
      }
      a.swap(next);
    }
  }
  // round-off slack so the corner solutions stay inside the big-M box
  auto widen = [](Interval& b) {
    const double eps = 1e-9 * (1.0 + std::max(std::abs(b.lo), std::abs(b.hi)));
    b.lo = b.lo > 0.0 ? std::max(0.0, b.lo - eps) : b.lo - eps;
    b.hi = b.hi < 0.0 ? std::min(0.0, b.hi + eps) : b.hi + eps;
  };
  for (auto& l : out.hidden) {
    for (Interval& b : l) widen(b);
  }
  widen(out.output);
  return out;
}

InputWiring InputWiring::constants(std::span<const double> values) {
  InputWiring w;
  w.var.assign(values.size(), std::nullopt);
  w.value.assign(values.begin(), values.end());
  return w;
}

namespace {

struct Expr {
  std::map<std::size_t, double> terms;
  double constant = 0.0;

  void add(const Expr& e, double scale) {
    if (scale == 0.0) return;
    for (auto [v, c] : e.terms) terms[v] += scale * c;
    constant += scale * e.constant;
  }
  std::vector<Term> row() const {
    std::vector<Term> out;
    for (auto [v, c] : terms) {
      if (c != 0.0) out.push_back({v, c});
    }
    return out;
  }
};

}  // namespace

EmbeddedNetwork embed_network(MilpProblem& p, const MlpModel& model, const NeuronBounds& bounds,
                              const InputWiring& inputs, const std::string& prefix,
                              const EmbedOptions& options) {
  const std::size_t d = model.input_dim();
  if (inputs.var.size() != d || inputs.value.size() != d) {
    throw std::invalid_argument("input wiring does not match the model's inputs");
  }
  if (bounds.hidden.size() + 1 != model.layers.size()) {
    throw std::invalid_argument("bounds do not match the model's layers");
  }
  const std::size_t vars0 = p.num_variables(), rows0 = p.num_constraints(),
                    bins0 = p.num_binaries();
  EmbeddedNetwork net;
  std::vector<Expr> a(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (inputs.var[i]) {
      a[i].terms[*inputs.var[i]] = 1.0 / model.x_scale[i];
      a[i].constant = -model.x_mean[i] / model.x_scale[i];
    } else {
      a[i].constant = (inputs.value[i] - model.x_mean[i]) / model.x_scale[i];
    }
  }
  for (std::size_t m = 0; m + 1 < model.layers.size(); ++m) {
    const Layer& L = model.layers[m];
    if (bounds.hidden[m].size() != L.rows) {
      throw std::invalid_argument("bounds do not match layer " + std::to_string(m));
    }
    std::vector<Expr> next(L.rows);
    for (std::size_t r = 0; r < L.rows; ++r) {
      Expr pre;
      pre.constant = L.bias[r];
      for (std::size_t c = 0; c < L.cols; ++c) pre.add(a[c], L.w(r, c));
      const Interval b = bounds.hidden[m][r];
      if (!std::isfinite(b.lo) || !std::isfinite(b.hi)) {
        throw std::invalid_argument("infinite neuron bound; the input box must be bounded");
      }
      EmbeddedNeuron info{m, r, b, NeuronState::kUnstable, {}, {}, {}};
      if (options.eliminate_stable && b.hi <= 0.0) {
        info.state = NeuronState::kInactive;
      } else if (options.eliminate_stable && b.lo >= 0.0) {
        info.state = NeuronState::kActive;
        next[r] = std::move(pre);
      } else {
        const std::string at = prefix + "[" + std::to_string(m) + "," + std::to_string(r) + "]";
        const double mu = std::max(0.0, b.hi), ml = std::max(0.0, -b.lo);
        const std::size_t hu = p.add_variable("hu" + at, 0.0, mu);
        const std::size_t hl = p.add_variable("hl" + at, 0.0, ml);
        const std::size_t z = p.add_binary("z" + at);
        std::vector<Term> t = pre.row();
        t.push_back({hu, -1.0});
        t.push_back({hl, 1.0});
        p.add_constraint("relu" + at, std::move(t), RowSense::kEq, -pre.constant);
        std::vector<Term> up{{hu, 1.0}}, lo{{hl, 1.0}};
        if (mu > 0.0) up.push_back({z, mu});
        if (ml > 0.0) lo.push_back({z, -ml});
        p.add_constraint("on" + at, std::move(up), RowSense::kLe, mu);
        p.add_constraint("off" + at, std::move(lo), RowSense::kLe, 0.0);
        info.upper_part = hu;
        info.lower_part = hl;
        info.active = z;
        next[r].terms[hu] = 1.0;
      }
      net.neurons.push_back(info);
    }
    a = std::move(next);
  }
  const Layer& out = model.layers.back();
  Expr pre;
  pre.constant = out.bias[0];
  for (std::size_t c = 0; c < out.cols; ++c) pre.add(a[c], out.w(0, c));
  const double floor = model.normalize_target(options.output_floor);
  const double top = std::max(floor, bounds.output.hi);
  net.output = p.add_variable(prefix + ".out", floor, top);
  std::vector<Term> t = pre.row();
  t.push_back({net.output, -1.0});
  p.add_constraint(prefix + ".out", std::move(t), RowSense::kLe, -pre.constant);
  net.output_scale = model.y_scale;
  net.output_shift = model.y_mean;
  net.variables_added = p.num_variables() - vars0;
  net.rows_added = p.num_constraints() - rows0;
  net.binaries_added = p.num_binaries() - bins0;
  return net;
}

std::string embedding_report_csv(
    const std::vector<std::pair<std::string, const EmbeddedNetwork*>>& nets) {
  std::string out = "network,layer,neuron,lower,upper,big_m,state\n";
  for (const auto& [name, net] : nets) {
    for (const EmbeddedNeuron& n : net->neurons) {
      const char* state = n.state == NeuronState::kActive     ? "active"
                          : n.state == NeuronState::kInactive ? "inactive"
                                                              : "unstable";
      out += name + ',' + std::to_string(n.layer) + ',' + std::to_string(n.index) + ',' +
             format_double(n.bounds.lo) + ',' + format_double(n.bounds.hi) + ',' +
             format_double(std::max(std::abs(n.bounds.lo), n.bounds.hi)) + ',' + state + '\n';
    }
  }
  return out;
}

namespace {

std::size_t hidden_units(const MlpModel& m) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) n += m.layers[l].rows;
  return n;
}

}  // namespace

std::size_t SurrogateStepModel::expected_variables(const MlpModel& cost, const MlpModel& shed,
                                                   std::size_t nodes, std::size_t candidates) {
  const std::size_t h = hidden_units(cost) + hidden_units(shed);
  return nodes * (2 * h + 2) + nodes * h + 3 * candidates * nodes;
}

std::size_t SurrogateStepModel::expected_binaries(const MlpModel& cost, const MlpModel& shed,
                                                  std::size_t nodes, std::size_t candidates) {
  return nodes * (hidden_units(cost) + hidden_units(shed)) + 3 * candidates * nodes;
}

std::vector<std::vector<double>> baseline_node_features(
    const Network& net, const ScenarioTree& tree, const std::vector<NodeScenario>* scenarios) {
  if (scenarios && scenarios->size() != tree.size()) {
    throw std::invalid_argument("one scenario per tree node is required");
  }
  const std::vector<std::uint8_t> none(net.num_candidates(), 0);
  const NodeScenario identity = NodeScenario::identity(net);
  std::vector<std::vector<double>> out;
  for (std::size_t s = 0; s < tree.size(); ++s) {
    out.push_back(node_features(net, tree, s, scenarios ? (*scenarios)[s] : identity, none));
  }
  return out;
}

SurrogateStepModel build_surrogate_step(const Network& net, const ScenarioTree& tree,
                                        const MlpModel& cost_model, const MlpModel& shed_model,
                                        const std::vector<std::vector<double>>& node_features,
                                        const SurrogateOptions& options) {
  const FeatureSchema schema = feature_schema(net);
  if (!(cost_model.schema == schema) || !(shed_model.schema == schema)) {
    throw std::invalid_argument("model feature schema does not match the network's sampler schema");
  }
  if (cost_model.target != Target::kCost || shed_model.target != Target::kShed) {
    throw std::invalid_argument("expected a cost model and a shed model");
  }
  if (node_features.size() != tree.size()) {
    throw std::invalid_argument("one feature vector per tree node is required");
  }
  const std::size_t K = net.num_candidates(), S = tree.size();
  SurrogateStepModel out;
  MilpProblem& p = out.problem;
  out.investment = append_investment_block(p, net, tree);
  for (std::size_t j : p.binary_indices()) p.set_branch_priority(j, 1);

  // schema slot -> candidate index for built bits
  std::vector<std::optional<std::size_t>> slot_candidate(schema.size());
  for (std::size_t k = 0; k < K; ++k) {
    slot_candidate[schema.index_of("y_" + std::to_string(net.candidate(k).id))] = k;
  }

  double offset = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    const std::vector<double>& f = node_features[s];
    if (f.size() != schema.size()) {
      throw std::invalid_argument("node feature vector has the wrong length");
    }
    const std::string node = "n" + std::to_string(tree.nodes[s].id);
    const double df = discount_factor(tree.nodes[s], tree.discount_rate);
    auto embed_one = [&](const MlpModel& m, const std::string& name, double weight,
                         std::vector<NeuronBounds>& bounds_out) {
      std::vector<Interval> box;
      InputWiring w;
      for (std::size_t i : m.kept_indices()) {
        if (slot_candidate[i]) {
          const Variable& v = p.variables()[out.investment.built[*slot_candidate[i] * S + s]];
          box.push_back({v.lower, v.upper});
          w.var.push_back(out.investment.built[*slot_candidate[i] * S + s]);
          w.value.push_back(0.0);
        } else {
          box.push_back({f[i], f[i]});
          w.var.push_back(std::nullopt);
          w.value.push_back(f[i]);
        }
      }
      std::size_t free = 0;
      for (const Interval& iv : box) free += iv.lo < iv.hi;
      NeuronBounds b = options.corner_bounds && free <= SurrogateOptions::kMaxCornerInputs ? corner_bounds(m, box)
                                                                          : propagate_bounds(m, box);
      EmbeddedNetwork e = embed_network(p, m, b, w, node + "." + name, options.embed);
      p.add_objective(e.output, weight * e.output_scale);
      offset += weight * e.output_shift;
      bounds_out.push_back(std::move(b));
      return e;
    };
    out.cost.push_back(embed_one(cost_model, "cost", df, out.cost_bounds));
    out.shed.push_back(embed_one(shed_model, "shed", df * tree.voll, out.shed_bounds));
    if (options.reliability_row) {
      const NodeScenario sc = scenario_from_features(net, schema, f);
      const double demand =
          make_context(net, tree, s, std::vector<std::uint8_t>(K, 0), &sc).total_demand();
      const EmbeddedNetwork& e = out.shed.back();
      p.add_constraint(node + ".reliability", {{e.output, e.output_scale}}, RowSense::kLe,
                       tree.gamma * demand - e.output_shift);
    }
  }
  p.set_objective_offset(offset);
  return out;
}

SurrogateSolution solve_surrogate_step(const SurrogateStepModel& model,
                                       const MilpOptions& options) {
  SurrogateSolution out;
  out.milp = solve_milp(model.problem, options);
  if (!out.milp.has_solution()) return out;
  const auto& x = out.milp.values;
  out.plan = model.investment.plan_from(x);
  out.predicted_objective = model.problem.evaluate_objective(x);
  for (const EmbeddedNetwork& e : model.cost) out.predicted_cost.push_back(e.original_output(x));
  for (const EmbeddedNetwork& e : model.shed) out.predicted_shed.push_back(e.original_output(x));
  return out;
}

}  // namespace steplearn
