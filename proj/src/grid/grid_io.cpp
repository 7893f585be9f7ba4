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

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "steplearn/grid.hpp"

namespace steplearn {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ParseError(std::string("structured text: ") + e.what());
  }
}

YAML::Node need(const YAML::Node& n, const char* key, const std::string& where) {
  YAML::Node v = n[key];
  if (!v) throw ParseError(where + ": missing key '" + key + "'");
  return v;
}

template <typename T>
T as(const YAML::Node& n, const std::string& where) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(where + ": bad value");
  }
}

template <typename T>
T get(const YAML::Node& n, const char* key, const std::string& where) {
  return as<T>(need(n, key, where), where + "." + key);
}

template <typename T>
T get_or(const YAML::Node& n, const char* key, T fallback, const std::string& where) {
  YAML::Node v = n[key];
  if (!v || v.IsNull()) return fallback;
  return as<T>(v, where + "." + key);
}

std::string item(const char* list, std::size_t i) {
  return std::string(list) + "[" + std::to_string(i) + "]";
}

GeneratorKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "thermal") return GeneratorKind::kThermal;
  if (s == "wind") return GeneratorKind::kWind;
  if (s == "solar") return GeneratorKind::kSolar;
  throw ParseError(where + ": unknown generator kind '" + s + "'");
}

std::vector<double> scaled(const std::vector<double>& shape, double peak) {
  std::vector<double> out(shape);
  for (double& v : out) v *= peak;
  return out;
}

void emit_doubles(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

}  // namespace

Network parse_network(const std::string& text) {
  YAML::Node root = parse_yaml(text);
  if (!root.IsMap()) throw ParseError("network: top level must be a mapping");
  Network net;
  net.name = get_or<std::string>(root, "name", "", "network");
  net.horizon = get<std::size_t>(root, "horizon", "network");
  net.buses = get<std::vector<int>>(root, "buses", "network");

  std::map<std::string, std::vector<double>> shapes;
  if (YAML::Node p = root["profiles"]) {
    for (const auto& kv : p) {
      auto key = kv.first.as<std::string>();
      shapes[key] = as<std::vector<double>>(kv.second, "profiles." + key);
    }
  }
  auto shape = [&](const std::string& key, const std::string& where) {
    auto it = shapes.find(key);
    if (it == shapes.end()) throw ParseError(where + ": needs profiles." + key);
    return it->second;
  };

  YAML::Node lines = need(root, "lines", "network");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const YAML::Node& n = lines[i];
    const std::string w = item("lines", i);
    Line l;
    l.id = get<int>(n, "id", w);
    l.from_bus = get<int>(n, "from", w);
    l.to_bus = get<int>(n, "to", w);
    l.capacity = get<double>(n, "capacity", w);
    l.is_candidate = get_or<bool>(n, "candidate", false, w);
    l.cost_per_mw = get_or<double>(n, "cost_per_mw", 0.0, w);
    if (l.is_candidate && !n["cost_per_mw"]) {
      throw ParseError(w + ": candidate needs cost_per_mw");
    }
    net.lines.push_back(l);
  }

  YAML::Node gens = need(root, "generators", "network");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const YAML::Node& n = gens[i];
    const std::string w = item("generators", i);
    Generator g;
    g.id = get<std::string>(n, "id", w);
    g.bus = get<int>(n, "bus", w);
    g.kind = parse_kind(get<std::string>(n, "kind", w), w + ".kind");
    g.capacity = get<double>(n, "capacity", w);
    g.marginal_cost = get<double>(n, "cost", w);
    if (n["profile"]) {
      g.availability = get<std::vector<double>>(n, "profile", w);
    } else if (g.kind == GeneratorKind::kWind) {
      g.availability = shape("wind", w);
    } else if (g.kind == GeneratorKind::kSolar) {
      g.availability = shape("solar", w);
    }
    net.generators.push_back(std::move(g));
  }

  YAML::Node loads = need(root, "loads", "network");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const YAML::Node& n = loads[i];
    const std::string w = item("loads", i);
    Load d;
    d.id = get<std::string>(n, "id", w);
    d.bus = get<int>(n, "bus", w);
    if (n["profile"]) {
      d.profile = get<std::vector<double>>(n, "profile", w);
    } else {
      d.profile = scaled(shape("demand", w), get<double>(n, "peak", w));
    }
    net.loads.push_back(std::move(d));
  }
  net.finalize();
  return net;
}

Network load_network(const std::string& path) { return parse_network(read_file(path)); }

std::string serialize_network(const Network& net) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << net.name;
  out << YAML::Key << "horizon" << YAML::Value << net.horizon;
  out << YAML::Key << "buses" << YAML::Value << YAML::Flow << net.buses;
  out << YAML::Key << "lines" << YAML::Value << YAML::BeginSeq;
  for (const Line& l : net.lines) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << l.id;
    out << YAML::Key << "from" << YAML::Value << l.from_bus;
    out << YAML::Key << "to" << YAML::Value << l.to_bus;
    out << YAML::Key << "capacity" << YAML::Value << l.capacity;
    if (l.is_candidate) {
      out << YAML::Key << "candidate" << YAML::Value << true;
      out << YAML::Key << "cost_per_mw" << YAML::Value << l.cost_per_mw;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "generators" << YAML::Value << YAML::BeginSeq;
  for (const Generator& g : net.generators) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << g.id;
    out << YAML::Key << "bus" << YAML::Value << g.bus;
    out << YAML::Key << "kind" << YAML::Value << to_string(g.kind);
    out << YAML::Key << "capacity" << YAML::Value << g.capacity;
    out << YAML::Key << "cost" << YAML::Value << g.marginal_cost;
    if (g.renewable()) {
      out << YAML::Key << "profile" << YAML::Value;
      emit_doubles(out, g.availability);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "loads" << YAML::Value << YAML::BeginSeq;
  for (const Load& d : net.loads) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << d.id;
    out << YAML::Key << "bus" << YAML::Value << d.bus;
    out << YAML::Key << "profile" << YAML::Value;
    emit_doubles(out, d.profile);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_network(const Network& net, const std::string& path) {
  write_file(path, serialize_network(net));
}

ScenarioTree parse_tree(const std::string& text) {
  YAML::Node root = parse_yaml(text);
  if (!root.IsMap()) throw ParseError("tree: top level must be a mapping");
  ScenarioTree tree;
  tree.discount_rate = get_or<double>(root, "discount_rate", 0.06, "tree");
  tree.voll = get<double>(root, "voll", "tree");
  tree.gamma = get<double>(root, "gamma", "tree");
  tree.discount_investment = get_or<bool>(root, "discount_investment", true, "tree");
  YAML::Node nodes = need(root, "nodes", "tree");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const YAML::Node& n = nodes[i];
    const std::string w = item("nodes", i);
    TreeNode t;
    t.id = get<int>(n, "id", w);
    if (YAML::Node p = n["parent"]; p && !p.IsNull()) t.parent = as<int>(p, w + ".parent");
    t.year = get<int>(n, "year", w);
    t.probability = get<double>(n, "probability", w);
    t.growth = get_or<double>(n, "growth", 1.0, w);
    if (YAML::Node m = n["generator_multipliers"]) {
      t.generator_multipliers = as<std::map<std::string, double>>(m, w + ".generator_multipliers");
    }
    if (YAML::Node m = n["load_multipliers"]) {
      t.load_multipliers = as<std::map<std::string, double>>(m, w + ".load_multipliers");
    }
    t.stage = get_or<int>(n, "stage", -1, w);
    tree.nodes.push_back(std::move(t));
  }
  // Declared stages are checked against the parent links after ordering.
  std::map<int, int> declared;
  for (const TreeNode& t : tree.nodes) {
    if (t.stage >= 0) declared[t.id] = t.stage;
  }
  tree.finalize();
  for (const TreeNode& t : tree.nodes) {
    auto it = declared.find(t.id);
    if (it != declared.end() && it->second != t.stage) {
      throw ValidationError("nodes[id=" + std::to_string(t.id) + "].stage",
                            "stage must equal parent's stage + 1");
    }
  }
  return tree;
}

ScenarioTree load_tree(const std::string& path) { return parse_tree(read_file(path)); }

std::string serialize_tree(const ScenarioTree& tree) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "discount_rate" << YAML::Value << tree.discount_rate;
  out << YAML::Key << "voll" << YAML::Value << tree.voll;
  out << YAML::Key << "gamma" << YAML::Value << tree.gamma;
  out << YAML::Key << "discount_investment" << YAML::Value << tree.discount_investment;
  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const TreeNode& t : tree.nodes) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << t.id;
    out << YAML::Key << "parent" << YAML::Value;
    if (t.parent) {
      out << *t.parent;
    } else {
      out << YAML::Null;
    }
    out << YAML::Key << "stage" << YAML::Value << t.stage;
    out << YAML::Key << "year" << YAML::Value << t.year;
    out << YAML::Key << "probability" << YAML::Value << t.probability;
    out << YAML::Key << "growth" << YAML::Value << t.growth;
    if (!t.generator_multipliers.empty()) {
      out << YAML::Key << "generator_multipliers" << YAML::Value << YAML::Flow
          << t.generator_multipliers;
    }
    if (!t.load_multipliers.empty()) {
      out << YAML::Key << "load_multipliers" << YAML::Value << YAML::Flow
          << t.load_multipliers;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

void save_tree(const ScenarioTree& tree, const std::string& path) {
  write_file(path, serialize_tree(tree));
}

}  // namespace steplearn
