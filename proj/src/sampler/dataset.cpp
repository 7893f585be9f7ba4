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

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "steplearn/dataset.hpp"
#include "steplearn/grid.hpp"

namespace steplearn {

const char* to_string(Target t) { return t == Target::kCost ? "cost" : "shed"; }

Target parse_target(const std::string& name) {
  if (name == "cost") return Target::kCost;
  if (name == "shed") return Target::kShed;
  throw std::invalid_argument("unknown target '" + name + "' (expected cost or shed)");
}

std::size_t FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw std::out_of_range("no feature named " + name);
}

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError("dataset line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string Dataset::to_csv() const {
  std::string out = "node_id,config_mask";
  for (std::size_t i = 0; i < schema.size(); ++i) {
    out += ',';
    out += schema.names[i];
  }
  out += ",target_cost,target_shed,infeasible_flag\n";
  for (const DataRow& r : rows) {
    out += std::to_string(r.node_id);
    out += ',';
    out += std::to_string(r.config_mask);
    for (double f : r.features) {
      out += ',';
      out += format_double(f);
    }
    out += ',';
    out += format_double(r.cost);
    out += ',';
    out += format_double(r.shed);
    out += r.infeasible ? ",1\n" : ",0\n";
  }
  return out;
}

void Dataset::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << to_csv();
  if (!f) throw std::runtime_error("write failed: " + path);
}

Dataset Dataset::parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ParseError("dataset: empty file");
  const auto header = split(line);
  if (header.size() < 5 || header[0] != "node_id" || header[1] != "config_mask" ||
      header[header.size() - 3] != "target_cost" || header[header.size() - 2] != "target_shed" ||
      header.back() != "infeasible_flag") {
    throw ParseError("dataset: unexpected header");
  }
  Dataset d;
  for (std::size_t i = 2; i + 3 < header.size(); ++i) {
    d.schema.names.push_back(header[i]);
    d.schema.binary.push_back(header[i].rfind("y_", 0) == 0);
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError("dataset line " + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(cells.size()));
    }
    DataRow r;
    r.node_id = int(parse_double(cells[0], lineno));
    r.config_mask = std::uint32_t(parse_double(cells[1], lineno));
    for (std::size_t i = 2; i + 3 < cells.size(); ++i) {
      r.features.push_back(parse_double(cells[i], lineno));
    }
    r.cost = parse_double(cells[cells.size() - 3], lineno);
    r.shed = parse_double(cells[cells.size() - 2], lineno);
    r.infeasible = parse_double(cells.back(), lineno) != 0.0;
    d.rows.push_back(std::move(r));
  }
  return d;
}

Dataset Dataset::read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

Dataset Dataset::filtered(bool include_infeasible) const {
  Dataset d;
  d.schema = schema;
  for (const DataRow& r : rows) {
    if (include_infeasible || !r.infeasible) d.rows.push_back(r);
  }
  return d;
}

std::vector<double> Dataset::targets(Target t) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const DataRow& r : rows) out.push_back(r.target(t));
  return out;
}

}  // namespace steplearn
