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

#include <cmath>
#include <ostream>
#include <string>

#include "steplearn/milp.hpp"

namespace steplearn {
namespace {

// LP-format names may not start with a digit or contain most punctuation.
std::string sanitize(const std::string& name, const char* prefix, std::size_t index) {
  if (name.empty()) return prefix + std::to_string(index);
  std::string out;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') out = "_" + out;
  return out;
}

void write_number(std::ostream& out, double v) {
  out.precision(17);
  out << v;
}

void write_linear(std::ostream& out, const std::vector<std::string>& names,
                  const std::vector<Term>& terms) {
  bool first = true;
  std::size_t on_line = 0;
  for (const Term& t : terms) {
    if (t.coef == 0.0) continue;
    out << (t.coef < 0 ? " - " : (first ? " " : " + "));
    write_number(out, std::abs(t.coef));
    out << ' ' << names[t.var];
    first = false;
    if (++on_line % 8 == 0) out << "\n  ";
  }
  if (first && !names.empty()) out << " 0 " << names[0];
}

}  // namespace

void write_lp_format(const MilpProblem& problem, std::ostream& out) {
  const auto& vars = problem.variables();
  std::vector<std::string> names(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) names[j] = sanitize(vars[j].name, "x", j);

  std::vector<Term> obj;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (problem.objective()[j] != 0.0) obj.push_back({j, problem.objective()[j]});
  }
  out << "\\ offset ";
  write_number(out, problem.objective_offset());
  out << "\nMinimize\n obj:";
  write_linear(out, names, obj);
  out << "\nSubject To\n";
  const auto& rows = problem.constraints();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ' ' << sanitize(rows[r].name, "c", r) << ':';
    write_linear(out, names, rows[r].terms);
    switch (rows[r].sense) {
      case RowSense::kLe:
        out << " <= ";
        break;
      case RowSense::kGe:
        out << " >= ";
        break;
      case RowSense::kEq:
        out << " = ";
        break;
    }
    write_number(out, rows[r].rhs);
    out << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const Variable& v = vars[j];
    if (v.kind == VarKind::kBinary && v.lower == 0.0 && v.upper == 1.0) continue;
    out << ' ';
    if (v.lower == v.upper) {
      out << names[j] << " = ";
      write_number(out, v.lower);
    } else if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << names[j] << " free";
    } else {
      if (std::isinf(v.lower)) {
        out << "-inf";
      } else {
        write_number(out, v.lower);
      }
      out << " <= " << names[j] << " <= ";
      if (std::isinf(v.upper)) {
        out << "+inf";
      } else {
        write_number(out, v.upper);
      }
    }
    out << '\n';
  }
  bool header = false;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::kBinary) continue;
    if (!header) out << "Binaries\n";
    header = true;
    out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

}  // namespace steplearn
