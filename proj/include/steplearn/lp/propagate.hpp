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

// Activity-based bound tightening for MILP rows.

#pragma once

#include <cstddef>
#include <vector>

#include "steplearn/milp.hpp"

namespace steplearn::lp {

/// Row activity bounds imply variable bounds; binaries round inward. Every
/// point feasible for the original bounds stays feasible for the tightened
/// ones, up to a small safety margin on continuous bounds.
class BoundPropagator {
 public:
  explicit BoundPropagator(const MilpProblem& problem);

  /// Tightens `lower`/`upper` in place. Returns false when a row cannot be
  /// satisfied. With `seeds` only rows touching those variables start in the
  /// queue; otherwise every row does.
  bool propagate(std::vector<double>& lower, std::vector<double>& upper,
                 const std::vector<std::size_t>* seeds = nullptr) const;

 private:
  bool tighten_row(std::size_t r, std::vector<double>& lower, std::vector<double>& upper,
                   std::vector<std::size_t>& touched) const;

  const MilpProblem* problem_;
  std::vector<bool> integer_;
  std::vector<std::size_t> col_start_, col_rows_;
};

}  // namespace steplearn::lp
