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

// Sparse LU factorisation of a simplex basis with Markowitz pivot selection,
// plus product-form updates for basis changes between refactorisations.

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace steplearn::lp {

/// Sparse column: (row, value) pairs.
using SparseColumn = std::vector<std::pair<int, double>>;

class BasisFactor {
 public:
  struct Singularity {
    std::vector<int> positions;  // basis positions with no usable pivot
    std::vector<int> rows;       // rows left unpivoted, same length
  };

  /// Factorises the m x m matrix whose column p is columns[p]. Columns that
  /// cannot be pivoted are reported; the caller replaces them (e.g. with the
  /// logical of one of the reported rows) and refactorises.
  Singularity factorize(std::size_t m, std::span<const SparseColumn> columns);

  /// In place: row-indexed right-hand side in, basis-position-indexed
  /// solution out.
  void ftran(std::vector<double>& x) const;
  /// In place: basis-position-indexed right-hand side in, row-indexed
  /// solution out (solves B^T y = c).
  void btran(std::vector<double>& y) const;

  /// Records the replacement of basis position `pos` by a column whose FTRAN
  /// image is `alpha`.
  void update(int pos, const std::vector<double>& alpha);

  std::size_t num_updates() const { return etas_.size(); }
  std::size_t factor_nonzeros() const { return factor_nnz_; }

 private:
  struct Step {
    int row;
    int col;
    double pivot;
    std::size_t l_begin, l_end;  // multipliers in l_entries_
    std::size_t u_begin, u_end;  // off-diagonal U entries in u_entries_
  };
  struct Eta {
    int pos;
    double pivot;
    std::size_t begin, end;
  };

  std::size_t m_ = 0;
  std::vector<Step> steps_;
  std::vector<std::pair<int, double>> l_entries_;
  std::vector<std::pair<int, double>> u_entries_;
  std::vector<Eta> etas_;
  std::vector<std::pair<int, double>> eta_entries_;
  std::size_t factor_nnz_ = 0;
  mutable std::vector<double> work_;
};

}  // namespace steplearn::lp
