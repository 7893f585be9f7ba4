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

#include "steplearn/lp/sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace steplearn::lp {
namespace {

constexpr double kAbsPivotTol = 1e-11;
constexpr double kRowSingletonThreshold = 0.01;
constexpr double kMarkowitzThreshold = 0.1;
constexpr int kMarkowitzColumns = 4;

// Count buckets with lazy deletion: entries are validated when read.
class Buckets {
 public:
  explicit Buckets(std::size_t m) : b_(m + 2) {}
  void push(std::size_t count, int idx) { b_[std::min(count, b_.size() - 1)].push_back(idx); }
  std::vector<int>& at(std::size_t count) { return b_[count]; }
  std::size_t size() const { return b_.size(); }

 private:
  std::vector<std::vector<int>> b_;
};

template <typename Pred>
void swap_erase_if(std::vector<int>& v, Pred pred) {
  for (std::size_t i = 0; i < v.size();) {
    if (pred(v[i])) {
      v[i] = v.back();
      v.pop_back();
    } else {
      ++i;
    }
  }
}

}  // namespace

BasisFactor::Singularity BasisFactor::factorize(
    std::size_t m, std::span<const SparseColumn> columns) {
  m_ = m;
  steps_.clear();
  l_entries_.clear();
  u_entries_.clear();
  etas_.clear();
  eta_entries_.clear();
  work_.assign(m, 0.0);

  std::vector<SparseColumn> colv(m);
  std::vector<std::vector<int>> rowp(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (const auto& [i, v] : columns[j]) {
      if (v != 0.0) {
        colv[j].emplace_back(i, v);
        rowp[i].push_back(int(j));
      }
    }
  }
  std::vector<char> col_active(m, 1), row_active(m, 1);
  Buckets cb(m), rb(m);
  for (std::size_t j = 0; j < m; ++j) cb.push(colv[j].size(), int(j));
  for (std::size_t i = 0; i < m; ++i) rb.push(rowp[i].size(), int(i));
  std::vector<int> mark(m, -1);
  Singularity sing;

  auto col_max = [&](int j) {
    double mx = 0.0;
    for (const auto& e : colv[j]) mx = std::max(mx, std::abs(e.second));
    return mx;
  };
  auto drop_column = [&](int j) {
    for (const auto& [i, v] : colv[j]) {
      swap_erase_if(rowp[i], [j](int c) { return c == j; });
      rb.push(rowp[i].size(), i);
    }
    colv[j].clear();
    col_active[j] = 0;
    sing.positions.push_back(j);
  };

  std::size_t remaining = m;
  while (remaining > 0) {
    int p = -1, q = -1;

    // Empty or numerically empty columns are singular.
    for (std::size_t c = 0; c <= 1 && q < 0; ++c) {
      auto& bucket = cb.at(c);
      while (!bucket.empty() && q < 0) {
        int j = bucket.back();
        bucket.pop_back();
        if (!col_active[j] || colv[j].size() != c) continue;
        if (c == 0 || std::abs(colv[j][0].second) < kAbsPivotTol) {
          drop_column(j);
          --remaining;
          continue;
        }
        q = j;
        p = colv[j][0].first;
      }
    }
    if (remaining == 0) break;

    if (q < 0) {
      auto& bucket = rb.at(1);
      while (!bucket.empty() && q < 0) {
        int i = bucket.back();
        bucket.pop_back();
        if (!row_active[i] || rowp[i].size() != 1) continue;
        int j = rowp[i][0];
        double v = 0.0;
        for (const auto& e : colv[j]) {
          if (e.first == i) v = e.second;
        }
        if (std::abs(v) >= kAbsPivotTol &&
            std::abs(v) >= kRowSingletonThreshold * col_max(j)) {
          p = i;
          q = j;
        }
      }
    }

    if (q < 0) {
      double best_cost = std::numeric_limits<double>::infinity();
      int examined = 0;
      std::vector<int> dead;
      for (std::size_t c = 2; c < cb.size() && examined < kMarkowitzColumns; ++c) {
        auto& bucket = cb.at(c);
        for (std::size_t k = 0; k < bucket.size() && examined < kMarkowitzColumns;) {
          int j = bucket[k];
          if (!col_active[j] || colv[j].size() != c) {
            bucket[k] = bucket.back();
            bucket.pop_back();
            continue;
          }
          ++k;
          const double mx = col_max(j);
          if (mx < kAbsPivotTol) {
            dead.push_back(j);
            continue;
          }
          ++examined;
          for (const auto& [i, v] : colv[j]) {
            const double a = std::abs(v);
            if (a < kAbsPivotTol || a < kMarkowitzThreshold * mx) continue;
            const double cost = double(rowp[i].size() - 1) * double(c - 1);
            if (cost < best_cost) {
              best_cost = cost;
              p = i;
              q = j;
            }
          }
        }
      }
      std::sort(dead.begin(), dead.end());
      dead.erase(std::unique(dead.begin(), dead.end()), dead.end());
      for (int j : dead) {
        if (j == q || !col_active[j]) continue;
        drop_column(j);
        --remaining;
      }
      if (q < 0) {
        if (dead.empty()) {
          for (std::size_t j = 0; j < m; ++j) {
            if (col_active[j]) drop_column(int(j));
          }
          break;
        }
        continue;
      }
    }

    // Eliminate with pivot (p, q).
    double pivot = 0.0;
    for (const auto& e : colv[q]) {
      if (e.first == p) pivot = e.second;
    }
    Step step{p, q, pivot, l_entries_.size(), 0, u_entries_.size(), 0};
    for (int j : rowp[p]) {
      if (j == q) continue;
      auto& col = colv[j];
      for (std::size_t k = 0; k < col.size(); ++k) {
        if (col[k].first == p) {
          u_entries_.emplace_back(j, col[k].second);
          col[k] = col.back();
          col.pop_back();
          break;
        }
      }
    }
    step.u_end = u_entries_.size();
    for (const auto& [i, v] : colv[q]) {
      if (i == p) continue;
      l_entries_.emplace_back(i, v / pivot);
      swap_erase_if(rowp[i], [q](int c) { return c == q; });
    }
    step.l_end = l_entries_.size();
    colv[q].clear();
    rowp[p].clear();
    col_active[q] = 0;
    row_active[p] = 0;
    --remaining;

    for (std::size_t u = step.u_begin; u < step.u_end; ++u) {
      const auto [j, upj] = u_entries_[u];
      auto& col = colv[j];
      for (std::size_t k = 0; k < col.size(); ++k) mark[col[k].first] = int(k);
      for (std::size_t l = step.l_begin; l < step.l_end; ++l) {
        const auto [i, li] = l_entries_[l];
        if (mark[i] >= 0) {
          col[mark[i]].second -= li * upj;
        } else {
          col.emplace_back(i, -li * upj);
          rowp[i].push_back(j);
        }
      }
      for (const auto& e : col) mark[e.first] = -1;
      cb.push(col.size(), j);
    }
    for (std::size_t l = step.l_begin; l < step.l_end; ++l) {
      const int i = l_entries_[l].first;
      rb.push(rowp[i].size(), i);
    }
    steps_.push_back(step);
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (row_active[i]) sing.rows.push_back(int(i));
  }
  factor_nnz_ = l_entries_.size() + u_entries_.size() + steps_.size();
  return sing;
}

void BasisFactor::ftran(std::vector<double>& x) const {
  work_.assign(x.begin(), x.end());
  for (const Step& s : steps_) {
    const double wp = work_[s.row];
    if (wp == 0.0) continue;
    for (std::size_t k = s.l_begin; k < s.l_end; ++k) {
      work_[l_entries_[k].first] -= l_entries_[k].second * wp;
    }
  }
  std::fill(x.begin(), x.end(), 0.0);
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double v = work_[it->row];
    for (std::size_t k = it->u_begin; k < it->u_end; ++k) {
      v -= u_entries_[k].second * x[u_entries_[k].first];
    }
    x[it->col] = v / it->pivot;
  }
  for (const Eta& e : etas_) {
    double xr = x[e.pos];
    if (xr == 0.0) continue;
    xr /= e.pivot;
    x[e.pos] = xr;
    for (std::size_t k = e.begin; k < e.end; ++k) {
      x[eta_entries_[k].first] -= eta_entries_[k].second * xr;
    }
  }
}

void BasisFactor::btran(std::vector<double>& y) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = y[it->pos];
    for (std::size_t k = it->begin; k < it->end; ++k) {
      s -= eta_entries_[k].second * y[eta_entries_[k].first];
    }
    y[it->pos] = s / it->pivot;
  }
  work_.assign(m_, 0.0);
  for (const Step& s : steps_) {
    const double zp = y[s.col] / s.pivot;
    work_[s.row] = zp;
    if (zp == 0.0) continue;
    for (std::size_t k = s.u_begin; k < s.u_end; ++k) {
      y[u_entries_[k].first] -= u_entries_[k].second * zp;
    }
  }
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    double s = 0.0;
    for (std::size_t k = it->l_begin; k < it->l_end; ++k) {
      s += l_entries_[k].second * work_[l_entries_[k].first];
    }
    work_[it->row] -= s;
  }
  y.assign(work_.begin(), work_.end());
}

void BasisFactor::update(int pos, const std::vector<double>& alpha) {
  Eta e{pos, alpha[pos], eta_entries_.size(), 0};
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (int(i) != pos && std::abs(alpha[i]) > 1e-14) {
      eta_entries_.emplace_back(int(i), alpha[i]);
    }
  }
  e.end = eta_entries_.size();
  etas_.push_back(e);
}

}  // namespace steplearn::lp
