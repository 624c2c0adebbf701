#include "treetalk/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "treetalk/error.hpp"

namespace treetalk {

namespace {

void require_finite(double w) {
  if (!std::isfinite(w)) {
    throw InvalidInputError("weight matrix contains a non-finite weight");
  }
}

// Primal/dual solution of min-cost assignment with rows <= cols.
struct DualSolution {
  std::vector<int> row_to_col;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials, all <= 0; zero on free columns
};

// Shortest augmenting path Hungarian method, O(n^2 m). `cost(i, j)` is read
// through the accessor so the caller can present a negated or transposed view.
template <typename Cost>
DualSolution solve_min_cost(std::size_t n, std::size_t m, Cost cost) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based, column 0 is the virtual source column.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  DualSolution out;
  out.row_to_col.assign(n, -1);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) out.row_to_col[p[j] - 1] = static_cast<int>(j - 1);
  }
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

// Equality subgraph of an optimal dual, in the caller's orientation.
// An assignment is optimal iff it uses only tight edges, has cardinality
// min(rows, cols) and covers every "must" vertex (strictly negative column
// potential on the long side; every vertex on the short side).
struct TightGraph {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::size_t>> row_adj;  // ascending column order
  std::vector<std::vector<std::size_t>> col_adj;  // ascending row order
  std::vector<char> must_row;
  std::vector<char> must_col;
};

// Bipartite matching over the live part of a TightGraph.
class LiveMatcher {
 public:
  LiveMatcher(const TightGraph& g, const std::vector<char>& row_live,
              const std::vector<char>& col_live)
      : g_(g), row_live_(row_live), col_live_(col_live) {}

  // Is there a matching that covers every live must-row? Starts from the
  // must-row edges of `seed` and augments the rest. On success `seed` is
  // replaced by the matching found.
  bool saturate_rows(std::vector<int>& seed_row_to_col) {
    row_to_col_.assign(g_.rows, -1);
    col_to_row_.assign(g_.cols, -1);
    for (std::size_t r = 0; r < g_.rows; ++r) {
      const int c = seed_row_to_col[r];
      if (!row_live_[r] || !g_.must_row[r] || c < 0 || !col_live_[c]) continue;
      row_to_col_[r] = c;
      col_to_row_[c] = static_cast<int>(r);
    }
    for (std::size_t r = 0; r < g_.rows; ++r) {
      if (!row_live_[r] || !g_.must_row[r] || row_to_col_[r] >= 0) continue;
      visited_.assign(g_.cols, 0);
      if (!augment_from_row(r)) return false;
    }
    seed_row_to_col = row_to_col_;
    return true;
  }

  bool saturate_cols(const std::vector<int>& seed_row_to_col) {
    row_to_col_.assign(g_.rows, -1);
    col_to_row_.assign(g_.cols, -1);
    for (std::size_t r = 0; r < g_.rows; ++r) {
      const int c = seed_row_to_col[r];
      if (!row_live_[r] || c < 0 || !col_live_[c] || !g_.must_col[c]) continue;
      row_to_col_[r] = c;
      col_to_row_[c] = static_cast<int>(r);
    }
    for (std::size_t c = 0; c < g_.cols; ++c) {
      if (!col_live_[c] || !g_.must_col[c] || col_to_row_[c] >= 0) continue;
      visited_.assign(g_.rows, 0);
      if (!augment_from_col(c)) return false;
    }
    return true;
  }

 private:
  bool augment_from_row(std::size_t r) {
    for (std::size_t c : g_.row_adj[r]) {
      if (!col_live_[c] || visited_[c]) continue;
      visited_[c] = 1;
      const int owner = col_to_row_[c];
      if (owner < 0 || augment_from_row(static_cast<std::size_t>(owner))) {
        row_to_col_[r] = static_cast<int>(c);
        col_to_row_[c] = static_cast<int>(r);
        return true;
      }
    }
    return false;
  }

  bool augment_from_col(std::size_t c) {
    for (std::size_t r : g_.col_adj[c]) {
      if (!row_live_[r] || visited_[r]) continue;
      visited_[r] = 1;
      const int owner = row_to_col_[r];
      if (owner < 0 || augment_from_col(static_cast<std::size_t>(owner))) {
        col_to_row_[c] = static_cast<int>(r);
        row_to_col_[r] = static_cast<int>(c);
        return true;
      }
    }
    return false;
  }

  const TightGraph& g_;
  const std::vector<char>& row_live_;
  const std::vector<char>& col_live_;
  std::vector<int> row_to_col_;
  std::vector<int> col_to_row_;
  std::vector<char> visited_;
};

}  // namespace

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights)
    : rows_(rows), cols_(cols), data_(std::move(weights)) {
  if (rows_ == 0 || cols_ == 0) {
    throw InvalidInputError("weight matrix must have at least one row and one column");
  }
  if (data_.size() != rows_ * cols_) {
    throw InvalidInputError("weight matrix has " + std::to_string(data_.size()) +
                            " entries, expected " + std::to_string(rows_ * cols_));
  }
  for (double w : data_) require_finite(w);
}

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols, double fill)
    : WeightMatrix(rows, cols, std::vector<double>(rows * cols, fill)) {}

WeightMatrix WeightMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw InvalidInputError("weight matrix must have at least one row and one column");
  }
  const std::size_t cols = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw InvalidInputError("ragged weight matrix");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return WeightMatrix(rows.size(), cols, std::move(flat));
}

void WeightMatrix::set(std::size_t r, std::size_t c, double w) {
  require_finite(w);
  data_[r * cols_ + c] = w;
}

WeightMatrix WeightMatrix::transposed() const {
  std::vector<double> t(data_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t[c * rows_ + r] = data_[r * cols_ + c];
  }
  return WeightMatrix(cols_, rows_, std::move(t));
}

Matching solve_max_assignment(const WeightMatrix& w) {
  const std::size_t n = w.rows();
  const std::size_t m = w.cols();
  const bool transpose = n > m;
  const std::size_t short_side = transpose ? m : n;
  const std::size_t long_side = transpose ? n : m;

  // Maximization by negation. In the transposed view solver row s is column s.
  auto cost = [&](std::size_t s, std::size_t l) {
    return transpose ? -w(l, s) : -w(s, l);
  };
  const DualSolution dual = solve_min_cost(short_side, long_side, cost);

  double scale = 1.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (double x : w.row(r)) scale = std::max(scale, std::abs(x));
  }
  const double eps = 1e-11 * scale * static_cast<double>(short_side + 1);

  TightGraph g;
  g.rows = n;
  g.cols = m;
  g.row_adj.resize(n);
  g.col_adj.resize(m);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t s = transpose ? c : r;
      const std::size_t l = transpose ? r : c;
      if (std::abs(cost(s, l) - dual.u[s] - dual.v[l]) <= eps) {
        g.row_adj[r].push_back(c);
        g.col_adj[c].push_back(r);
      }
    }
  }
  std::vector<char> must_long(long_side);
  for (std::size_t l = 0; l < long_side; ++l) must_long[l] = dual.v[l] < -eps;
  if (transpose) {
    g.must_row = std::move(must_long);
    g.must_col.assign(m, 1);
  } else {
    g.must_row.assign(n, 1);
    g.must_col = std::move(must_long);
  }

  std::vector<int> warm(n, -1);
  for (std::size_t s = 0; s < short_side; ++s) {
    const int l = dual.row_to_col[s];
    if (transpose) {
      warm[static_cast<std::size_t>(l)] = static_cast<int>(s);
    } else {
      warm[s] = l;
    }
  }

  // Fix rows in order, each to the smallest feasible column (or to
  // "unmatched" last, when the row may be left out).
  std::vector<char> row_live(n, 1), col_live(m, 1);
  Matching out;
  out.pairs.reserve(short_side);
  for (std::size_t r = 0; r < n; ++r) {
    row_live[r] = 0;
    bool placed = false;
    for (std::size_t c : g.row_adj[r]) {
      if (!col_live[c]) continue;
      col_live[c] = 0;
      std::vector<int> trial = warm;
      LiveMatcher matcher(g, row_live, col_live);
      if (matcher.saturate_rows(trial) && matcher.saturate_cols(trial)) {
        warm = std::move(trial);
        out.pairs.emplace_back(r, c);
        placed = true;
        break;
      }
      col_live[c] = 1;
    }
    if (placed) continue;
    if (!g.must_row[r]) {
      std::vector<int> trial = warm;
      LiveMatcher matcher(g, row_live, col_live);
      if (matcher.saturate_rows(trial) && matcher.saturate_cols(trial)) {
        warm = std::move(trial);
        continue;
      }
    }
    throw std::logic_error("assignment: equality subgraph has no feasible completion");
  }

  for (const auto& [r, c] : out.pairs) out.total += w(r, c);
  return out;
}

}  // namespace treetalk
