#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace treetalk {

// Dense rows x cols score matrix. Rows are references, columns generations.
class WeightMatrix {
 public:
  // Throws InvalidInputError on a zero dimension or a non-finite weight.
  WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights);
  WeightMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static WeightMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, double w);

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  WeightMatrix transposed() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct Matching {
  // Sorted by row index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total = 0.0;
};

// Maximum-weight assignment of cardinality min(rows, cols).
//
// Runs a shortest-augmenting-path Hungarian solver on the negated weights,
// then uses the optimal dual to pick, among all optimal assignments, the
// one whose row-sorted pair list is lexicographically smallest. `total` is
// the plain sum of the selected weights.
Matching solve_max_assignment(const WeightMatrix& w);

}  // namespace treetalk
