#include "treetalk/assignment.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "brute_force.hpp"
#include "treetalk/error.hpp"

using namespace treetalk;
using treetalk::oracle::brute_force_max;

namespace {

WeightMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> w(rows * cols);
  for (double& x : w) x = u(rng);
  return WeightMatrix(rows, cols, std::move(w));
}

// Values in {0, 1/4, ..., 1}: sums are exact and ties are common.
WeightMatrix coarse_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_int_distribution<int> u(0, 4);
  std::vector<double> w(rows * cols);
  for (double& x : w) x = u(rng) / 4.0;
  return WeightMatrix(rows, cols, std::move(w));
}

void expect_injective(const Matching& m, std::size_t rows, std::size_t cols) {
  std::set<std::size_t> rs, cs;
  for (auto [r, c] : m.pairs) {
    EXPECT_LT(r, rows);
    EXPECT_LT(c, cols);
    EXPECT_TRUE(rs.insert(r).second) << "row " << r << " used twice";
    EXPECT_TRUE(cs.insert(c).second) << "col " << c << " used twice";
  }
  EXPECT_EQ(m.pairs.size(), std::min(rows, cols));
}

}  // namespace

TEST(Assignment, SingleCell) {
  const Matching m = solve_max_assignment(WeightMatrix::from_rows({{0.7}}));
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0], std::make_pair(std::size_t{0}, std::size_t{0}));
  EXPECT_DOUBLE_EQ(m.total, 0.7);
}

TEST(Assignment, DominantDiagonal) {
  const Matching m =
      solve_max_assignment(WeightMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  const oracle::PairList diag{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_EQ(m.pairs, diag);
  EXPECT_DOUBLE_EQ(m.total, 3.0);
}

TEST(Assignment, TwoReferencesThreeGenerations) {
  // Six injections; best is (0,1)+(1,0) = 0.9 + 0.8.
  const WeightMatrix w = WeightMatrix::from_rows({{0.1, 0.9, 0.5}, {0.8, 0.2, 0.4}});
  const auto oracle = brute_force_max(2, 3, [&](auto r, auto c) { return w(r, c); });
  EXPECT_NEAR(oracle.best, 1.7, 1e-12);

  const Matching m = solve_max_assignment(w);
  const oracle::PairList expected{{0, 1}, {1, 0}};
  EXPECT_EQ(m.pairs, expected);
  EXPECT_NEAR(m.total, 1.7, 1e-12);
}

TEST(Assignment, RandomFiveByFiveMatchesPermutationEnumeration) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightMatrix w = random_matrix(rng, 5, 5);
    const auto oracle = brute_force_max(5, 5, [&](auto r, auto c) { return w(r, c); });
    EXPECT_NEAR(solve_max_assignment(w).total, oracle.best, 1e-9);
  }
}

TEST(Assignment, RejectsEmptyDimension) {
  EXPECT_THROW(WeightMatrix(0, 3, std::vector<double>{}), InvalidInputError);
  EXPECT_THROW(WeightMatrix(2, 0, std::vector<double>{}), InvalidInputError);
  EXPECT_THROW(WeightMatrix::from_rows({}), InvalidInputError);
}

TEST(Assignment, RejectsNonFiniteWeight) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(WeightMatrix::from_rows({{0.1, nan}}), InvalidInputError);
  EXPECT_THROW(WeightMatrix::from_rows({{inf}}), InvalidInputError);
  WeightMatrix w(1, 1);
  EXPECT_THROW(w.set(0, 0, -inf), InvalidInputError);
}

TEST(AssignmentProperty, OptimalAndInjectiveUpToSixBySix) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const WeightMatrix w = random_matrix(rng, rows, cols);
    const Matching m = solve_max_assignment(w);
    expect_injective(m, rows, cols);
    const auto oracle = brute_force_max(rows, cols, [&](auto r, auto c) { return w(r, c); });
    EXPECT_NEAR(m.total, oracle.best, 1e-9) << rows << "x" << cols;
    double sum = 0.0;
    for (auto [r, c] : m.pairs) sum += w(r, c);
    EXPECT_EQ(sum, m.total);
  }
}

TEST(AssignmentProperty, TiesResolveToLexicographicallySmallestPairList) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const WeightMatrix w = coarse_matrix(rng, rows, cols);
    const auto oracle = brute_force_max(rows, cols, [&](auto r, auto c) { return w(r, c); });
    const Matching m = solve_max_assignment(w);
    EXPECT_EQ(m.total, oracle.best);
    EXPECT_EQ(m.pairs, oracle.lexmin_best) << rows << "x" << cols << " trial " << trial;
  }
}

TEST(AssignmentProperty, ShiftKeepsPairsAndAddsKTimesConstant) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const WeightMatrix w = coarse_matrix(rng, rows, cols);
    const double shift = (trial % 2 == 0) ? 3.5 : -1.25;
    std::vector<double> shifted;
    for (std::size_t r = 0; r < rows; ++r) {
      for (double x : w.row(r)) shifted.push_back(x + shift);
    }
    const Matching a = solve_max_assignment(w);
    const Matching b = solve_max_assignment(WeightMatrix(rows, cols, shifted));
    EXPECT_EQ(a.pairs, b.pairs);
    EXPECT_NEAR(b.total, a.total + shift * static_cast<double>(std::min(rows, cols)), 1e-12);
  }
}

TEST(AssignmentProperty, TransposeKeepsTotal) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 7);
  for (int trial = 0; trial < 200; ++trial) {
    const WeightMatrix w = random_matrix(rng, dim(rng), dim(rng));
    EXPECT_NEAR(solve_max_assignment(w).total, solve_max_assignment(w.transposed()).total, 1e-9);
  }
}

TEST(AssignmentProperty, AppendingColumnNeverDecreasesTotal) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = dim(rng), cols = dim(rng);
    const WeightMatrix w = random_matrix(rng, rows, cols);
    std::vector<double> wider;
    for (std::size_t r = 0; r < rows; ++r) {
      for (double x : w.row(r)) wider.push_back(x);
      wider.push_back(u(rng));
    }
    EXPECT_GE(solve_max_assignment(WeightMatrix(rows, cols + 1, wider)).total,
              solve_max_assignment(w).total - 1e-12);
  }
}

TEST(Assignment, AllEqualWeightsPickDiagonalPrefix) {
  const Matching m = solve_max_assignment(WeightMatrix(3, 5, 0.0));
  const oracle::PairList expected{{0, 0}, {1, 1}, {2, 2}};
  EXPECT_EQ(m.pairs, expected);
  const Matching t = solve_max_assignment(WeightMatrix(5, 3, 0.0));
  EXPECT_EQ(t.pairs, expected);
}

TEST(Assignment, TenByTwoHundredIsFast) {
  std::mt19937_64 rng(41);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 40; ++i) {
    const Matching m = solve_max_assignment(random_matrix(rng, 10, 200));
    EXPECT_EQ(m.pairs.size(), 10u);
  }
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_LT(std::chrono::duration<double>(elapsed).count(), 2.0);
}
