#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "romkit/error.hpp"
#include "romkit/sparse.hpp"

using namespace romkit;

namespace {

SparseOperator random_spd(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) b(i, j) = (std::abs(i - j) <= 2) ? u(rng) : 0.0;
  const Eigen::MatrixXd a = b * b.transpose() + Eigen::MatrixXd::Identity(n, n) * 0.5;
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (a(i, j) != 0.0) t.push_back({i, j, a(i, j)});
  return SparseOperator::from_triplets(n, n, t);
}

}  // namespace

TEST(Sparse, TripletsSumDuplicatesAndSortColumns) {
  const auto a = SparseOperator::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, -1.0}});
  EXPECT_EQ(a.nnz(), 3);
  EXPECT_DOUBLE_EQ(a.coeff(0, 2), 1.5);
  EXPECT_DOUBLE_EQ(a.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(a.coeff(1, 0), 0.0);
  const auto cols = a.col_indices();
  EXPECT_LT(cols[0], cols[1]);
}

TEST(Sparse, RejectsMalformedStructure) {
  EXPECT_THROW(SparseOperator(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), Error);
  EXPECT_THROW(SparseOperator(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), Error);
  EXPECT_THROW(SparseOperator(1, 2, {0, 1}, {5}, {1.0}), Error);
  EXPECT_THROW(SparseOperator::from_triplets(2, 2, {{2, 0, 1.0}}), Error);
}

TEST(Sparse, MatVecAndFormsMatchDense) {
  std::mt19937_64 rng(7);
  const auto a = random_spd(30, rng);
  const Eigen::MatrixXd d = a.to_dense();
  const Eigen::VectorXd x = Eigen::VectorXd::Random(30);
  const Eigen::VectorXd y = Eigen::VectorXd::Random(30);
  EXPECT_LE(((a * x) - d * x).norm(), 1e-13 * (d * x).norm());
  EXPECT_NEAR(a.bilinear(x, y), x.dot(d * y), 1e-12);
  EXPECT_NEAR(a.quadratic_form(x), x.dot(d * x), 1e-12);
  EXPECT_TRUE(a.is_symmetric());
  EXPECT_LE((Eigen::MatrixXd(a.to_eigen()) - d).norm(), 0.0);
}

TEST(Sparse, LinearCombinationOnUnionPattern) {
  const auto a = SparseOperator::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  const auto b = SparseOperator::from_triplets(2, 2, {{0, 1, 3.0}, {1, 1, 1.0}});
  const std::vector<double> c{2.0, -1.0};
  const std::vector<SparseOperator> ops{a, b};
  const auto m = linear_combination(c, ops);
  EXPECT_DOUBLE_EQ(m.coeff(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(m.coeff(0, 1), -3.0);
  EXPECT_DOUBLE_EQ(m.coeff(1, 1), 3.0);
  EXPECT_EQ(m.nnz(), 3);
}

TEST(Sparse, SubmatrixSelectsRowsAndColumns) {
  std::mt19937_64 rng(3);
  const auto a = random_spd(10, rng);
  const std::vector<Index> keep{1, 4, 5, 9};
  const auto s = a.submatrix(keep, keep);
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < keep.size(); ++j)
      EXPECT_EQ(s.coeff(static_cast<Index>(i), static_cast<Index>(j)), a.coeff(keep[i], keep[j]));
}

TEST(Sparse, ConjugateGradientMatchesDenseSolve) {
  std::mt19937_64 rng(11);
  const auto a = random_spd(60, rng);
  const Eigen::VectorXd b = Eigen::VectorXd::Random(60);
  const auto cg = conjugate_gradient(a, b, 1e-12);
  EXPECT_TRUE(cg.converged);
  EXPECT_LE(cg.relative_residual, 1e-12);
  const Eigen::VectorXd ref = a.to_dense().ldlt().solve(b);
  EXPECT_LE((cg.solution - ref).norm(), 1e-9 * ref.norm());
}

TEST(Sparse, ConjugateGradientRejectsIndefinite) {
  const auto a = SparseOperator::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, -1.0}});
  EXPECT_THROW(conjugate_gradient(a, Eigen::VectorXd::Ones(2)), Error);
}
