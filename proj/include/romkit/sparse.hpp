#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace romkit {

using Index = std::int64_t;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed-row sparse matrix with 64-bit indices.
///
/// Column indices are strictly increasing within each row; duplicates in the
/// input triplets are summed.
class SparseOperator {
 public:
  using EigenMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

  SparseOperator() = default;
  SparseOperator(Index rows, Index cols, std::vector<Index> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values);

  static SparseOperator from_triplets(Index rows, Index cols,
                                      std::vector<Triplet> triplets);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  /// x^T A y
  double bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double quadratic_form(const Eigen::VectorXd& x) const { return bilinear(x, x); }

  double coeff(Index row, Index col) const;
  bool is_symmetric(double tol = 1e-14) const;

  /// Restriction to the given (sorted) row and column index sets.
  SparseOperator submatrix(std::span<const Index> row_set,
                           std::span<const Index> col_set) const;

  Eigen::MatrixXd to_dense() const;
  EigenMatrix to_eigen() const;

  friend bool operator==(const SparseOperator&, const SparseOperator&) = default;

 private:
  void check_structure() const;

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

/// sum_k coeffs[k] * ops[k] on the union sparsity pattern.
SparseOperator linear_combination(std::span<const double> coeffs,
                                  std::span<const SparseOperator> ops);

struct CgResult {
  Eigen::VectorXd solution;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradient for symmetric positive definite
/// operators. Deterministic; starts from the zero vector.
CgResult conjugate_gradient(const SparseOperator& a, const Eigen::VectorXd& rhs,
                            double rel_tol = 1e-12, std::size_t max_iter = 0);

}  // namespace romkit
