#include "romkit/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "romkit/error.hpp"

namespace romkit {

SparseOperator::SparseOperator(Index rows, Index cols,
                               std::vector<Index> row_offsets,
                               std::vector<Index> col_indices,
                               std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  check_structure();
}

void SparseOperator::check_structure() const {
  if (rows_ < 0 || cols_ < 0 ||
      row_offsets_.size() != static_cast<std::size_t>(rows_) + 1 ||
      row_offsets_.front() != 0 ||
      row_offsets_.back() != static_cast<Index>(col_indices_.size()) ||
      col_indices_.size() != values_.size()) {
    fail(ErrorCode::invalid_argument, "sparse operator: inconsistent CSR arrays");
  }
  for (Index r = 0; r < rows_; ++r) {
    if (row_offsets_[r + 1] < row_offsets_[r]) {
      fail(ErrorCode::invalid_argument, "sparse operator: row offsets decrease at row " +
                                            std::to_string(r));
    }
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const Index c = col_indices_[k];
      if (c < 0 || c >= cols_ || (k > row_offsets_[r] && c <= col_indices_[k - 1])) {
        fail(ErrorCode::invalid_argument,
             "sparse operator: column indices not strictly increasing in row " +
                 std::to_string(r));
      }
    }
  }
}

SparseOperator SparseOperator::from_triplets(Index rows, Index cols,
                                             std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      fail(ErrorCode::invalid_argument, "triplet index out of range");
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    indices.push_back(t.col);
    values.push_back(t.value);
    ++offsets[static_cast<std::size_t>(t.row) + 1];
  }
  for (Index r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  return SparseOperator(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

Eigen::VectorXd SparseOperator::operator*(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) fail(ErrorCode::invalid_argument, "sparse multiply: size mismatch");
  Eigen::VectorXd y(rows_);
  for (Index r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      acc += values_[k] * x[col_indices_[k]];
    }
    y[r] = acc;
  }
  return y;
}

double SparseOperator::bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  if (x.size() != rows_ || y.size() != cols_) {
    fail(ErrorCode::invalid_argument, "bilinear form: size mismatch");
  }
  return x.dot((*this) * y);
}

double SparseOperator::coeff(Index row, Index col) const {
  const auto begin = col_indices_.begin() + row_offsets_[row];
  const auto end = col_indices_.begin() + row_offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

bool SparseOperator::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (std::abs(values_[k] - coeff(col_indices_[k], r)) > tol) return false;
    }
  }
  return true;
}

SparseOperator SparseOperator::submatrix(std::span<const Index> row_set,
                                         std::span<const Index> col_set) const {
  std::vector<Index> col_map(static_cast<std::size_t>(cols_), -1);
  for (std::size_t j = 0; j < col_set.size(); ++j) col_map[col_set[j]] = static_cast<Index>(j);

  std::vector<Index> offsets{0};
  std::vector<Index> indices;
  std::vector<double> values;
  for (const Index r : row_set) {
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const Index mapped = col_map[col_indices_[k]];
      if (mapped < 0) continue;
      indices.push_back(mapped);
      values.push_back(values_[k]);
    }
    offsets.push_back(static_cast<Index>(indices.size()));
  }
  return SparseOperator(static_cast<Index>(row_set.size()), static_cast<Index>(col_set.size()),
                        std::move(offsets), std::move(indices), std::move(values));
}

Eigen::MatrixXd SparseOperator::to_dense() const {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      dense(r, col_indices_[k]) = values_[k];
    }
  }
  return dense;
}

SparseOperator::EigenMatrix SparseOperator::to_eigen() const {
  EigenMatrix m(rows_, cols_);
  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    for (Index k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      entries.emplace_back(r, col_indices_[k], values_[k]);
    }
  }
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseOperator linear_combination(std::span<const double> coeffs,
                                  std::span<const SparseOperator> ops) {
  if (coeffs.size() != ops.size() || ops.empty()) {
    fail(ErrorCode::invalid_argument, "linear_combination: need one coefficient per operator");
  }
  const Index rows = ops.front().rows();
  const Index cols = ops.front().cols();
  for (const auto& op : ops) {
    if (op.rows() != rows || op.cols() != cols) {
      fail(ErrorCode::invalid_argument, "linear_combination: operator shapes differ");
    }
  }

  // Row-wise k-way merge; keeps the result sorted without a global sort.
  std::vector<Index> offsets{0};
  std::vector<Index> indices;
  std::vector<double> values;
  std::vector<Index> cursor(ops.size());
  for (Index r = 0; r < rows; ++r) {
    for (std::size_t q = 0; q < ops.size(); ++q) cursor[q] = ops[q].row_offsets()[r];
    while (true) {
      Index next = cols;
      for (std::size_t q = 0; q < ops.size(); ++q) {
        if (cursor[q] < ops[q].row_offsets()[r + 1]) {
          next = std::min(next, ops[q].col_indices()[cursor[q]]);
        }
      }
      if (next == cols) break;
      double acc = 0.0;
      for (std::size_t q = 0; q < ops.size(); ++q) {
        if (cursor[q] < ops[q].row_offsets()[r + 1] && ops[q].col_indices()[cursor[q]] == next) {
          acc += coeffs[q] * ops[q].values()[cursor[q]];
          ++cursor[q];
        }
      }
      indices.push_back(next);
      values.push_back(acc);
    }
    offsets.push_back(static_cast<Index>(indices.size()));
  }
  return SparseOperator(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

CgResult conjugate_gradient(const SparseOperator& a, const Eigen::VectorXd& rhs,
                            double rel_tol, std::size_t max_iter) {
  const Index n = a.rows();
  if (a.cols() != n || rhs.size() != n) {
    fail(ErrorCode::invalid_argument, "conjugate_gradient: size mismatch");
  }
  if (max_iter == 0) max_iter = static_cast<std::size_t>(10 * n + 100);

  Eigen::VectorXd inv_diag(n);
  for (Index i = 0; i < n; ++i) {
    const double d = a.coeff(i, i);
    if (!(d > 0.0)) fail(ErrorCode::solver_failure, "conjugate_gradient: non-positive diagonal");
    inv_diag[i] = 1.0 / d;
  }

  CgResult result;
  result.solution = Eigen::VectorXd::Zero(n);
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }

  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd ap = a * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) fail(ErrorCode::solver_failure, "conjugate_gradient: operator not SPD");
    const double alpha = rz / pap;
    result.solution += alpha * p;
    r -= alpha * ap;
    result.iterations = it;
    result.relative_residual = r.norm() / rhs_norm;
    if (result.relative_residual <= rel_tol) {
      result.converged = true;
      return result;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  return result;
}

}  // namespace romkit
