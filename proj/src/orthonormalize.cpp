#include "romkit/reduced_basis.hpp"

#include <cmath>

#include "romkit/error.hpp"

namespace romkit {

Eigen::VectorXd ReducedBasis::reconstruct(const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() > vectors.cols()) {
    fail(ErrorCode::invalid_argument, "reconstruct: more coefficients than basis vectors");
  }
  return vectors.leftCols(coefficients.size()) * coefficients;
}

namespace {

// Two MGS passes over the columns [0, count) of q; returns the residual.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& q, Eigen::Index count, Eigen::VectorXd v,
                              const SparseOperator& gram) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const Eigen::VectorXd xq = gram * q.col(j).eval();
      v -= xq.dot(v) * q.col(j);
    }
  }
  return v;
}

}  // namespace

std::optional<Eigen::VectorXd> orthonormal_complement(const ReducedBasis& basis,
                                                      const Eigen::VectorXd& vector,
                                                      const SparseOperator& gram,
                                                      double drop_tol) {
  if (vector.size() != gram.rows() ||
      (basis.dim() > 0 && basis.vectors.rows() != vector.size())) {
    fail(ErrorCode::invalid_argument, "orthonormalize: vector length mismatch");
  }
  Eigen::VectorXd v = orthogonalize(basis.vectors, basis.vectors.cols(), vector, gram);
  const double norm = std::sqrt(std::max(0.0, gram.quadratic_form(v)));
  if (!(norm >= drop_tol)) return std::nullopt;
  return Eigen::VectorXd(v / norm);
}

OrthonormalizationResult orthonormalize(const Eigen::MatrixXd& vectors,
                                        const SparseOperator& gram, double drop_tol) {
  if (vectors.cols() == 0) fail(ErrorCode::invalid_argument, "orthonormalize: empty input");
  OrthonormalizationResult result;
  result.basis.vectors.resize(vectors.rows(), 0);
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    auto q = orthonormal_complement(result.basis, vectors.col(k), gram, drop_tol);
    if (!q) {
      result.dropped.push_back(static_cast<std::size_t>(k));
      continue;
    }
    auto& m = result.basis.vectors;
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = *q;
  }
  if (result.basis.dim() == 0) {
    fail(ErrorCode::empty_basis, "orthonormalize: every vector was numerically dependent");
  }
  return result;
}

}  // namespace romkit
