#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "romkit/sparse.hpp"

namespace romkit {

/// V-orthonormal basis; one free-node vector per column.
struct ReducedBasis {
  Eigen::MatrixXd vectors;

  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& coefficients) const;
};

struct OrthonormalizationResult {
  ReducedBasis basis;
  std::vector<std::size_t> dropped;
};

inline constexpr double default_drop_tol = 1e-10;

/// Modified Gram-Schmidt in the gram-induced inner product with one
/// re-orthogonalization sweep. Columns whose residual norm falls below
/// drop_tol are dropped and reported; dropping everything throws empty_basis.
OrthonormalizationResult orthonormalize(const Eigen::MatrixXd& vectors,
                                        const SparseOperator& gram,
                                        double drop_tol = default_drop_tol);

/// Orthonormalizes one new vector against an existing basis. Returns nothing
/// when the residual norm is below drop_tol.
std::optional<Eigen::VectorXd> orthonormal_complement(const ReducedBasis& basis,
                                                      const Eigen::VectorXd& vector,
                                                      const SparseOperator& gram,
                                                      double drop_tol = default_drop_tol);

}  // namespace romkit
