#pragma once

#include <cstddef>
#include <iosfwd>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "romkit/reduced_basis.hpp"
#include "romkit/snapshots.hpp"
#include "romkit/sparse.hpp"

namespace romkit {

struct PodSpectrum {
  /// Nonincreasing, negatives from round-off clamped to zero.
  std::vector<double> eigenvalues;
  /// Columns are the unit eigenvectors of the correlation matrix.
  Eigen::MatrixXd eigenvectors;
  /// cumulative_energy[i] = sum_{j<=i} lambda_j / sum_j lambda_j.
  std::vector<double> cumulative_energy;

  /// Smallest N with cumulative_energy[N-1] >= threshold.
  std::size_t dimension_for_energy(double threshold) const;
  double tail_sum(std::size_t n) const;
};

struct FixedDimension {
  std::size_t n;
};
struct EnergyThreshold {
  double fraction;
};
using PodSelection = std::variant<FixedDimension, EnergyThreshold>;

struct PodResult {
  ReducedBasis basis;
  PodSpectrum spectrum;
};

/// Snapshot correlation eigen-decomposition.
PodSpectrum pod_spectrum(const Eigen::MatrixXd& snapshots, const SparseOperator& gram);

/// Method of snapshots: C = (1/M) S^T X S, xi_i = S v_i / sqrt(M lambda_i),
/// followed by V-orthonormalization to clean up round-off.
PodResult pod(const Eigen::MatrixXd& snapshots, const SparseOperator& gram,
              const PodSelection& select);
PodResult pod(const SnapshotSet& snapshots, const SparseOperator& gram,
              const PodSelection& select);

/// (1/M) sum_m ||psi_m - P_N psi_m||_V^2 by direct subtraction.
double mean_projection_error_sq(const Eigen::MatrixXd& snapshots, const ReducedBasis& basis,
                                std::size_t n, const SparseOperator& gram);

/// Projection-error decay: entry N-1 is max_m ||psi_m - P_N psi_m||_V.
std::vector<double> kolmogorov_proxy(const Eigen::MatrixXd& snapshots, const ReducedBasis& basis,
                                     const SparseOperator& gram);

/// `index,lambda,cumulative_energy`
void write_spectrum_csv(std::ostream& out, const PodSpectrum& spectrum);

}  // namespace romkit
