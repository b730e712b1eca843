#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "romkit/affine_system.hpp"
#include "romkit/mlp.hpp"
#include "romkit/rbf.hpp"
#include "romkit/reduced_basis.hpp"
#include "romkit/snapshots.hpp"

namespace romkit {

/// Reduced coefficients of each snapshot: coefficients(m, i) = (psi_m, xi_i)_V.
struct CoefficientTable {
  std::vector<ParameterPoint> parameters;
  Eigen::MatrixXd coefficients;
};

CoefficientTable project_coefficients(const SnapshotSet& snapshots, const ReducedBasis& basis,
                                      const SparseOperator& gram);

/// Maps (mu0, mu1) to [-1, 1]^2 with mu0 taken through log first. Bounds
/// come from the training parameters; a degenerate axis maps to 0.
struct ParameterScaler {
  double log_mu0_min = 0.0;
  double log_mu0_max = 0.0;
  double mu1_min = 0.0;
  double mu1_max = 0.0;

  static ParameterScaler fit(const std::vector<ParameterPoint>& points);
  Eigen::Vector2d operator()(const ParameterPoint& mu) const;
  bool inside(const ParameterPoint& mu) const;
};

struct KernelChoice {
  KernelType type = KernelType::thin_plate_spline;
  std::optional<double> epsilon;
};

struct SurrogatePrediction {
  Eigen::VectorXd free_values;
  bool extrapolated = false;
  std::vector<std::string> warnings;
};

// Global POD-RBF.

struct PodRbfSurrogate {
  ParameterScaler scaler;
  ReducedBasis basis;
  RbfInterpolant interpolant;
};

PodRbfSurrogate podrbf_build(const SnapshotSet& snapshots, const ReducedBasis& basis,
                             const SparseOperator& gram, const KernelChoice& kernel = {});
SurrogatePrediction podrbf_predict(const PodRbfSurrogate& surrogate, const ParameterPoint& mu,
                                   std::size_t n);

// Local POD-RBF: one POD basis per mu0 anchor (over its mu1 sweep), bases
// interpolated entrywise across anchors, coefficients over (mu0, mu1).

struct LocalBasisFamily {
  ParameterScaler scaler;
  std::vector<double> anchor_values;
  /// Sign-aligned local bases, all of dimension dim.
  std::vector<ReducedBasis> anchor_bases;
  /// Projections of each snapshot onto its own anchor basis.
  CoefficientTable local_coefficients;
  /// Scaled log mu0 -> stacked basis entries (column-major free x dim).
  RbfInterpolant basis_interpolant;
  /// Scaled (mu0, mu1) -> local coefficients.
  RbfInterpolant coeff_interpolant;

  std::size_t dim() const { return anchor_bases.empty() ? 0 : anchor_bases.front().dim(); }
};

inline constexpr double local_energy_threshold = 0.9999;

/// POD dimension reaching `threshold` energy at each mu0 anchor.
std::vector<std::size_t> local_energy_dimensions(const SnapshotSet& snapshots,
                                                 const SparseOperator& gram,
                                                 double threshold = local_energy_threshold);

/// n: common local dimension; defaults to the largest per-anchor dimension
/// for local_energy_threshold.
LocalBasisFamily local_podrbf_build(const SnapshotSet& snapshots, const SparseOperator& gram,
                                    std::optional<std::size_t> n = std::nullopt,
                                    const KernelChoice& kernel = {});
/// Interpolated (re-orthonormalized) basis at mu0.
ReducedBasis local_basis_at(const LocalBasisFamily& family, const SparseOperator& gram,
                            double mu0);
SurrogatePrediction local_podrbf_predict(const LocalBasisFamily& family,
                                         const SparseOperator& gram, const ParameterPoint& mu,
                                         std::size_t n);

// POD-NN.

struct PodNnConfig {
  std::vector<std::size_t> hidden{16, 16};
  Activation activation = Activation::tanh;
  double learning_rate = 0.2;
  std::size_t epochs = 20000;
  std::uint64_t seed = 42;

  /// Architecture reported for the coronary bypass study: 3 x 1300 tanh,
  /// learning rate 1e-6. Recorded for reference; far too large for desk use.
  static PodNnConfig cabg_preset();
};

struct PodNnSurrogate {
  ParameterScaler scaler;
  ReducedBasis basis;
  Eigen::VectorXd coeff_mean;
  Eigen::VectorXd coeff_scale;
  Mlp net;
  std::vector<double> loss_history;
};

PodNnSurrogate podnn_build(const SnapshotSet& snapshots, const ReducedBasis& basis,
                           const SparseOperator& gram, const PodNnConfig& config = {});
SurrogatePrediction podnn_predict(const PodNnSurrogate& surrogate, const ParameterPoint& mu,
                                  std::size_t n);

}  // namespace romkit
