#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "romkit/affine_system.hpp"
#include "romkit/reduced_basis.hpp"

namespace romkit {

/// Online data of a Galerkin reduced basis model.
///
/// The residual of the reduced solution is a linear combination of the Riesz
/// representers X^{-1} f_q and X^{-1} A_q xi_i. Instead of their Gram matrix
/// we store its triangular factor R (Gram = R^T R, from a V-orthogonal QR of
/// the representers), so the online dual norm is ||R w||_2 and does not lose
/// half the digits to cancellation when the residual is small.
///
/// Representer columns are ordered [f_0, A_0 xi_1, A_1 xi_1, A_0 xi_2, ...],
/// so the leading sub-blocks serve any nested dimension n <= N.
struct ReducedModel {
  ReducedBasis basis;
  std::vector<Eigen::MatrixXd> a_rb;  ///< (A_q^rb)_{j,i} = a_q(xi_i, xi_j)
  std::vector<Eigen::VectorXd> f_rb;
  Eigen::VectorXd l_rb;
  Eigen::MatrixXd residual_factor;

  std::size_t dim() const { return basis.dim(); }
  static std::size_t residual_size(std::size_t n) { return q_f + q_a * n; }
};

ReducedModel project(const AffineSystem& sys, const ReducedBasis& basis);

struct ReducedSolution {
  Eigen::VectorXd coefficients;
  double output_s = 0.0;
  double eta_en = 0.0;
  double wall_time = 0.0;
};

/// Solves the leading n x n reduced system at mu and evaluates the bound.
ReducedSolution rom_solve(const ReducedModel& model, const ParameterPoint& mu, std::size_t n);

/// ||r_hat(mu)||_V for the reduced solution with the given coefficients.
double residual_dual_norm(const ReducedModel& model, const ParameterPoint& mu,
                          const Eigen::VectorXd& coefficients);

/// Energy-norm bound ||r_hat||_V / sqrt(alpha_LB(mu)).
double error_estimator(const ReducedModel& model, const ParameterPoint& mu,
                       const Eigen::VectorXd& coefficients);

struct ErrorReport {
  ParameterPoint mu;
  std::size_t n = 0;
  double v_norm_error = 0.0;
  double energy_norm_error = 0.0;
  double eta_en = 0.0;
  /// NaN when the energy error is at round-off level (<= 1e-13).
  double effectivity = 0.0;
  double relative_error = 0.0;
  double output_error = 0.0;
  double s_fom = 0.0;
  double s_rom = 0.0;
  /// relative_error holds the absolute V error (||u_fom||_V < 1e-14).
  bool absolute_mode = false;
};

inline constexpr double effectivity_floor = 1e-13;

/// Report from an existing full-order solution (reused across n in sweeps).
ErrorReport make_error_report(const AffineSystem& sys, const ReducedModel& model,
                              const ParameterPoint& mu, std::size_t n,
                              const FomSolution& fom);

ErrorReport effectivity_report(const AffineSystem& sys, const ReducedModel& model,
                               const ParameterPoint& mu, std::size_t n);

/// `mu0,mu1,n,v_err,en_err,eta,effectivity,rel_err,s_err`
void write_error_report_header(std::ostream& out);
void write_error_report_row(std::ostream& out, const ErrorReport& report);

}  // namespace romkit
