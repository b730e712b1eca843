#include "romkit/reduced_model.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

ReducedModel project(const AffineSystem& sys, const ReducedBasis& basis) {
  const auto& xi = basis.vectors;
  const auto n = static_cast<Index>(basis.dim());
  if (n == 0 || xi.rows() != sys.free_count()) {
    fail(ErrorCode::invalid_argument, "project: basis does not match the free-node count");
  }
  Eigen::MatrixXd x_xi(xi.rows(), n);
  for (Index i = 0; i < n; ++i) x_xi.col(i) = sys.gram_x() * xi.col(i).eval();
  const Eigen::MatrixXd gram_rb = xi.transpose() * x_xi;
  if ((gram_rb - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8) {
    fail(ErrorCode::invalid_argument, "project: basis is not V-orthonormal");
  }

  ReducedModel model;
  model.basis = basis;

  // a_xi[q] holds A_q xi_i column-wise.
  std::vector<Eigen::MatrixXd> a_xi(q_a, Eigen::MatrixXd(xi.rows(), n));
  for (std::size_t q = 0; q < q_a; ++q) {
    for (Index i = 0; i < n; ++i) a_xi[q].col(i) = sys.a_ops()[q] * xi.col(i).eval();
    Eigen::MatrixXd block = xi.transpose() * a_xi[q];
    model.a_rb.push_back(0.5 * (block + block.transpose()));
  }
  for (std::size_t q = 0; q < q_f; ++q) model.f_rb.push_back(xi.transpose() * sys.f_vecs()[q]);
  model.l_rb = xi.transpose() * sys.l_vec();

  // Riesz representers in nested order, then V-orthogonal MGS QR with one
  // re-orthogonalization sweep. Exactly dependent representers (e.g. the
  // snapshot relation mu0 A_0 xi + A_1 xi = mu1 f) get a zero pivot.
  const std::size_t k_total = ReducedModel::residual_size(static_cast<std::size_t>(n));
  std::vector<Eigen::VectorXd> representers;
  representers.reserve(k_total);
  for (std::size_t q = 0; q < q_f; ++q) representers.push_back(sys.solve_gram(sys.f_vecs()[q]));
  for (Index i = 0; i < n; ++i) {
    for (std::size_t q = 0; q < q_a; ++q) {
      representers.push_back(sys.solve_gram(a_xi[q].col(i)));
    }
  }

  const auto k_size = static_cast<Index>(k_total);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k_size, k_size);
  std::vector<Eigen::VectorXd> q_vecs;
  std::vector<Eigen::VectorXd> xq_vecs;
  std::vector<Index> q_rows;
  for (Index k = 0; k < k_size; ++k) {
    Eigen::VectorXd v = representers[static_cast<std::size_t>(k)];
    const double original = v_norm(sys, v);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < q_vecs.size(); ++j) {
        const double h = xq_vecs[j].dot(v);
        r(q_rows[j], k) += h;
        v -= h * q_vecs[j];
      }
    }
    const double rest = v_norm(sys, v);
    if (original == 0.0 || rest <= 1e-12 * original) continue;
    r(k, k) = rest;
    q_vecs.push_back(v / rest);
    xq_vecs.push_back(sys.gram_x() * q_vecs.back());
    q_rows.push_back(k);
  }
  model.residual_factor = std::move(r);
  return model;
}

double residual_dual_norm(const ReducedModel& model, const ParameterPoint& mu,
                          const Eigen::VectorXd& coefficients) {
  const auto n = static_cast<std::size_t>(coefficients.size());
  if (n == 0 || n > model.dim()) {
    fail(ErrorCode::invalid_argument, "residual: coefficient count out of range");
  }
  const auto k = static_cast<Index>(ReducedModel::residual_size(n));
  Eigen::VectorXd w(k);
  const auto ta = theta_a(mu);
  const auto tf = theta_f(mu);
  for (std::size_t q = 0; q < q_f; ++q) w[static_cast<Index>(q)] = tf[q];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t q = 0; q < q_a; ++q) {
      w[static_cast<Index>(q_f + i * q_a + q)] = -ta[q] * coefficients[static_cast<Index>(i)];
    }
  }
  return (model.residual_factor.topLeftCorner(k, k).triangularView<Eigen::Upper>() * w).norm();
}

double error_estimator(const ReducedModel& model, const ParameterPoint& mu,
                       const Eigen::VectorXd& coefficients) {
  return residual_dual_norm(model, mu, coefficients) / std::sqrt(alpha_lb(mu));
}

ReducedSolution rom_solve(const ReducedModel& model, const ParameterPoint& mu, std::size_t n) {
  if (n < 1 || n > model.dim()) {
    fail(ErrorCode::invalid_argument, "n = " + std::to_string(n) + " outside [1, " +
                                          std::to_string(model.dim()) + "]");
  }
  check_admissible(mu);
  const auto start = std::chrono::steady_clock::now();
  const auto size = static_cast<Index>(n);
  const auto ta = theta_a(mu);
  const auto tf = theta_f(mu);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t q = 0; q < q_a; ++q) a += ta[q] * model.a_rb[q].topLeftCorner(size, size);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  for (std::size_t q = 0; q < q_f; ++q) b += tf[q] * model.f_rb[q].head(size);

  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::solver_failure, "reduced matrix is not positive definite (degenerate basis)");
  }
  ReducedSolution sol;
  sol.coefficients = llt.solve(b);
  if (!sol.coefficients.allFinite()) {
    fail(ErrorCode::solver_failure, "reduced solve produced non-finite coefficients");
  }
  sol.output_s = model.l_rb.head(size).dot(sol.coefficients);
  sol.eta_en = error_estimator(model, mu, sol.coefficients);
  sol.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

ErrorReport make_error_report(const AffineSystem& sys, const ReducedModel& model,
                              const ParameterPoint& mu, std::size_t n,
                              const FomSolution& fom) {
  const ReducedSolution rom = rom_solve(model, mu, n);
  const Eigen::VectorXd error = fom.free_values - model.basis.reconstruct(rom.coefficients);

  ErrorReport report;
  report.mu = mu;
  report.n = n;
  report.v_norm_error = v_norm(sys, error);
  report.energy_norm_error = energy_norm(sys, mu, error);
  report.eta_en = rom.eta_en;
  report.effectivity = report.energy_norm_error > effectivity_floor
                           ? report.eta_en / report.energy_norm_error
                           : std::numeric_limits<double>::quiet_NaN();
  const double fom_norm = v_norm(sys, fom.free_values);
  report.absolute_mode = fom_norm < 1e-14;
  report.relative_error =
      report.absolute_mode ? report.v_norm_error : report.v_norm_error / fom_norm;
  report.s_fom = fom.output_s;
  report.s_rom = rom.output_s;
  report.output_error = std::abs(fom.output_s - rom.output_s);
  return report;
}

ErrorReport effectivity_report(const AffineSystem& sys, const ReducedModel& model,
                               const ParameterPoint& mu, std::size_t n) {
  return make_error_report(sys, model, mu, n, fom_solve(sys, mu));
}

void write_error_report_header(std::ostream& out) {
  out << "mu0,mu1,n,v_err,en_err,eta,effectivity,rel_err,s_err\n";
}

void write_error_report_row(std::ostream& out, const ErrorReport& r) {
  out << format_double(r.mu.mu0) << ',' << format_double(r.mu.mu1) << ',' << r.n << ','
      << format_double(r.v_norm_error) << ',' << format_double(r.energy_norm_error) << ','
      << format_double(r.eta_en) << ',' << format_double(r.effectivity) << ','
      << format_double(r.relative_error) << ',' << format_double(r.output_error) << '\n';
}

}  // namespace romkit
