#include "romkit/pod.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

namespace {

constexpr double rank_tol = 1e-14;

Eigen::MatrixXd apply_gram(const SparseOperator& gram, const Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd out(vectors.rows(), vectors.cols());
  for (Index j = 0; j < vectors.cols(); ++j) out.col(j) = gram * vectors.col(j).eval();
  return out;
}

}  // namespace

std::size_t PodSpectrum::dimension_for_energy(double threshold) const {
  for (std::size_t i = 0; i < cumulative_energy.size(); ++i) {
    if (cumulative_energy[i] >= threshold) return i + 1;
  }
  return cumulative_energy.size();
}

double PodSpectrum::tail_sum(std::size_t n) const {
  double sum = 0.0;
  for (std::size_t i = eigenvalues.size(); i > n; --i) sum += eigenvalues[i - 1];
  return sum;
}

PodSpectrum pod_spectrum(const Eigen::MatrixXd& snapshots, const SparseOperator& gram) {
  const Index m = snapshots.cols();
  if (m < 1) fail(ErrorCode::invalid_argument, "POD needs at least one snapshot");
  if (snapshots.rows() != gram.rows()) {
    fail(ErrorCode::invalid_argument, "POD: snapshot length does not match the Gram matrix");
  }
  Eigen::MatrixXd corr = snapshots.transpose() * apply_gram(gram, snapshots);
  corr = 0.5 * (corr + corr.transpose()) / static_cast<double>(m);

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) {
    fail(ErrorCode::solver_failure, "POD: correlation eigenproblem failed");
  }
  PodSpectrum spectrum;
  spectrum.eigenvectors.resize(m, m);
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    // Eigen sorts ascending.
    const Index src = m - 1 - i;
    spectrum.eigenvalues.push_back(std::max(0.0, eig.eigenvalues()[src]));
    spectrum.eigenvectors.col(i) = eig.eigenvectors().col(src);
    total += spectrum.eigenvalues.back();
  }
  double partial = 0.0;
  for (const double lambda : spectrum.eigenvalues) {
    partial += lambda;
    spectrum.cumulative_energy.push_back(total > 0.0 ? std::min(1.0, partial / total) : 1.0);
  }
  return spectrum;
}

PodResult pod(const Eigen::MatrixXd& snapshots, const SparseOperator& gram,
              const PodSelection& select) {
  PodResult result;
  result.spectrum = pod_spectrum(snapshots, gram);
  const auto& lambda = result.spectrum.eigenvalues;
  const auto m = static_cast<std::size_t>(snapshots.cols());
  if (!(lambda.front() > 0.0)) {
    fail(ErrorCode::rank_deficient, "POD: all snapshots are zero");
  }

  std::size_t n = 0;
  if (const auto* fixed = std::get_if<FixedDimension>(&select)) {
    n = fixed->n;
    if (n < 1 || n > m) {
      fail(ErrorCode::invalid_argument, "POD: N = " + std::to_string(n) + " outside [1, " +
                                            std::to_string(m) + "]");
    }
    if (lambda[n - 1] < rank_tol * lambda.front()) {
      fail(ErrorCode::rank_deficient, "POD: N = " + std::to_string(n) +
                                          " exceeds the numerical rank of the snapshots");
    }
  } else {
    const double fraction = std::get<EnergyThreshold>(select).fraction;
    if (!(fraction > 0.0 && fraction <= 1.0)) {
      fail(ErrorCode::invalid_argument, "POD: energy threshold must lie in (0, 1]");
    }
    n = result.spectrum.dimension_for_energy(fraction);
    while (n > 1 && lambda[n - 1] < rank_tol * lambda.front()) --n;
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  Eigen::MatrixXd modes(snapshots.rows(), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Index>(i);
    modes.col(col) = scale * snapshots * result.spectrum.eigenvectors.col(col);
    // ||xi_i||_V^2 = lambda_i before normalization.
    modes.col(col) /= std::sqrt(lambda[i]);
  }
  auto ortho = orthonormalize(modes, gram);
  if (ortho.basis.dim() != n) {
    fail(ErrorCode::rank_deficient, "POD: modes lost rank during orthonormalization");
  }
  result.basis = std::move(ortho.basis);
  return result;
}

PodResult pod(const SnapshotSet& snapshots, const SparseOperator& gram,
              const PodSelection& select) {
  return pod(snapshots.fields, gram, select);
}

double mean_projection_error_sq(const Eigen::MatrixXd& snapshots, const ReducedBasis& basis,
                                std::size_t n, const SparseOperator& gram) {
  const auto cols = static_cast<Index>(n);
  const Eigen::MatrixXd xi = basis.vectors.leftCols(cols);
  double sum = 0.0;
  for (Index m = 0; m < snapshots.cols(); ++m) {
    const Eigen::VectorXd psi = snapshots.col(m);
    const Eigen::VectorXd coeffs = xi.transpose() * (gram * psi);
    const Eigen::VectorXd rest = psi - xi * coeffs;
    sum += gram.quadratic_form(rest);
  }
  return sum / static_cast<double>(snapshots.cols());
}

std::vector<double> kolmogorov_proxy(const Eigen::MatrixXd& snapshots, const ReducedBasis& basis,
                                     const SparseOperator& gram) {
  const Eigen::MatrixXd coeffs = basis.vectors.transpose() * apply_gram(gram, snapshots);
  std::vector<double> decay;
  for (std::size_t n = 1; n <= basis.dim(); ++n) {
    const auto cols = static_cast<Index>(n);
    double worst = 0.0;
    for (Index m = 0; m < snapshots.cols(); ++m) {
      const Eigen::VectorXd rest =
          snapshots.col(m) - basis.vectors.leftCols(cols) * coeffs.col(m).head(cols);
      worst = std::max(worst, std::sqrt(std::max(0.0, gram.quadratic_form(rest))));
    }
    decay.push_back(worst);
  }
  return decay;
}

void write_spectrum_csv(std::ostream& out, const PodSpectrum& spectrum) {
  out << "index,lambda,cumulative_energy\n";
  for (std::size_t i = 0; i < spectrum.eigenvalues.size(); ++i) {
    out << i + 1 << ',' << format_double(spectrum.eigenvalues[i]) << ','
        << format_double(spectrum.cumulative_energy[i]) << '\n';
  }
}

}  // namespace romkit
