#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "romkit/error.hpp"
#include "romkit/pod.hpp"

using namespace romkit;

namespace {

struct Setup {
  Mesh mesh = build_thermal_block_mesh(16);
  AffineSystem sys = assemble_affine_system(mesh);
  SnapshotSet snaps = generate_snapshots(sys, GridSpec{10, 10, GridKind::training, std::nullopt});
  Eigen::MatrixXd x = sys.gram_x().to_dense();
};

const Setup& setup() {
  static const Setup s;
  return s;
}

// Largest principal angle (as its sine) between two V-orthonormal subspaces.
double subspace_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd m = a.transpose() * x * b;
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
  const double c = std::min(1.0, s.minCoeff());
  return std::sqrt(std::max(0.0, 1.0 - c * c));
}

}  // namespace

// Oracle: the V-orthogonal principal directions from the dense symmetric
// eigenproblem of the weighted covariance L^T S S^T L / M, with X = L L^T.
TEST(Pod, MatchesDenseCovarianceEigenvectors) {
  const auto& s = setup();
  const Eigen::Index m = s.snaps.fields.cols();
  const Eigen::LLT<Eigen::MatrixXd> llt(s.x);
  const Eigen::MatrixXd lt = llt.matrixU();
  const Eigen::MatrixXd y = lt * s.snaps.fields;
  const Eigen::MatrixXd cov = y * y.transpose() / static_cast<double>(m);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index total = cov.rows();

  const PodResult p = pod(s.snaps, s.sys.gram_x(), FixedDimension{3});
  for (std::size_t i = 0; i < 3; ++i) {
    const double oracle = eig.eigenvalues()(total - 1 - static_cast<Eigen::Index>(i));
    EXPECT_NEAR(p.spectrum.eigenvalues[i], oracle, 1e-9 * eig.eigenvalues().maxCoeff());
  }
  // Well-separated leading modes, so each subspace is determined.
  for (Eigen::Index k = 1; k <= 3; ++k) {
    const Eigen::MatrixXd oracle_basis =
        lt.triangularView<Eigen::Upper>().solve(eig.eigenvectors().rightCols(k));
    EXPECT_LE(subspace_gap(p.basis.vectors.leftCols(k), oracle_basis, s.x), 1e-6) << k;
  }
}

TEST(Pod, BasisIsVOrthonormal) {
  const auto& s = setup();
  const PodResult p = pod(s.snaps, s.sys.gram_x(), EnergyThreshold{0.9999});
  const Eigen::MatrixXd g = p.basis.vectors.transpose() * s.x * p.basis.vectors;
  EXPECT_LE((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pod, SpectrumOrderedAndEnergyMonotone) {
  const auto& sp = pod_spectrum(setup().snaps.fields, setup().sys.gram_x());
  ASSERT_EQ(sp.eigenvalues.size(), 100u);
  for (std::size_t i = 0; i + 1 < sp.eigenvalues.size(); ++i) {
    EXPECT_GE(sp.eigenvalues[i], sp.eigenvalues[i + 1]);
    EXPECT_LE(sp.cumulative_energy[i], sp.cumulative_energy[i + 1] + 1e-15);
  }
  EXPECT_GE(sp.eigenvalues.back(), 0.0);
  EXPECT_NEAR(sp.cumulative_energy.back(), 1.0, 1e-12);
  const std::size_t n = sp.dimension_for_energy(0.9999);
  EXPECT_GE(sp.cumulative_energy[n - 1], 0.9999);
  if (n > 1) EXPECT_LT(sp.cumulative_energy[n - 2], 0.9999);
}

TEST(Pod, TruncationIdentity) {
  const auto& s = setup();
  const PodResult p = pod(s.snaps, s.sys.gram_x(), FixedDimension{5});
  double total = 0.0;
  for (const double l : p.spectrum.eigenvalues) total += l;
  for (std::size_t n = 1; n <= 5; ++n) {
    const double direct = mean_projection_error_sq(s.snaps.fields, p.basis, n, s.sys.gram_x());
    EXPECT_LE(std::abs(direct - p.spectrum.tail_sum(n)), 1e-10 * total) << n;
  }
}

TEST(Pod, KolmogorovProxyNonincreasing) {
  const auto& s = setup();
  const PodResult p = pod(s.snaps, s.sys.gram_x(), FixedDimension{4});
  const auto d = kolmogorov_proxy(s.snaps.fields, p.basis, s.sys.gram_x());
  ASSERT_EQ(d.size(), 4u);
  for (std::size_t i = 0; i + 1 < d.size(); ++i) EXPECT_LE(d[i + 1], d[i] * (1 + 1e-12));
}

TEST(Pod, FixedConductivitySweepIsRankOne) {
  const auto& sys = setup().sys;
  GridSpec grid{1, 10, GridKind::training, 2.0};
  const SnapshotSet snaps = generate_snapshots(sys, grid);
  const PodResult p = pod(snaps, sys.gram_x(), EnergyThreshold{0.9999});
  EXPECT_EQ(p.basis.dim(), 1u);
  EXPECT_LE(p.spectrum.eigenvalues[1], 1e-12 * p.spectrum.eigenvalues[0]);
}

TEST(Pod, RequestBeyondRankFails) {
  const auto& sys = setup().sys;
  const SnapshotSet snaps = generate_snapshots(sys, GridSpec{1, 5, GridKind::training, 0.5});
  try {
    pod(snaps, sys.gram_x(), FixedDimension{3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::rank_deficient);
  }
  EXPECT_THROW(pod(snaps, sys.gram_x(), FixedDimension{0}), Error);
  EXPECT_THROW(pod(snaps, sys.gram_x(), EnergyThreshold{1.5}), Error);
}

TEST(Pod, SpectrumCsv) {
  std::ostringstream out;
  write_spectrum_csv(out, pod_spectrum(setup().snaps.fields.leftCols(3), setup().sys.gram_x()));
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "index,lambda,cumulative_energy");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
