#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "romkit/error.hpp"
#include "romkit/pod.hpp"
#include "romkit/surrogates.hpp"

using namespace romkit;

namespace {

struct Setup {
  Mesh mesh = build_thermal_block_mesh(16);
  AffineSystem sys = assemble_affine_system(mesh);
  SnapshotSet snaps = generate_snapshots(sys, GridSpec{10, 10, GridKind::training, std::nullopt});
  ReducedBasis basis = pod(snaps, sys.gram_x(), FixedDimension{5}).basis;
  PodRbfSurrogate podrbf = podrbf_build(snaps, basis, sys.gram_x());
  LocalBasisFamily local = local_podrbf_build(snaps, sys.gram_x());
};

const Setup& setup() {
  static const Setup s;
  return s;
}

double rel_v_error(const AffineSystem& sys, const Eigen::VectorXd& approx, const Eigen::VectorXd& exact) {
  return v_norm(sys, approx - exact) / v_norm(sys, exact);
}

// Projection onto a V-orthonormal basis.
Eigen::VectorXd project_onto(const AffineSystem& sys, const ReducedBasis& b, const Eigen::VectorXd& u) {
  const Eigen::VectorXd xu = sys.gram_x() * u;
  return b.vectors * (b.vectors.transpose() * xu);
}

}  // namespace

TEST(ProjectCoefficients, BasisVectorAndZeroSnapshot) {
  const auto& s = setup();
  SnapshotSet probe;
  probe.parameters = {{1.0, 1.0}, {1.0, 0.0}};
  probe.fields.resize(s.basis.vectors.rows(), 2);
  probe.fields.col(0) = s.basis.vectors.col(0);
  probe.fields.col(1).setZero();
  const auto t = project_coefficients(probe, s.basis, s.sys.gram_x());
  EXPECT_NEAR(t.coefficients(0, 0), 1.0, 1e-12);
  EXPECT_LE(t.coefficients.row(0).tail(4).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(t.coefficients.row(1).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ProjectCoefficients, PythagorasAgainstDirectSubtraction) {
  const auto& s = setup();
  const auto t = project_coefficients(s.snaps, s.basis, s.sys.gram_x());
  for (Eigen::Index m = 0; m < 100; m += 9) {
    const Eigen::VectorXd psi = s.snaps.fields.col(m);
    const Eigen::VectorXd c = t.coefficients.row(m).transpose();
    const double direct = std::pow(v_norm(s.sys, psi - s.basis.reconstruct(c)), 2);
    const double pyth = std::pow(v_norm(s.sys, psi), 2) - c.squaredNorm();
    EXPECT_NEAR(direct, pyth, 1e-10 * std::max(1.0, c.squaredNorm()));
  }
  SnapshotSet wrong;
  wrong.fields = Eigen::MatrixXd::Zero(3, 1);
  wrong.parameters = {{1.0, 1.0}};
  EXPECT_THROW(project_coefficients(wrong, s.basis, s.sys.gram_x()), Error);
}

TEST(ParameterScaler, MapsBoxToUnitSquare) {
  const auto sc = ParameterScaler::fit(setup().snaps.parameters);
  EXPECT_LE((sc({0.1, -1.0}) - Eigen::Vector2d(-1, -1)).norm(), 1e-14);
  EXPECT_LE((sc({10.0, 1.0}) - Eigen::Vector2d(1, 1)).norm(), 1e-14);
  EXPECT_LE((sc({1.0, 0.0}) - Eigen::Vector2d(0, 0)).norm(), 1e-14);
  EXPECT_TRUE(sc.inside({10.0, 1.0}));
  const auto narrow = ParameterScaler::fit({{1.0, -0.5}, {2.0, 0.5}});
  EXPECT_FALSE(narrow.inside({3.0, 0.0}));
}

TEST(PodRbf, TrainingPointsGiveProjectionError) {
  const auto& s = setup();
  for (Eigen::Index m = 0; m < 100; m += 7) {
    const ParameterPoint mu = s.snaps.parameters[static_cast<std::size_t>(m)];
    const Eigen::VectorXd psi = s.snaps.fields.col(m);
    const auto p = podrbf_predict(s.podrbf, mu, 5);
    EXPECT_FALSE(p.extrapolated);
    const double pred_err = v_norm(s.sys, p.free_values - psi);
    const double proj_err = v_norm(s.sys, project_onto(s.sys, s.basis, psi) - psi);
    EXPECT_LE(std::abs(pred_err - proj_err), 1e-8);
  }
}

TEST(PodRbf, LinearInFlux) {
  const auto& s = setup();
  for (const double mu0 : GridSpec{10, 10, GridKind::training, std::nullopt}.mu0_values()) {
    // the full-order field is exactly linear in mu1, so the defect is bounded by the two errors
    const Eigen::VectorXd one = podrbf_predict(s.podrbf, {mu0, 1.0}, 5).free_values;
    const double e_one = v_norm(s.sys, one - fom_solve(s.sys, {mu0, 1.0}).free_values);
    for (const double mu1 : {-0.6, 0.25, 0.9}) {
      const Eigen::VectorXd u = podrbf_predict(s.podrbf, {mu0, mu1}, 5).free_values;
      const double e_u = v_norm(s.sys, u - fom_solve(s.sys, {mu0, mu1}).free_values);
      const double defect = v_norm(s.sys, u - mu1 * one);
      EXPECT_LE(defect, e_u + std::abs(mu1) * e_one + 1e-12) << mu0 << ' ' << mu1;
      EXPECT_LE(defect, 1e-2 * v_norm(s.sys, mu1 * one)) << mu0 << ' ' << mu1;
    }
  }
}

TEST(PodRbf, ValidationPointAccuracy) {
  const auto& s = setup();
  const ParameterPoint mu{8.0, -1.0};
  const auto p = podrbf_predict(s.podrbf, mu, 5);
  EXPECT_LE(rel_v_error(s.sys, p.free_values, fom_solve(s.sys, mu).free_values), 0.05);
}

TEST(PodRbf, ExtrapolationIsFlagged) {
  const auto& s = setup();
  SnapshotSet narrow = generate_snapshots(s.sys, GridSpec{4, 4, GridKind::validation, std::nullopt});
  const auto basis = pod(narrow, s.sys.gram_x(), FixedDimension{2}).basis;
  const auto sur = podrbf_build(narrow, basis, s.sys.gram_x());
  const auto p = podrbf_predict(sur, {10.0, 1.0}, 2);
  EXPECT_TRUE(p.extrapolated);
  EXPECT_FALSE(p.warnings.empty());
  EXPECT_THROW(podrbf_predict(sur, {10.0, 1.0}, 3), Error);
  EXPECT_THROW(podrbf_predict(sur, {11.0, 1.0}, 1), Error);
}

TEST(LocalPodRbf, DimensionsNeverExceedGlobal) {
  const auto& s = setup();
  const auto dims = local_energy_dimensions(s.snaps, s.sys.gram_x());
  const std::size_t global = pod_spectrum(s.snaps.fields, s.sys.gram_x()).dimension_for_energy(0.9999);
  ASSERT_EQ(dims.size(), 10u);
  for (const auto d : dims) EXPECT_LE(d, global);
  EXPECT_EQ(s.local.dim(), *std::max_element(dims.begin(), dims.end()));
}

TEST(LocalPodRbf, AnchorReproducesLocalReconstruction) {
  const auto& s = setup();
  for (std::size_t a = 0; a < s.local.anchor_values.size(); a += 3) {
    const double mu0 = s.local.anchor_values[a];
    const ReducedBasis& b = s.local.anchor_bases[a];
    for (std::size_t m = 0; m < s.snaps.size(); ++m) {
      if (s.snaps.parameters[m].mu0 != mu0 || m % 3 != 0) continue;
      const Eigen::VectorXd psi = s.snaps.fields.col(static_cast<Eigen::Index>(m));
      const Eigen::VectorXd local_rec = project_onto(s.sys, b, psi);
      const auto p = local_podrbf_predict(s.local, s.sys.gram_x(), s.snaps.parameters[m], s.local.dim());
      if (v_norm(s.sys, local_rec) == 0.0) {
        EXPECT_LE(v_norm(s.sys, p.free_values), 1e-10);
      } else {
        EXPECT_LE(rel_v_error(s.sys, p.free_values, local_rec), 1e-6);
      }
    }
  }
}

TEST(LocalPodRbf, InterpolatedBasisIsOrthonormal) {
  const auto& s = setup();
  const Eigen::MatrixXd x = s.sys.gram_x().to_dense();
  for (const double mu0 : {0.1, 0.37, 1.0, 4.4, 10.0}) {
    const ReducedBasis b = local_basis_at(s.local, s.sys.gram_x(), mu0);
    const Eigen::MatrixXd g = b.vectors.transpose() * x * b.vectors;
    EXPECT_LE((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(LocalPodRbf, ValidationPointAccuracy) {
  const auto& s = setup();
  const ParameterPoint mu{8.0, -1.0};
  const auto p = local_podrbf_predict(s.local, s.sys.gram_x(), mu, s.local.dim());
  EXPECT_LE(rel_v_error(s.sys, p.free_values, fom_solve(s.sys, mu).free_values), 0.05);
}

TEST(LocalPodRbf, AnchorsAlignedInSign) {
  const auto& s = setup();
  for (std::size_t a = 1; a < s.local.anchor_bases.size(); ++a) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(s.local.dim()); ++i) {
      EXPECT_GE(s.sys.gram_x().bilinear(s.local.anchor_bases[a].vectors.col(i),
                                        s.local.anchor_bases[a - 1].vectors.col(i)),
                0.0);
    }
  }
}

TEST(LocalPodRbf, RejectsThinGrids) {
  const auto& sys = setup().sys;
  try {
    local_podrbf_build(generate_snapshots(sys, GridSpec{2, 5, GridKind::training, std::nullopt}),
                       sys.gram_x());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
  EXPECT_THROW(local_podrbf_build(generate_snapshots(sys, GridSpec{4, 2, GridKind::training, std::nullopt}),
                                  sys.gram_x()),
               Error);
  try {
    local_podrbf_build(generate_snapshots(sys, GridSpec{3, 4, GridKind::training, std::nullopt}),
                       sys.gram_x(), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::rank_deficient);
    EXPECT_NE(std::string(e.what()).find("anchor mu0"), std::string::npos);
  }
}

TEST(PodNn, ConvergedLinearNetworkReproducesProjection) {
  const auto& s = setup();
  const SnapshotSet sweep = generate_snapshots(s.sys, GridSpec{1, 7, GridKind::training, 3.0});
  const ReducedBasis b = pod(sweep, s.sys.gram_x(), FixedDimension{1}).basis;
  PodNnConfig cfg;
  cfg.hidden = {};
  cfg.learning_rate = 0.1;
  cfg.epochs = 5000;
  const auto sur = podnn_build(sweep, b, s.sys.gram_x(), cfg);
  ASSERT_LT(sur.loss_history.back(), 1e-8);
  for (std::size_t m = 0; m < sweep.size(); ++m) {
    const Eigen::VectorXd psi = sweep.fields.col(static_cast<Eigen::Index>(m));
    const auto p = podnn_predict(sur, sweep.parameters[m], 1);
    const Eigen::VectorXd proj = project_onto(s.sys, b, psi);
    if (sweep.parameters[m].mu1 == 0.0) {
      EXPECT_LE(v_norm(s.sys, p.free_values), 1e-3);
    } else {
      EXPECT_LE(rel_v_error(s.sys, p.free_values, proj), 1e-3);
    }
  }
}

TEST(PodNn, DefaultNetworkOnFullGrid) {
  const auto& s = setup();
  const auto sur = podnn_build(s.snaps, s.basis, s.sys.gram_x(), PodNnConfig{});
  ASSERT_EQ(sur.loss_history.size(), PodNnConfig{}.epochs);
  EXPECT_LT(sur.loss_history.back(), 1e-2 * sur.loss_history.front());
  const ParameterPoint mu{8.0, -1.0};
  EXPECT_LE(rel_v_error(s.sys, podnn_predict(sur, mu, 5).free_values, fom_solve(s.sys, mu).free_values), 0.05);
}

TEST(PodNn, TrainingIsDeterministic) {
  const auto& s = setup();
  PodNnConfig cfg;
  cfg.epochs = 500;
  const auto a = podnn_build(s.snaps, s.basis, s.sys.gram_x(), cfg);
  const auto b = podnn_build(s.snaps, s.basis, s.sys.gram_x(), cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  cfg.seed += 1;
  const auto c = podnn_build(s.snaps, s.basis, s.sys.gram_x(), cfg);
  EXPECT_NE(a.loss_history, c.loss_history);
}

TEST(PodNn, ZeroFluxTrainingPoint) {
  const auto& s = setup();
  const SnapshotSet odd = generate_snapshots(s.sys, GridSpec{5, 5, GridKind::training, std::nullopt});
  const ReducedBasis b = pod(odd, s.sys.gram_x(), FixedDimension{3}).basis;
  PodNnConfig cfg;
  cfg.epochs = 50000;
  const auto sur = podnn_build(odd, b, s.sys.gram_x(), cfg);
  for (const double mu0 : GridSpec{5, 5, GridKind::training, std::nullopt}.mu0_values()) {
    EXPECT_LE(v_norm(s.sys, podnn_predict(sur, {mu0, 0.0}, 3).free_values), 1e-2) << mu0;
  }
}

TEST(PodNn, CabgPresetIsRecorded) {
  const auto c = PodNnConfig::cabg_preset();
  EXPECT_EQ(c.hidden, (std::vector<std::size_t>{1300, 1300, 1300}));
  EXPECT_EQ(c.activation, Activation::tanh);
  EXPECT_EQ(c.learning_rate, 1e-6);
}
