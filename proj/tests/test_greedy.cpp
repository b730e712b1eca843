#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "romkit/error.hpp"
#include "romkit/greedy.hpp"
#include "romkit/snapshots.hpp"

using namespace romkit;

namespace {

struct Setup {
  Mesh mesh = build_thermal_block_mesh(16);
  AffineSystem sys = assemble_affine_system(mesh);
  std::vector<ParameterPoint> train = GridSpec{10, 10, GridKind::training, std::nullopt}.points();
  GreedyResult result = greedy(sys, train, GreedyOptions{});
};

const Setup& setup() {
  static const Setup s;
  return s;
}

}  // namespace

TEST(Greedy, ConvergesWithSmallBasis) {
  const auto& r = setup().result;
  EXPECT_TRUE(r.trace.converged);
  EXPECT_EQ(r.trace.stop, GreedyStop::tolerance);
  EXPECT_GE(r.basis.dim(), 3u);
  EXPECT_LE(r.basis.dim(), 6u);
  EXPECT_LE(r.trace.max_eta_history.back(), 1e-5);
  EXPECT_EQ(r.trace.selected_parameters.size(), r.basis.dim());
  EXPECT_EQ(r.trace.max_eta_history.size(), r.basis.dim());
  EXPECT_EQ(r.trace.selected_parameters.front(), setup().train.front());
}

TEST(Greedy, SelectionsAreDistinctTrainingPoints) {
  const auto& sel = setup().result.trace.selected_parameters;
  for (std::size_t i = 0; i < sel.size(); ++i) {
    EXPECT_NE(std::find(setup().train.begin(), setup().train.end(), sel[i]), setup().train.end());
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(sel[i] == sel[j]);
  }
}

TEST(Greedy, HistoryMatchesRecomputedSweep) {
  const auto& s = setup();
  for (std::size_t n = 1; n <= s.result.basis.dim(); ++n) {
    const auto m = project(s.sys, ReducedBasis{s.result.basis.vectors.leftCols(static_cast<Eigen::Index>(n))});
    const auto eta = estimator_sweep(m, s.train, false);
    const double max_eta = *std::max_element(eta.begin(), eta.end());
    EXPECT_NEAR(max_eta, s.result.trace.max_eta_history[n - 1], 1e-9 * max_eta + 1e-14) << n;
    if (n < s.result.basis.dim()) {
      const auto argmax = static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
      EXPECT_EQ(s.train[argmax], s.result.trace.selected_parameters[n]);
    }
  }
}

TEST(Greedy, SweepBoundsTrueErrorOnTrainingSet) {
  const auto& s = setup();
  const auto eta = estimator_sweep(s.result.model, s.train, false);
  for (std::size_t k = 0; k < s.train.size(); k += 7) {
    const auto fom = fom_solve(s.sys, s.train[k]);
    const auto rom = rom_solve(s.result.model, s.train[k], s.result.model.dim());
    const double err =
        energy_norm(s.sys, s.train[k], fom.free_values - s.result.model.basis.reconstruct(rom.coefficients));
    EXPECT_LE(err, eta[k] + 1e-12);
  }
}

// Independent oracle: same selection rule with the dual residual norm from a
// dense full-order Riesz solve and dense Galerkin solves.
TEST(Greedy, MatchesDenseOracleSelections) {
  const auto& sys = setup().sys;
  std::vector<ParameterPoint> train;
  for (const double m0 : {0.13, 0.6, 2.2, 9.0}) {
    for (const double m1 : {0.3, -0.8, 0.55}) train.push_back({m0, m1});
  }
  GreedyOptions opt;
  opt.tol = 1e-9;
  opt.n_max = 4;
  const auto r = greedy(sys, train, opt);

  const Eigen::MatrixXd x = sys.gram_x().to_dense();
  const Eigen::LDLT<Eigen::MatrixXd> xf(x);
  Eigen::MatrixXd basis(sys.free_count(), 0);
  ParameterPoint mu = train.front();
  std::vector<ParameterPoint> oracle_sel;
  for (std::size_t n = 1; n <= r.basis.dim(); ++n) {
    oracle_sel.push_back(mu);
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = fom_solve(sys, mu).free_values;
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.rows(), basis.cols());
    double best = -1.0;
    for (const auto& p : train) {
      const Eigen::MatrixXd a = sys.operator_at(p).to_dense();
      const Eigen::VectorXd f = sys.load_at(p);
      const Eigen::VectorXd c = (q.transpose() * a * q).ldlt().solve(q.transpose() * f);
      const Eigen::VectorXd res = f - a * (q * c);
      const double eta = std::sqrt(res.dot(xf.solve(res))) / std::sqrt(std::min(p.mu0, 1.0));
      if (eta > best) {
        best = eta;
        mu = p;
      }
    }
    EXPECT_NEAR(best, r.trace.max_eta_history[n - 1], 1e-6 * best + 1e-12) << n;
  }
  ASSERT_EQ(oracle_sel.size(), r.trace.selected_parameters.size());
  for (std::size_t i = 0; i < oracle_sel.size(); ++i) EXPECT_EQ(oracle_sel[i], r.trace.selected_parameters[i]);
}

TEST(Greedy, InfiniteToleranceStopsAtOne) {
  GreedyOptions opt;
  opt.tol = std::numeric_limits<double>::infinity();
  const auto r = greedy(setup().sys, setup().train, opt);
  EXPECT_EQ(r.basis.dim(), 1u);
  EXPECT_TRUE(r.trace.converged);
}

TEST(Greedy, MaxDimensionStop) {
  GreedyOptions opt;
  opt.tol = 1e-14;
  opt.n_max = 2;
  const auto r = greedy(setup().sys, setup().train, opt);
  EXPECT_EQ(r.basis.dim(), 2u);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_EQ(r.trace.stop, GreedyStop::max_dimension);
}

TEST(Greedy, DependentSnapshotStopsEarly) {
  std::vector<ParameterPoint> train;
  for (const double m1 : {-1.0, -0.2, 0.5, 1.0}) train.push_back({3.0, m1});
  GreedyOptions opt;
  opt.tol = 1e-300;
  const auto r = greedy(setup().sys, train, opt);
  EXPECT_EQ(r.basis.dim(), 1u);
  EXPECT_FALSE(r.trace.converged);
  EXPECT_EQ(r.trace.stop, GreedyStop::dependent_snapshot);
}

TEST(Greedy, ZeroStartSnapshotFails) {
  try {
    greedy(setup().sys, {{1.0, 0.0}, {2.0, 0.5}}, GreedyOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dependent_snapshot);
  }
}

TEST(Greedy, RejectsBadOptions) {
  GreedyOptions opt;
  opt.tol = 0.0;
  EXPECT_THROW(greedy(setup().sys, setup().train, opt), Error);
  opt = {};
  opt.mu_start = ParameterPoint{0.77, 0.1};
  EXPECT_THROW(greedy(setup().sys, setup().train, opt), Error);
  EXPECT_THROW(greedy(setup().sys, {}, GreedyOptions{}), Error);
}

TEST(Greedy, RelativeEstimatorAlsoConverges) {
  GreedyOptions opt;
  opt.relative = true;
  const auto r = greedy(setup().sys, setup().train, opt);
  EXPECT_TRUE(r.trace.converged);
  EXPECT_LE(r.basis.dim(), 8u);
}

TEST(Greedy, TraceCsv) {
  std::ostringstream out;
  write_greedy_trace_csv(out, setup().result.trace);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,mu0,mu1,max_eta");
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
            setup().result.basis.dim() + 1);
}
