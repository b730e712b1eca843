#include "romkit/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"
#include "romkit/pod.hpp"

namespace romkit {

namespace {

double scale_to_unit(double v, double lo, double hi) {
  if (hi - lo <= 0.0) return 0.0;
  return 2.0 * (v - lo) / (hi - lo) - 1.0;
}

Eigen::MatrixXd scaled_inputs(const ParameterScaler& scaler,
                              const std::vector<ParameterPoint>& points) {
  Eigen::MatrixXd x(2, static_cast<Eigen::Index>(points.size()));
  for (std::size_t m = 0; m < points.size(); ++m) x.col(static_cast<Eigen::Index>(m)) = scaler(points[m]);
  return x;
}

void check_n(std::size_t n, std::size_t dim) {
  if (n < 1 || n > dim) {
    fail(ErrorCode::invalid_argument,
         "n = " + std::to_string(n) + " outside [1, " + std::to_string(dim) + "]");
  }
}

SurrogatePrediction start_prediction(const ParameterScaler& scaler, const ParameterPoint& mu) {
  check_admissible(mu);
  SurrogatePrediction p;
  p.extrapolated = !scaler.inside(mu);
  if (p.extrapolated) p.warnings.push_back("parameter outside the training range; extrapolating");
  return p;
}

}  // namespace

CoefficientTable project_coefficients(const SnapshotSet& snapshots, const ReducedBasis& basis,
                                      const SparseOperator& gram) {
  if (snapshots.fields.rows() != basis.vectors.rows() || gram.rows() != basis.vectors.rows()) {
    fail(ErrorCode::invalid_argument, "project_coefficients: dimension mismatch");
  }
  CoefficientTable table;
  table.parameters = snapshots.parameters;
  table.coefficients.resize(snapshots.fields.cols(), basis.vectors.cols());
  for (Eigen::Index i = 0; i < basis.vectors.cols(); ++i) {
    const Eigen::VectorXd x_xi = gram * basis.vectors.col(i).eval();
    table.coefficients.col(i) = snapshots.fields.transpose() * x_xi;
  }
  return table;
}

ParameterScaler ParameterScaler::fit(const std::vector<ParameterPoint>& points) {
  if (points.empty()) fail(ErrorCode::invalid_argument, "scaler: no parameters");
  ParameterScaler s;
  s.log_mu0_min = s.log_mu0_max = std::log(points.front().mu0);
  s.mu1_min = s.mu1_max = points.front().mu1;
  for (const auto& p : points) {
    s.log_mu0_min = std::min(s.log_mu0_min, std::log(p.mu0));
    s.log_mu0_max = std::max(s.log_mu0_max, std::log(p.mu0));
    s.mu1_min = std::min(s.mu1_min, p.mu1);
    s.mu1_max = std::max(s.mu1_max, p.mu1);
  }
  return s;
}

Eigen::Vector2d ParameterScaler::operator()(const ParameterPoint& mu) const {
  return {scale_to_unit(std::log(mu.mu0), log_mu0_min, log_mu0_max),
          scale_to_unit(mu.mu1, mu1_min, mu1_max)};
}

bool ParameterScaler::inside(const ParameterPoint& mu) const {
  const double l = std::log(mu.mu0);
  const double slack = 1e-12;
  return l >= log_mu0_min - slack && l <= log_mu0_max + slack && mu.mu1 >= mu1_min - slack &&
         mu.mu1 <= mu1_max + slack;
}

PodRbfSurrogate podrbf_build(const SnapshotSet& snapshots, const ReducedBasis& basis,
                             const SparseOperator& gram, const KernelChoice& kernel) {
  PodRbfSurrogate s;
  s.scaler = ParameterScaler::fit(snapshots.parameters);
  s.basis = basis;
  const CoefficientTable table = project_coefficients(snapshots, basis, gram);
  s.interpolant = rbf_fit(scaled_inputs(s.scaler, snapshots.parameters), table.coefficients,
                          kernel.type, kernel.epsilon);
  return s;
}

SurrogatePrediction podrbf_predict(const PodRbfSurrogate& surrogate, const ParameterPoint& mu,
                                   std::size_t n) {
  check_n(n, surrogate.basis.dim());
  SurrogatePrediction p = start_prediction(surrogate.scaler, mu);
  const Eigen::VectorXd c = surrogate.interpolant.eval(surrogate.scaler(mu));
  p.free_values = surrogate.basis.reconstruct(c.head(static_cast<Eigen::Index>(n)));
  for (const auto& w : surrogate.interpolant.warnings()) p.warnings.push_back(w);
  return p;
}

namespace {

// Snapshot column indices grouped by mu0, anchors in increasing order.
std::map<double, std::vector<Eigen::Index>> group_by_mu0(const SnapshotSet& snapshots) {
  std::map<double, std::vector<Eigen::Index>> groups;
  for (std::size_t m = 0; m < snapshots.size(); ++m) {
    groups[snapshots.parameters[m].mu0].push_back(static_cast<Eigen::Index>(m));
  }
  return groups;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& fields, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(fields.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = fields.col(cols[k]);
  return out;
}

}  // namespace

std::vector<std::size_t> local_energy_dimensions(const SnapshotSet& snapshots,
                                                 const SparseOperator& gram, double threshold) {
  std::vector<std::size_t> dims;
  for (const auto& [mu0, cols] : group_by_mu0(snapshots)) {
    dims.push_back(pod_spectrum(gather(snapshots.fields, cols), gram).dimension_for_energy(threshold));
  }
  return dims;
}

LocalBasisFamily local_podrbf_build(const SnapshotSet& snapshots, const SparseOperator& gram,
                                    std::optional<std::size_t> n, const KernelChoice& kernel) {
  const auto groups = group_by_mu0(snapshots);
  if (groups.size() < 3) {
    fail(ErrorCode::invalid_argument, "local POD-RBF needs at least 3 mu0 anchors, got " +
                                          std::to_string(groups.size()));
  }
  for (const auto& [mu0, cols] : groups) {
    if (cols.size() < 3) {
      fail(ErrorCode::invalid_argument,
           "local POD-RBF needs at least 3 mu1 values at anchor mu0 = " + format_double(mu0));
    }
  }
  std::size_t dim = 0;
  if (n) {
    dim = *n;
  } else {
    const auto dims = local_energy_dimensions(snapshots, gram);
    dim = *std::max_element(dims.begin(), dims.end());
  }

  LocalBasisFamily family;
  family.scaler = ParameterScaler::fit(snapshots.parameters);
  family.local_coefficients.parameters = snapshots.parameters;
  family.local_coefficients.coefficients.resize(static_cast<Eigen::Index>(snapshots.size()),
                                                static_cast<Eigen::Index>(dim));

  for (const auto& [mu0, cols] : groups) {
    const Eigen::MatrixXd local = gather(snapshots.fields, cols);
    PodResult result;
    try {
      result = pod(local, gram, FixedDimension{dim});
    } catch (const Error& e) {
      fail(e.code(), "anchor mu0 = " + format_double(mu0) + ": " + e.what());
    }
    ReducedBasis basis = std::move(result.basis);
    if (!family.anchor_bases.empty()) {
      // Flip each mode to agree with the previous anchor.
      const auto& prev = family.anchor_bases.back().vectors;
      for (Eigen::Index i = 0; i < basis.vectors.cols(); ++i) {
        if (gram.bilinear(basis.vectors.col(i), prev.col(i)) < 0.0) basis.vectors.col(i) *= -1.0;
      }
    }
    for (Eigen::Index i = 0; i < basis.vectors.cols(); ++i) {
      const Eigen::VectorXd x_xi = gram * basis.vectors.col(i).eval();
      for (const auto m : cols) {
        family.local_coefficients.coefficients(m, i) = snapshots.fields.col(m).dot(x_xi);
      }
    }
    family.anchor_values.push_back(mu0);
    family.anchor_bases.push_back(std::move(basis));
  }

  const auto free = static_cast<Eigen::Index>(snapshots.fields.rows());
  const auto anchors = static_cast<Eigen::Index>(family.anchor_values.size());
  Eigen::MatrixXd anchor_x(1, anchors);
  Eigen::MatrixXd stacked(anchors, free * static_cast<Eigen::Index>(dim));
  for (Eigen::Index a = 0; a < anchors; ++a) {
    anchor_x(0, a) = family.scaler({family.anchor_values[static_cast<std::size_t>(a)], 0.0})[0];
    const auto& v = family.anchor_bases[static_cast<std::size_t>(a)].vectors;
    stacked.row(a) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), v.size());
  }
  family.basis_interpolant = rbf_fit(anchor_x, stacked, kernel.type, kernel.epsilon);
  family.coeff_interpolant = rbf_fit(scaled_inputs(family.scaler, snapshots.parameters),
                                     family.local_coefficients.coefficients, kernel.type,
                                     kernel.epsilon);
  return family;
}

ReducedBasis local_basis_at(const LocalBasisFamily& family, const SparseOperator& gram,
                            double mu0) {
  const Eigen::VectorXd x = family.scaler({mu0, 0.0}).head(1);
  const Eigen::VectorXd entries = family.basis_interpolant.eval(x);
  const auto dim = static_cast<Eigen::Index>(family.dim());
  const Eigen::Map<const Eigen::MatrixXd> raw(entries.data(), entries.size() / dim, dim);
  auto ortho = orthonormalize(raw, gram);
  if (!ortho.dropped.empty()) {
    fail(ErrorCode::rank_deficient, "interpolated local basis lost rank at mu0 = " +
                                        format_double(mu0));
  }
  return std::move(ortho.basis);
}

SurrogatePrediction local_podrbf_predict(const LocalBasisFamily& family,
                                         const SparseOperator& gram, const ParameterPoint& mu,
                                         std::size_t n) {
  check_n(n, family.dim());
  SurrogatePrediction p = start_prediction(family.scaler, mu);
  const ReducedBasis basis = local_basis_at(family, gram, mu.mu0);
  const Eigen::VectorXd c = family.coeff_interpolant.eval(family.scaler(mu));
  p.free_values = basis.reconstruct(c.head(static_cast<Eigen::Index>(n)));
  for (const auto* interp : {&family.basis_interpolant, &family.coeff_interpolant}) {
    for (const auto& w : interp->warnings()) p.warnings.push_back(w);
  }
  return p;
}

PodNnConfig PodNnConfig::cabg_preset() {
  PodNnConfig config;
  config.hidden = {1300, 1300, 1300};
  config.activation = Activation::tanh;
  config.learning_rate = 1e-6;
  return config;
}

PodNnSurrogate podnn_build(const SnapshotSet& snapshots, const ReducedBasis& basis,
                           const SparseOperator& gram, const PodNnConfig& config) {
  PodNnSurrogate s;
  s.scaler = ParameterScaler::fit(snapshots.parameters);
  s.basis = basis;
  const CoefficientTable table = project_coefficients(snapshots, basis, gram);
  const Eigen::MatrixXd& c = table.coefficients;
  const auto m = static_cast<double>(c.rows());

  s.coeff_mean = c.colwise().mean().transpose();
  s.coeff_scale.resize(c.cols());
  for (Eigen::Index i = 0; i < c.cols(); ++i) {
    const double var = (c.col(i).array() - s.coeff_mean[i]).square().sum() / m;
    s.coeff_scale[i] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd targets = c.transpose();
  targets.colwise() -= s.coeff_mean;
  targets = s.coeff_scale.cwiseInverse().asDiagonal() * targets;

  std::vector<std::size_t> sizes{2};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(basis.dim());
  s.net = make_mlp(sizes, config.activation, config.learning_rate, config.seed);
  s.loss_history = mlp_train(s.net, scaled_inputs(s.scaler, snapshots.parameters), targets,
                             config.epochs);
  return s;
}

SurrogatePrediction podnn_predict(const PodNnSurrogate& surrogate, const ParameterPoint& mu,
                                  std::size_t n) {
  check_n(n, surrogate.basis.dim());
  SurrogatePrediction p = start_prediction(surrogate.scaler, mu);
  const Eigen::VectorXd x = surrogate.scaler(mu);
  const Eigen::VectorXd y = mlp_forward(surrogate.net, x);
  const Eigen::VectorXd c = surrogate.coeff_mean + surrogate.coeff_scale.cwiseProduct(y);
  p.free_values = surrogate.basis.reconstruct(c.head(static_cast<Eigen::Index>(n)));
  return p;
}

}  // namespace romkit
