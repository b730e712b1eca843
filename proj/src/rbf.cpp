#include "romkit/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

std::string to_string(KernelType type) {
  switch (type) {
    case KernelType::thin_plate_spline: return "tps";
    case KernelType::gaussian: return "gaussian";
    case KernelType::multiquadric: return "multiquadric";
  }
  return "unknown";
}

KernelType parse_kernel(const std::string& name) {
  if (name == "tps" || name == "thin-plate-spline") return KernelType::thin_plate_spline;
  if (name == "gaussian") return KernelType::gaussian;
  if (name == "multiquadric") return KernelType::multiquadric;
  fail(ErrorCode::invalid_argument, "unknown RBF kernel '" + name + "'");
}

double RbfKernel::operator()(double r) const {
  switch (type) {
    case KernelType::thin_plate_spline: return r > 0.0 ? r * r * std::log(r) : 0.0;
    case KernelType::gaussian: {
      const double s = r / epsilon;
      return std::exp(-s * s);
    }
    case KernelType::multiquadric: {
      const double s = r / epsilon;
      return std::sqrt(1.0 + s * s);
    }
  }
  return 0.0;
}

RbfInterpolant::RbfInterpolant(Eigen::MatrixXd centers, Eigen::MatrixXd weights,
                               Eigen::MatrixXd poly, RbfKernel kernel)
    : centers_(std::move(centers)),
      weights_(std::move(weights)),
      poly_(std::move(poly)),
      kernel_(kernel) {
  if (weights_.rows() != centers_.cols() || poly_.rows() != centers_.rows() + 1 ||
      poly_.cols() != weights_.cols()) {
    fail(ErrorCode::invalid_argument, "RBF interpolant: inconsistent array shapes");
  }
}

Eigen::VectorXd RbfInterpolant::eval(const Eigen::VectorXd& x) const {
  if (x.size() != centers_.rows()) fail(ErrorCode::invalid_argument, "RBF eval: wrong input size");
  Eigen::VectorXd phi(centers_.cols());
  for (Eigen::Index i = 0; i < centers_.cols(); ++i) phi[i] = kernel_((x - centers_.col(i)).norm());
  // flat kernels give large weights of both signs; accumulate wide to keep the cancellation clean
  Eigen::VectorXd out(weights_.cols());
  for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
    long double acc = poly_(0, k);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      acc += static_cast<long double>(poly_(j + 1, k)) * x[j];
    }
    for (Eigen::Index i = 0; i < centers_.cols(); ++i) {
      acc += static_cast<long double>(weights_(i, k)) * phi[i];
    }
    out[k] = static_cast<double>(acc);
  }
  return out;
}

double median_center_distance(const Eigen::MatrixXd& centers) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < centers.cols(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) d.push_back((centers.col(i) - centers.col(j)).norm());
  }
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid > 0.0 ? *mid : 1.0;
}

Eigen::MatrixXd rbf_system_matrix(const Eigen::MatrixXd& centers, const RbfKernel& kernel) {
  const Eigen::Index d = centers.rows();
  const Eigen::Index n = centers.cols();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + d + 1, n + d + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      m(i, j) = m(j, i) = kernel((centers.col(i) - centers.col(j)).norm());
    }
    m(i, n) = m(n, i) = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) m(i, n + 1 + k) = m(n + 1 + k, i) = centers(k, i);
  }
  return m;
}

RbfInterpolant rbf_fit(const Eigen::MatrixXd& centers, const Eigen::MatrixXd& values,
                       KernelType type, std::optional<double> epsilon) {
  const Eigen::Index d = centers.rows();
  const Eigen::Index n = centers.cols();
  if (values.rows() != n) fail(ErrorCode::invalid_argument, "RBF fit: one value row per centre");
  if (n < d + 2) {
    fail(ErrorCode::invalid_argument, "RBF fit: need at least " + std::to_string(d + 2) +
                                          " centres in " + std::to_string(d) + " dimensions");
  }
  if (!centers.allFinite() || !values.allFinite()) {
    fail(ErrorCode::invalid_argument, "RBF fit: non-finite data");
  }
  const double scale = std::max(1.0, centers.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if ((centers.col(i) - centers.col(j)).norm() <= 1e-12 * scale) {
        fail(ErrorCode::singular_system, "RBF fit: centres " + std::to_string(j) + " and " +
                                             std::to_string(i) + " coincide");
      }
    }
  }

  RbfKernel kernel{type, 1.0};
  if (type != KernelType::thin_plate_spline) {
    kernel.epsilon = epsilon.value_or(median_center_distance(centers));
    if (!(kernel.epsilon > 0.0)) fail(ErrorCode::invalid_argument, "RBF fit: epsilon must be > 0");
  }

  const Eigen::MatrixXd system = rbf_system_matrix(centers, kernel);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + d + 1, values.cols());
  rhs.topRows(n) = values;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon())) {
    fail(ErrorCode::singular_system,
         "RBF fit: saddle-point system is singular (collinear or coincident centres?)");
  }
  Eigen::MatrixXd solution = lu.solve(rhs);
  // a few refinement sweeps with the residual formed in extended precision
  const Eigen::MatrixX<long double> wide = system.cast<long double>();
  for (int sweep = 0; sweep < 3 && solution.allFinite(); ++sweep) {
    const Eigen::MatrixXd residual =
        (rhs.cast<long double>() - wide * solution.cast<long double>()).cast<double>();
    solution += lu.solve(residual);
  }
  if (!solution.allFinite()) fail(ErrorCode::singular_system, "RBF fit: non-finite solution");

  RbfInterpolant model(centers, solution.topRows(n), solution.bottomRows(d + 1), kernel);
  if (1.0 / rcond > 1e14) {
    model.add_warning("RBF system ill-conditioned (condition estimate " +
                      format_double(1.0 / rcond) + ")");
  }
  return model;
}

}  // namespace romkit
