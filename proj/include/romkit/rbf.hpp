#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace romkit {

enum class KernelType { thin_plate_spline, gaussian, multiquadric };

std::string to_string(KernelType type);
KernelType parse_kernel(const std::string& name);

/// phi(r). Gaussian exp(-(r/eps)^2) and multiquadric sqrt(1 + (r/eps)^2) use
/// eps as a length scale; thin-plate spline r^2 log r ignores it.
struct RbfKernel {
  KernelType type = KernelType::thin_plate_spline;
  double epsilon = 1.0;

  double operator()(double r) const;
};

/// f(x) = sum_i w_i phi(||x - x_i||) + c_0 + c^T x, vector-valued with
/// shared centres; weights satisfy the moment conditions sum w_i = 0 and
/// sum w_i x_i = 0.
class RbfInterpolant {
 public:
  RbfInterpolant() = default;
  RbfInterpolant(Eigen::MatrixXd centers, Eigen::MatrixXd weights, Eigen::MatrixXd poly,
                 RbfKernel kernel);

  /// d x n, one centre per column.
  const Eigen::MatrixXd& centers() const { return centers_; }
  /// n x k
  const Eigen::MatrixXd& weights() const { return weights_; }
  /// (d + 1) x k; row 0 is the constant term.
  const Eigen::MatrixXd& poly() const { return poly_; }
  const RbfKernel& kernel() const { return kernel_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  Eigen::Index input_dim() const { return centers_.rows(); }
  Eigen::Index output_dim() const { return weights_.cols(); }

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

 private:
  Eigen::MatrixXd centers_;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd poly_;
  RbfKernel kernel_;
  std::vector<std::string> warnings_;
};

/// Median pairwise centre distance; the default shape length.
double median_center_distance(const Eigen::MatrixXd& centers);

/// Augmented saddle-point matrix [Phi P; P^T 0] for the given centres.
Eigen::MatrixXd rbf_system_matrix(const Eigen::MatrixXd& centers, const RbfKernel& kernel);

/// Fits through (centers(:, i), values(i, :)). For gaussian/multiquadric
/// kernels without epsilon the median centre distance is used.
RbfInterpolant rbf_fit(const Eigen::MatrixXd& centers, const Eigen::MatrixXd& values,
                       KernelType type = KernelType::thin_plate_spline,
                       std::optional<double> epsilon = std::nullopt);

}  // namespace romkit
