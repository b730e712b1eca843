#pragma once

#include <algorithm>
#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "romkit/mesh.hpp"
#include "romkit/sparse.hpp"

namespace romkit {

/// mu0 is the conductivity of the disk, mu1 the heat flux through the base.
struct ParameterPoint {
  double mu0 = 1.0;
  double mu1 = 0.0;

  friend bool operator==(const ParameterPoint&, const ParameterPoint&) = default;
};

struct ParameterBox {
  double mu0_min = 0.1;
  double mu0_max = 10.0;
  double mu1_min = -1.0;
  double mu1_max = 1.0;

  bool contains(const ParameterPoint& mu) const {
    return mu.mu0 >= mu0_min && mu.mu0 <= mu0_max && mu.mu1 >= mu1_min && mu.mu1 <= mu1_max;
  }
};

inline constexpr ParameterBox parameter_box{};

/// Throws invalid_argument naming the offending component.
void check_admissible(const ParameterPoint& mu);

inline constexpr std::size_t q_a = 2;
inline constexpr std::size_t q_f = 1;

/// Affine coefficients: a(.,.;mu) = mu0 a_0 + a_1, f(.;mu) = mu1 f_0.
inline std::array<double, q_a> theta_a(const ParameterPoint& mu) { return {mu.mu0, 1.0}; }
inline std::array<double, q_f> theta_f(const ParameterPoint& mu) { return {mu.mu1}; }

/// Coercivity and continuity constants of a(.,.;mu) relative to the
/// gradient inner product; both are exact for this problem.
inline double alpha_lb(const ParameterPoint& mu) { return std::min(mu.mu0, 1.0); }
inline double gamma_ub(const ParameterPoint& mu) { return std::max(mu.mu0, 1.0); }

/// Nodal values on the whole mesh (Dirichlet nodes included).
struct Field {
  Eigen::VectorXd values;
};

/// Parameter-independent operators of the thermal block, restricted to the
/// free (non-Dirichlet) nodes.
class AffineSystem {
 public:
  AffineSystem(std::vector<SparseOperator> a_ops, std::vector<Eigen::VectorXd> f_vecs,
               SparseOperator gram_x, std::vector<Index> free_nodes, Index node_count);

  const std::vector<SparseOperator>& a_ops() const { return a_ops_; }
  const std::vector<Eigen::VectorXd>& f_vecs() const { return f_vecs_; }
  /// Output functional; equal to f_0 (compliance up to the factor mu1).
  const Eigen::VectorXd& l_vec() const { return f_vecs_.front(); }
  const SparseOperator& gram_x() const { return gram_x_; }
  const std::vector<Index>& free_nodes() const { return free_nodes_; }
  Index node_count() const { return node_count_; }
  Index free_count() const { return static_cast<Index>(free_nodes_.size()); }
  /// |Gamma_base|, the sum of the boundary mass vector.
  double base_length() const { return l_vec().sum(); }

  SparseOperator operator_at(const ParameterPoint& mu) const;
  Eigen::VectorXd load_at(const ParameterPoint& mu) const;

  /// X^{-1} rhs with the cached factorization of the V-Gram matrix.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& rhs) const;

  Field expand(const Eigen::VectorXd& free_values) const;
  Eigen::VectorXd restrict(const Field& field) const;

 private:
  struct GramFactor;

  std::vector<SparseOperator> a_ops_;
  std::vector<Eigen::VectorXd> f_vecs_;
  SparseOperator gram_x_;
  std::vector<Index> free_nodes_;
  Index node_count_;
  std::shared_ptr<const GramFactor> gram_factor_;
};

/// P1 stiffness over all nodes, restricted to cells with the given subdomain tag.
SparseOperator assemble_stiffness(const Mesh& mesh, int subdomain);
/// P1 boundary mass vector (integral of each hat function) on edges with the tag.
Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, BoundaryTag tag);

AffineSystem assemble_affine_system(const Mesh& mesh);

enum class LinearSolver { direct, conjugate_gradient };

struct FomOptions {
  LinearSolver solver = LinearSolver::direct;
  double cg_rel_tol = 1e-12;
};

struct FomSolution {
  Field field;
  Eigen::VectorXd free_values;
  double output_s = 0.0;
  double output_average = 0.0;
  double wall_time = 0.0;
};

FomSolution fom_solve(const AffineSystem& sys, const ParameterPoint& mu,
                      const FomOptions& options = {});

double v_norm(const AffineSystem& sys, const Eigen::VectorXd& free_values);
double v_norm(const AffineSystem& sys, const Field& field);
double energy_norm(const AffineSystem& sys, const ParameterPoint& mu,
                   const Eigen::VectorXd& free_values);

/// CSV with header `node_index,x,y,value`.
void write_field_csv(std::ostream& out, const Mesh& mesh, const Field& field);

}  // namespace romkit
