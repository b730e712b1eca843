#include "romkit/affine_system.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/SparseCholesky>

#include "romkit/csv.hpp"
#include "romkit/error.hpp"

namespace romkit {

namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
using Ldlt = Eigen::SimplicialLDLT<ColMatrix>;

std::string describe(const ParameterPoint& mu) {
  return "(" + format_double(mu.mu0) + ", " + format_double(mu.mu1) + ")";
}

void factorize_spd(Ldlt& solver, const SparseOperator& op, const std::string& what) {
  solver.compute(ColMatrix(op.to_eigen()));
  if (solver.info() != Eigen::Success || !(solver.vectorD().minCoeff() > 0.0)) {
    fail(ErrorCode::solver_failure, what + ": matrix is not symmetric positive definite");
  }
}

}  // namespace

struct AffineSystem::GramFactor {
  Ldlt ldlt;
};

void check_admissible(const ParameterPoint& mu) {
  if (!std::isfinite(mu.mu0) || mu.mu0 < parameter_box.mu0_min || mu.mu0 > parameter_box.mu0_max) {
    fail(ErrorCode::invalid_argument, "mu0 = " + format_double(mu.mu0) + " outside [" +
                                          format_double(parameter_box.mu0_min) + ", " +
                                          format_double(parameter_box.mu0_max) + "]");
  }
  if (!std::isfinite(mu.mu1) || mu.mu1 < parameter_box.mu1_min || mu.mu1 > parameter_box.mu1_max) {
    fail(ErrorCode::invalid_argument, "mu1 = " + format_double(mu.mu1) + " outside [" +
                                          format_double(parameter_box.mu1_min) + ", " +
                                          format_double(parameter_box.mu1_max) + "]");
  }
}

AffineSystem::AffineSystem(std::vector<SparseOperator> a_ops,
                           std::vector<Eigen::VectorXd> f_vecs, SparseOperator gram_x,
                           std::vector<Index> free_nodes, Index node_count)
    : a_ops_(std::move(a_ops)),
      f_vecs_(std::move(f_vecs)),
      gram_x_(std::move(gram_x)),
      free_nodes_(std::move(free_nodes)),
      node_count_(node_count) {
  const auto n = static_cast<Index>(free_nodes_.size());
  if (a_ops_.size() != q_a || f_vecs_.size() != q_f) {
    fail(ErrorCode::invalid_argument, "affine system: expected 2 operators and 1 load vector");
  }
  for (const auto& a : a_ops_) {
    if (a.rows() != n || a.cols() != n) {
      fail(ErrorCode::invalid_argument, "affine system: operator size does not match free nodes");
    }
  }
  if (gram_x_.rows() != n || gram_x_.cols() != n || f_vecs_.front().size() != n) {
    fail(ErrorCode::invalid_argument, "affine system: Gram matrix or load size mismatch");
  }
  auto factor = std::make_shared<GramFactor>();
  factorize_spd(factor->ldlt, gram_x_, "V-Gram matrix");
  gram_factor_ = std::move(factor);
}

SparseOperator AffineSystem::operator_at(const ParameterPoint& mu) const {
  const auto theta = theta_a(mu);
  return linear_combination(theta, a_ops_);
}

Eigen::VectorXd AffineSystem::load_at(const ParameterPoint& mu) const {
  const auto theta = theta_f(mu);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(free_count());
  for (std::size_t q = 0; q < q_f; ++q) load += theta[q] * f_vecs_[q];
  return load;
}

Eigen::VectorXd AffineSystem::solve_gram(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != free_count()) fail(ErrorCode::invalid_argument, "solve_gram: size mismatch");
  return gram_factor_->ldlt.solve(rhs);
}

Field AffineSystem::expand(const Eigen::VectorXd& free_values) const {
  if (free_values.size() != free_count()) {
    fail(ErrorCode::invalid_argument, "expand: expected one value per free node");
  }
  Field field{Eigen::VectorXd::Zero(node_count_)};
  for (Index k = 0; k < free_count(); ++k) field.values[free_nodes_[k]] = free_values[k];
  return field;
}

Eigen::VectorXd AffineSystem::restrict(const Field& field) const {
  if (field.values.size() != node_count_) {
    fail(ErrorCode::invalid_argument, "restrict: field length does not match node count");
  }
  Eigen::VectorXd free_values(free_count());
  for (Index k = 0; k < free_count(); ++k) free_values[k] = field.values[free_nodes_[k]];
  return free_values;
}

SparseOperator assemble_stiffness(const Mesh& mesh, int subdomain) {
  const auto n = static_cast<Index>(mesh.node_count());
  std::vector<Triplet> entries;
  entries.reserve(9 * mesh.cell_count());
  for (std::size_t c = 0; c < mesh.cell_count(); ++c) {
    const double area = mesh.signed_area(c);
    if (!(std::abs(area) > 1e-14)) {
      fail(ErrorCode::assembly_failure, "degenerate triangle at cell " + std::to_string(c));
    }
    if (mesh.cell_subdomain[c] != subdomain) continue;
    const auto& t = mesh.triangles[c];
    // Gradient of the hat function at vertex i is (b_i, c_i) / (2 area).
    std::array<double, 3> b{}, g{};
    for (int i = 0; i < 3; ++i) {
      const auto& pj = mesh.nodes[t[(i + 1) % 3]];
      const auto& pk = mesh.nodes[t[(i + 2) % 3]];
      b[i] = pj[1] - pk[1];
      g[i] = pk[0] - pj[0];
    }
    const double scale = 1.0 / (4.0 * std::abs(area));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        entries.push_back({t[i], t[j], scale * (b[i] * b[j] + g[i] * g[j])});
      }
    }
  }
  return SparseOperator::from_triplets(n, n, std::move(entries));
}

Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, BoundaryTag tag) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Index>(mesh.node_count()));
  for (const auto& edge : mesh.boundary_edges) {
    if (edge.tag != tag) continue;
    const auto& p = mesh.nodes[edge.nodes[0]];
    const auto& q = mesh.nodes[edge.nodes[1]];
    const double half = 0.5 * std::hypot(q[0] - p[0], q[1] - p[1]);
    load[edge.nodes[0]] += half;
    load[edge.nodes[1]] += half;
  }
  return load;
}

AffineSystem assemble_affine_system(const Mesh& mesh) {
  const auto& free = mesh.free_nodes;
  std::vector<SparseOperator> a_ops;
  for (const int subdomain : {1, 2}) {
    a_ops.push_back(assemble_stiffness(mesh, subdomain).submatrix(free, free));
  }
  const Eigen::VectorXd base = assemble_boundary_load(mesh, BoundaryTag::base);
  Eigen::VectorXd f0(static_cast<Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) f0[static_cast<Index>(k)] = base[free[k]];

  const std::array<double, 2> ones{1.0, 1.0};
  SparseOperator gram = linear_combination(ones, a_ops);
  return AffineSystem(std::move(a_ops), {std::move(f0)}, std::move(gram), free,
                      static_cast<Index>(mesh.node_count()));
}

FomSolution fom_solve(const AffineSystem& sys, const ParameterPoint& mu,
                      const FomOptions& options) {
  check_admissible(mu);
  const auto start = std::chrono::steady_clock::now();

  const SparseOperator a = sys.operator_at(mu);
  const Eigen::VectorXd load = sys.load_at(mu);

  FomSolution sol;
  if (options.solver == LinearSolver::direct) {
    Ldlt solver;
    factorize_spd(solver, a, "full-order operator at mu = " + describe(mu));
    sol.free_values = solver.solve(load);
  } else {
    CgResult cg = conjugate_gradient(a, load, options.cg_rel_tol);
    if (!cg.converged) {
      fail(ErrorCode::solver_failure, "conjugate gradient did not converge at mu = " + describe(mu));
    }
    sol.free_values = std::move(cg.solution);
  }
  sol.field = sys.expand(sol.free_values);
  sol.output_s = sys.l_vec().dot(sol.free_values);
  sol.output_average = sol.output_s / sys.base_length();
  sol.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

double v_norm(const AffineSystem& sys, const Eigen::VectorXd& free_values) {
  return std::sqrt(std::max(0.0, sys.gram_x().quadratic_form(free_values)));
}

double v_norm(const AffineSystem& sys, const Field& field) {
  return v_norm(sys, sys.restrict(field));
}

double energy_norm(const AffineSystem& sys, const ParameterPoint& mu,
                   const Eigen::VectorXd& free_values) {
  const auto theta = theta_a(mu);
  double energy = 0.0;
  for (std::size_t q = 0; q < q_a; ++q) {
    energy += theta[q] * sys.a_ops()[q].quadratic_form(free_values);
  }
  return std::sqrt(std::max(0.0, energy));
}

void write_field_csv(std::ostream& out, const Mesh& mesh, const Field& field) {
  if (static_cast<std::size_t>(field.values.size()) != mesh.node_count()) {
    fail(ErrorCode::invalid_argument, "field length does not match mesh node count");
  }
  out << "node_index,x,y,value\n";
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    out << i << ',' << format_double(mesh.nodes[i][0]) << ',' << format_double(mesh.nodes[i][1])
        << ',' << format_double(field.values[static_cast<Index>(i)]) << '\n';
  }
}

}  // namespace romkit
