#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "romkit/affine_system.hpp"
#include "romkit/greedy.hpp"
#include "romkit/mesh.hpp"
#include "romkit/pod.hpp"
#include "romkit/reduced_model.hpp"
#include "romkit/snapshots.hpp"
#include "romkit/surrogates.hpp"

namespace romkit {

enum class BasisMethod { greedy, pod };

std::string to_string(BasisMethod m);
BasisMethod parse_basis_method(const std::string& name);

enum class OnlineMethod { rb, pod_rbf, local_pod_rbf, pod_nn };

std::string to_string(OnlineMethod m);
/// Returns nullopt for an unknown name.
std::optional<OnlineMethod> parse_online_method(const std::string& name);

struct OfflineSettings {
  int refine = 16;
  BasisMethod method = BasisMethod::greedy;
  GridSpec train_grid{10, 10, GridKind::training, std::nullopt};
  double tol = 1e-5;
  std::size_t n_max = 20;
  bool relative_tol = false;
  /// POD selection: fixed n wins over the energy fraction.
  std::optional<std::size_t> n;
  double energy = 0.9999;
  /// Surrogates to fit. Empty means none.
  std::vector<OnlineMethod> surrogates;
  KernelChoice kernel;
  /// Local POD-RBF dimension; default picks it from the energy criterion.
  std::optional<std::size_t> local_n;
  PodNnConfig nn;
};

/// Everything the offline stage produces; what a package stores.
struct ModelArtifacts {
  std::string model_id;
  OfflineSettings settings;
  Mesh mesh;
  std::shared_ptr<const AffineSystem> system;
  /// Present when the full training grid was solved.
  std::optional<SnapshotSet> snapshots;
  ReducedModel reduced;
  std::optional<GreedyTrace> greedy_trace;
  std::optional<PodSpectrum> spectrum;
  /// POD basis of the training snapshots used by POD-RBF and POD-NN.
  std::optional<ReducedBasis> surrogate_basis;
  std::optional<PodRbfSurrogate> pod_rbf;
  std::optional<LocalBasisFamily> local_pod_rbf;
  std::optional<PodNnSurrogate> pod_nn;

  bool has_method(OnlineMethod m) const;
  /// Largest n usable with the method; throws invalid_argument if absent.
  std::size_t method_dim(OnlineMethod m) const;
  std::vector<OnlineMethod> methods() const;
};

struct OfflineTimings {
  double mesh_and_assembly = 0.0;
  double snapshots = 0.0;
  double basis = 0.0;
  double surrogates = 0.0;
};

struct OfflineResult {
  ModelArtifacts artifacts;
  OfflineTimings timings;
  std::vector<std::string> warnings;
};

OfflineResult run_offline(const OfflineSettings& settings, const std::string& model_id);

struct OnlineResult {
  OnlineMethod method = OnlineMethod::rb;
  std::size_t n = 0;
  Eigen::VectorXd free_values;
  double output_s = 0.0;
  /// Certified energy-norm bound; for surrogates it is evaluated from the
  /// full-order residual of the predicted field.
  double eta_en = 0.0;
  double online_ms = 0.0;
  bool extrapolated = false;
  std::vector<std::string> warnings;
};

OnlineResult online_solve(const ModelArtifacts& model, OnlineMethod method,
                          const ParameterPoint& mu, std::size_t n);

/// Energy-norm error bound ||f - A u||_{V'} / sqrt(alpha_LB) of any field.
double field_error_bound(const AffineSystem& sys, const ParameterPoint& mu,
                         const Eigen::VectorXd& free_values);

/// Error metrics of an online result against a full-order solution.
ErrorReport compare_with_fom(const AffineSystem& sys, const ParameterPoint& mu,
                             const OnlineResult& online, const FomSolution& fom);

}  // namespace romkit
