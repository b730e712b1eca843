#include "romkit/error.hpp"

namespace romkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::assembly_failure: return "assembly-failure";
    case ErrorCode::solver_failure: return "solver-failure";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::dependent_snapshot: return "dependent-snapshot";
    case ErrorCode::empty_basis: return "empty-basis";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::training_diverged: return "training-diverged";
    case ErrorCode::corrupt_package: return "corrupt-package";
    case ErrorCode::version_error: return "version-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace romkit
