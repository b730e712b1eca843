#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace romkit {

enum class ErrorCode {
  invalid_argument,
  assembly_failure,
  solver_failure,
  rank_deficient,
  dependent_snapshot,
  empty_basis,
  singular_system,
  training_diverged,
  corrupt_package,
  version_error,
  io_error,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code drives CLI exit status
/// and HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace romkit
