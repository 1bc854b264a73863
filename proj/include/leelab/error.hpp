#pragma once

#include <stdexcept>
#include <string>

namespace leelab {

/// Machine-readable failure categories. The names returned by
/// error_code_name() appear verbatim in CLI error JSON.
enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  malformed_file,
  jacobi_violation,
  not_unimodular,
  non_positive_metric,
  not_normalized,
  not_gauduchon,
  non_solvable,
  no_convergence,
  convention_mismatch,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace leelab
