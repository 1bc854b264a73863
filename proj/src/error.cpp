#include "leelab/error.hpp"

namespace leelab {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::malformed_file: return "malformed_file";
    case ErrorCode::jacobi_violation: return "jacobi_violation";
    case ErrorCode::not_unimodular: return "not_unimodular";
    case ErrorCode::non_positive_metric: return "non_positive_metric";
    case ErrorCode::not_normalized: return "not_normalized";
    case ErrorCode::not_gauduchon: return "not_gauduchon";
    case ErrorCode::non_solvable: return "non_solvable";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::convention_mismatch: return "convention_mismatch";
  }
  return "unknown";
}

}  // namespace leelab
