#include "error.hpp"

namespace rclqr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kInstability: return "instability";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDefiniteness: return "definiteness";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kPrecondition: return "precondition";
  }
  return "unknown";
}

DivergenceError::DivergenceError(std::size_t step, double norm)
    : Error(ErrorCode::kDivergence,
            "rollout diverged at step " + std::to_string(step) +
                " (state norm " + std::to_string(norm) + ")"),
      step_(step),
      norm_(norm) {}

}  // namespace rclqr
