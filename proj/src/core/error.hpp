#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rclqr {

enum class ErrorCode {
  kDimension,
  kInstability,
  kNumerical,
  kNonConvergence,
  kDefiniteness,
  kConfiguration,
  kDivergence,
  kPrecondition,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the rollout simulator when the state norm crosses the guard.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, double norm);
  std::size_t step() const noexcept { return step_; }
  double state_norm() const noexcept { return norm_; }

 private:
  std::size_t step_;
  double norm_;
};

// Raised by iterative solvers; carries how far they got.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::size_t iterations)
      : Error(ErrorCode::kNonConvergence, what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

}  // namespace rclqr
