#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "rclqr/rclqr.h"

namespace cli {

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};

using ProblemPtr = std::unique_ptr<rclqr_problem, Deleter<rclqr_problem, rclqr_problem_free>>;
using PolicyPtr = std::unique_ptr<rclqr_policy, Deleter<rclqr_policy, rclqr_policy_free>>;
using RunPtr = std::unique_ptr<rclqr_run, Deleter<rclqr_run, rclqr_run_free>>;
using ExperimentPtr =
    std::unique_ptr<rclqr_experiment, Deleter<rclqr_experiment, rclqr_experiment_free>>;

// A failed library call, carrying its status for the exit code.
class ApiError : public std::runtime_error {
 public:
  ApiError(rclqr_status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  rclqr_status status() const { return status_; }

 private:
  rclqr_status status_;
};

inline void check(rclqr_status status, const char* call) {
  if (status != RCLQR_OK) {
    throw ApiError(status, std::string(call) + ": " + rclqr_status_name(status) + ": " +
                               rclqr_last_error());
  }
}

#define CLI_CHECK(expr) ::cli::check((expr), #expr)

}  // namespace cli
