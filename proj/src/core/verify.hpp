#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "problem.hpp"

namespace rclqr {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  bool informational = false;  // reported, never fails the suite
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  double mu = 2.0;  // multiplier for the policy-level checks (mu = 0 always runs too)
};

/// Runs the model-based invariant suite: solver oracles, closed-form
/// identities, gradient, Bellman and advantage checks, multiplier
/// monotonicity and local gradient dominance. No optimizer runs.
std::vector<CheckResult> run_checks(const Problem& problem, const CheckOptions& options);

bool all_passed(const std::vector<CheckResult>& results);

/// Sum of Acl^k W Acl^T^k until the terms stop contributing.
Mat lyapunov_series(const Mat& Acl, const Mat& W, std::size_t max_terms = 1000000);

/// Fourth-order central differences of L(., mu) at p, step h * max(1, |x_ij|).
/// Steps that leave the stabilizing set are shrunk by 10 (up to 4 times).
Mat finite_difference_gradient(const RiskLagrangian& rl, const Policy& p, double h = 1e-4);

/// Largest entrywise |a - b| / max(|b_ij|, floor * ||b||_F).
double entrywise_relative_error(const Mat& a, const Mat& b, double floor = 0.0);

/// `count` stabilizing policies center + scale * N(0, 1) entries, shrinking
/// a draw until it stabilizes with spectral radius <= max_radius.
std::vector<Policy> sample_stabilizing_policies(const LinearSystem& sys,
                                                const Policy& center, std::size_t count,
                                                double scale, std::mt19937_64& engine,
                                                double max_radius = 0.999);

}  // namespace rclqr
