#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "analytic.hpp"
#include "model.hpp"
#include "policy.hpp"

namespace rclqr {

struct RolloutConfig {
  std::size_t horizon = 100;   // averaging window T
  std::size_t burn_in = 0;     // steps discarded before averaging
  Vec x0;                      // empty means the zero state
  std::uint64_t seed = 0;
  double divergence_guard = 1e9;
};

struct OracleSample {
  double L_hat = 0.0;   // average reshaped cost c_mu
  double J_hat = 0.0;   // average x^T Q x + u^T R u
  double Jc_hat = 0.0;  // average 4 x^T QWQ x + 4 x^T Q M3
  std::size_t trajectory_len = 0;
};

/// Per-step callback: (t, x_t, u_t, c_mu(x_t, u_t)).
using TrajectorySink =
    std::function<void(std::size_t, const Vec&, const Vec&, double)>;

/// Simulates x+ = A x + B u + w under u = -K x + l for burn_in + horizon
/// steps and averages the costs over the last `horizon` of them.
/// Throws DivergenceError once ||x|| exceeds the guard.
OracleSample rollout_cost(const RiskLagrangian& rl, const NoiseModel& noise,
                          const Policy& p, const RolloutConfig& cfg,
                          const TrajectorySink& sink = {});

}  // namespace rclqr
