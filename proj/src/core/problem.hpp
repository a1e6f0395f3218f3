#pragma once

#include "model.hpp"
#include "policy.hpp"

namespace rclqr {

/// Everything needed to pose one risk-constrained LQR instance.
struct Problem {
  LinearSystem sys;
  NoiseModel noise;
  RiskSpec risk;
  Policy initial;
};

/// Planar double-integrator UAV with a skewed gust mixture on the first
/// input channel, rho_bar = 15 and a hand-picked stabilizing start.
Problem uav_benchmark();

// Raw ingredients of the UAV instance, exposed for configs and tests.
LinearSystem uav_system();
GaussianMixture uav_input_noise();
Policy uav_initial_policy();
inline constexpr double kUavRhoBar = 15.0;

}  // namespace rclqr
