#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "optimize.hpp"
#include "oracle.hpp"
#include "problem.hpp"

namespace rclqr {

/// Everything a CLI run needs: the problem, per-algorithm settings, seeds and
/// the output location. Parsed from strict JSON; unknown keys are rejected.
struct ExperimentConfig {
  Problem problem = uav_benchmark();

  // Raw noise description, kept so the resolved config can be echoed.
  NoiseDistribution noise_dist = uav_input_noise();
  NoiseOptions noise_options = [] {
    NoiseOptions o;
    o.enters_via_B = true;
    return o;
  }();

  double learn_mu = 2.0;
  RandomSearchConfig random_search;
  PrimalDualConfig primal_dual;
  RolloutConfig rollout;

  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "out";
  bool record_wallclock = false;
  bool dump_trajectory = false;

  /// Fully-resolved config as JSON. Parsing the echo reproduces this config.
  std::string resolved_json() const;
};

/// Parses config text. Errors carry ErrorCode::kConfiguration (with the key
/// path or line/column), kDefiniteness for R, or kPrecondition when the
/// initial policy is not stabilizing.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Expands a --seeds argument: either a list "3,7,11" or a count "20"
/// (meaning seeds 0..19).
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace rclqr
