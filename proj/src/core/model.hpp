#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "linalg.hpp"

namespace rclqr {

/// Plant x+ = A x + B u + w with stage cost x^T Q x + u^T R u.
struct LinearSystem {
  Mat A;  // n x n
  Mat B;  // n x m
  Mat Q;  // n x n, symmetric PSD
  Mat R;  // m x m, symmetric PD

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }

  /// Checks shapes, Q PSD, R PD and stabilizability of (A, B) via a
  /// Riccati solve with Q + 1e-9 I. Throws rclqr::Error.
  void validate() const;
};

// Source-space noise distributions. "Source" is either the state space or,
// for input disturbances, the input space (mapped through B).
struct Gaussian {
  Vec mean;
  Mat cov;
};

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Gaussian> components;
};

struct Deterministic {
  Vec value;
};

using NoiseDistribution = std::variant<Gaussian, GaussianMixture, Deterministic>;

/// Mean, covariance and the Q-weighted third/fourth order statistics of the
/// state-space noise.
struct NoiseStats {
  Vec wbar;
  Mat W;
  Vec M3;
  double m4 = 0.0;
};

namespace detail {
struct SamplerTable;
}

/// Seeded stream of state-space noise vectors. Copying a sampler copies its
/// generator state, so a copy replays the same stream.
class NoiseSampler {
 public:
  NoiseSampler(std::shared_ptr<const detail::SamplerTable> table,
               std::uint64_t seed);

  Eigen::Index dim() const;
  void sample(Eigen::Ref<Vec> out);
  Vec sample();

 private:
  std::shared_ptr<const detail::SamplerTable> table_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  Vec xi_;
};

struct NoiseOptions {
  bool enters_via_B = false;
  std::optional<double> bound_v;     // rejection-truncation radius (state space)
  double regularize_W = 0.0;         // adds N(0, eps I) in state space
  std::size_t stats_samples = 1000000;  // Monte Carlo size when truncated
  std::uint64_t stats_seed = 0x5eed5eedULL;
};

class NoiseModel {
 public:
  /// Builds the model and its statistics. Q is needed for M3 and m4.
  static NoiseModel create(const NoiseDistribution& dist,
                           const NoiseOptions& options, const LinearSystem& sys);

  const NoiseStats& stats() const { return stats_; }
  const NoiseDistribution& distribution() const { return dist_; }
  const NoiseOptions& options() const { return options_; }
  Eigen::Index dim() const { return stats_.wbar.size(); }

  NoiseSampler sampler(std::uint64_t seed) const;

 private:
  NoiseDistribution dist_;
  NoiseOptions options_;
  std::shared_ptr<const detail::SamplerTable> table_;
  NoiseStats stats_;
};

/// Exact statistics of a (possibly mapped, possibly regularized) Gaussian
/// mixture; used for untruncated models.
NoiseStats closed_form_noise_stats(const std::vector<double>& weights,
                                   const std::vector<Vec>& means,
                                   const std::vector<Mat>& covs, const Mat& Q);

/// Two-pass Monte Carlo estimate over `sample_count` draws of `sampler`
/// (which is taken by value and replayed). Requires sample_count >= 1e4.
NoiseStats estimate_noise_stats(const NoiseSampler& sampler, const Mat& Q,
                                std::size_t sample_count);

/// Risk tolerance and its transformed counterpart
/// rho_bar = rho - m4 + 4 tr((W Q)^2).
struct RiskSpec {
  double rho = 0.0;
  double rho_bar = 0.0;

  static RiskSpec from_rho(double rho, const NoiseStats& stats, const Mat& Q);
  static RiskSpec from_rho_bar(double rho_bar, const NoiseStats& stats,
                               const Mat& Q);
};

/// 4 tr((W Q)^2) - m4, the offset between rho and rho_bar.
double risk_offset(const NoiseStats& stats, const Mat& Q);

}  // namespace rclqr
