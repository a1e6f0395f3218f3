#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "oracle.hpp"
#include "problem.hpp"

namespace rclqr {

enum class Geometry { kSphere, kBall };
enum class Estimator { kOnePoint, kAntithetic };
enum class SafeguardKind { kNone, kRejectUnstable, kSublevel };

struct Safeguard {
  SafeguardKind kind = SafeguardKind::kRejectUnstable;
  double factor = 10.0;  // sublevel: L(X) - L(X0) <= factor * (L(X0) - D)
};

struct RandomSearchConfig {
  std::size_t iterations = 300000;
  double radius = 0.2;
  double step = 1e-5;
  RolloutConfig oracle;  // horizon defaults to 100; its seed is ignored
  std::uint64_t seed = 0;
  Safeguard safeguard;
  Geometry geometry = Geometry::kSphere;
  Estimator estimator = Estimator::kOnePoint;
  std::size_t max_resamples = 10;   // divergent oracle queries per iteration
  std::size_t max_halvings = 10;    // step halvings per destabilizing update
  std::size_t snapshot_every = 1000;
  bool record_wallclock = false;

  void validate() const;
};

enum class StepKind { kDiminishing, kConstant };

struct StepSchedule {
  StepKind kind = StepKind::kDiminishing;
  double value = 0.0;  // scale (diminishing) or xi (constant); <= 0 means auto
  double at(std::size_t j) const;  // j >= 1
};

enum class InnerMode { kExact, kRandomSearch };

struct PrimalDualConfig {
  double mu_init = 0.0;
  std::size_t outer_iters = 2000;
  StepSchedule schedule;
  InnerMode inner = InnerMode::kExact;
  RandomSearchConfig inner_search;
  bool warm_start = true;
  std::size_t risk_oracle_T = 10000;
  std::uint64_t seed = 0;
  double tolerance = 1e-9;   // exact-mode stop on |omega| and mu |omega|
  double mu_max = 1e9;
  bool record_wallclock = false;

  void validate() const;
};

/// One CSV row.
struct IterateRecord {
  std::size_t iter = 0;
  double mu = 0.0;
  double L_est = 0.0;
  double J_est = 0.0;
  double Jc_est = 0.0;
  double grad_norm = 0.0;
  double eta_effective = 0.0;
  double wallclock_ms = 0.0;
};

struct PolicySnapshot {
  std::size_t iter = 0;
  Policy policy;
};

inline constexpr const char* kIterateLogSchema = "rclqr.iterate_log.v1";

/// Append-only per-iteration log plus policy snapshots at a fixed cadence.
class IterateLog {
 public:
  void append(const IterateRecord& record) { records_.push_back(record); }
  void snapshot(std::size_t iter, const Policy& p) { snapshots_.push_back({iter, p}); }

  const std::vector<IterateRecord>& records() const { return records_; }
  const std::vector<PolicySnapshot>& snapshots() const { return snapshots_; }
  std::size_t size() const { return records_.size(); }

  /// "# schema" comment, header, one row per record.
  void write_csv(std::ostream& os) const;

 private:
  std::vector<IterateRecord> records_;
  std::vector<PolicySnapshot> snapshots_;
};

struct GradientEstimate {
  Mat grad;
  double L_est = 0.0;
  double J_est = 0.0;
  double Jc_est = 0.0;
  std::size_t resamples = 0;
};

/// Zero-order gradient estimate at p. Perturbations whose rollout diverges
/// are redrawn up to `max_resamples` times, then the DivergenceError escapes.
GradientEstimate zeroth_order_gradient(const RiskLagrangian& rl,
                                       const NoiseModel& noise, const Policy& p,
                                       double radius, const RolloutConfig& oracle,
                                       Geometry geometry, Estimator estimator,
                                       std::size_t max_resamples,
                                       std::mt19937_64& engine);

/// Uniform draw from the unit Frobenius sphere (or ball) in R^{rows x cols}.
Mat sample_perturbation(Eigen::Index rows, Eigen::Index cols, Geometry geometry,
                        std::mt19937_64& engine);

enum class RunStatus { kOk, kFailed };

struct RandomSearchResult {
  Policy policy;  // final, or last accepted iterate on failure
  IterateLog log;
  RunStatus status = RunStatus::kOk;
  std::string message;
};

/// Zeroth-order random search on L(., mu). Throws Error(kPrecondition) when
/// p0 is not stabilizing.
RandomSearchResult random_search(const RiskLagrangian& rl, const NoiseModel& noise,
                                 const Policy& p0, const RandomSearchConfig& cfg);

/// Gradient source for the search loop; may throw DivergenceError.
using GradientOracle = std::function<GradientEstimate(const Policy&, std::mt19937_64&)>;

/// The same loop with the estimator swapped out (e.g. for the exact
/// gradient). The estimator settings in cfg are ignored.
RandomSearchResult random_search_with(const RiskLagrangian& rl, const Policy& p0,
                                      const RandomSearchConfig& cfg,
                                      const GradientOracle& oracle);

struct SearchDiagnostics {
  double G_inf = 0.0;      // max ||grad estimate|| over the probe window
  double G_2 = 0.0;        // mean squared deviation from the window mean
  double beta = 0.0;       // finite-difference curvature estimate
  double eta_bound = 0.0;  // 1 / (2 beta)
  bool step_too_large = false;
};

/// Estimates the gradient-noise constants over `window` draws at p0 and a
/// curvature bound from common-random-number second differences.
SearchDiagnostics diagnose_random_search(const RiskLagrangian& rl,
                                         const NoiseModel& noise,
                                         const Policy& p0,
                                         const RandomSearchConfig& cfg,
                                         std::size_t window = 1000);

/// omega(mu) = J_c(p_star) - rho_bar; exact when `exact`, else from a rollout
/// of horizon risk_oracle.horizon.
double dual_subgradient(const RiskLagrangian& rl, const NoiseModel& noise,
                        const Policy& p_star, const RolloutConfig& risk_oracle,
                        bool exact);

struct PrimalDualResult {
  Policy policy;
  double mu = 0.0;          // multiplier that produced `policy`
  double mu_average = 0.0;  // (1/j) sum of mu_i
  IterateLog log;
  std::vector<double> omegas;
  std::vector<double> mu_averages;
  std::vector<double> steps;
  bool converged = false;
  RunStatus status = RunStatus::kOk;
  std::string message;
  // Exact-model diagnostics at (policy, mu).
  double J = 0.0;
  double Jc = 0.0;
  double dual = 0.0;
  double duality_gap = 0.0;              // |J - D(mu)| / |D(mu)|
  double complementary_slackness = 0.0;  // |mu (J_c - rho_bar)|
};

PrimalDualResult primal_dual(const Problem& problem, const PrimalDualConfig& cfg,
                             const Policy& p0);

/// Derives an independent stream seed from (seed, a, b).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace rclqr
