#pragma once

#include <vector>

#include "linalg.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "problem.hpp"

namespace rclqr {

/// The multiplier-weighted problem: stage cost
///   c_mu(x, u) = x^T Qmu x + 2 x^T S + u^T R u - mu * rho_bar
/// with Qmu = Q + 4 mu Q W Q and S = 2 mu Q M3.
class RiskLagrangian {
 public:
  RiskLagrangian(LinearSystem sys, NoiseStats stats, RiskSpec spec, double mu);
  static RiskLagrangian from_problem(const Problem& problem, double mu);

  RiskLagrangian with_mu(double mu) const;

  const LinearSystem& sys() const { return sys_; }
  const NoiseStats& stats() const { return stats_; }
  const RiskSpec& spec() const { return spec_; }
  double mu() const { return mu_; }
  double rho_bar() const { return spec_.rho_bar; }
  const Mat& Qmu() const { return qmu_; }
  const Vec& S() const { return s_; }
  const Mat& QWQ() const { return qwq_; }
  const Vec& QM3() const { return qm3_; }

 private:
  LinearSystem sys_;
  NoiseStats stats_;
  RiskSpec spec_;
  double mu_;
  Mat qmu_;
  Vec s_;
  Mat qwq_;
  Vec qm3_;
};

/// Closed-form quantities of one stabilizing policy.
struct PolicyEvaluation {
  Mat P;      // P = Qmu + K^T R K + Acl^T P Acl
  Mat Sigma;  // Sigma = W + Acl Sigma Acl^T
  Vec xbar;   // stationary mean
  Vec g;      // linear coefficient of the relative value function
  Mat E;      // (R + B^T P B) K - B^T P A
  Vec G;      // (R + B^T P B) l + B^T P wbar + B^T g / 2
  Mat Phi;    // [[Sigma + xbar xbar^T, -xbar], [-xbar^T, 1]]
  Mat V;      // (I - Acl)^{-1}
  Mat H;      // R + B^T P B
  double L_value = 0.0;
  double L_stationary = 0.0;  // same quantity via stationary moments
  double J_value = 0.0;
  double Jc_value = 0.0;
  Mat grad;  // m x (n+1)
};

/// Throws Error(kInstability) when p does not stabilize the plant.
PolicyEvaluation evaluate(const RiskLagrangian& rl, const Policy& p);

Mat gradient(const RiskLagrangian& rl, const Policy& p);

/// The unique zero of the gradient, from the Riccati solution at Qmu.
Policy stationary_point(const RiskLagrangian& rl);

struct DualValue {
  double value;
  Policy argmin;
};

/// D(mu) = L(X*(mu), mu).
DualValue dual_value(const RiskLagrangian& rl);

struct DualOptimum {
  double mu = 0.0;     // maximizer of D (mu_cap when D keeps increasing)
  double value = 0.0;  // D(mu)
  bool bounded = true; // false when Jc(X*(mu)) > rho_bar up to mu_cap
};

/// Maximizes the concave dual function by bisection on its derivative
/// Jc(X*(mu)) - rho_bar.
DualOptimum maximize_dual(const Problem& problem, double mu_cap = 1e9);

/// x^T P x + g^T x (additive constant fixed to zero).
double value_function(const RiskLagrangian& rl, const Policy& p, const Vec& x);

/// V(x) - [c_mu(x, u) - L + E_w V(x+)], expectation in closed form.
double bellman_residual(const RiskLagrangian& rl, const Policy& p, const Vec& x);

/// Advantage of acting with `probe` for one step from x, then following
/// `base`.
double advantage(const RiskLagrangian& rl, const Policy& base,
                 const Policy& probe, const Vec& x);

/// Stationary average of advantage(rl, base, probe, x) under the state
/// distribution induced by `probe`.
double average_advantage(const RiskLagrangian& rl, const Policy& base,
                         const Policy& probe);

/// -tr(Phi_probe [E G]^T (R + B^T P B)^{-1} [E G]) for the base policy.
double advantage_lower_bound(const RiskLagrangian& rl, const Policy& base,
                             const Policy& probe);

struct GradientDominanceReport {
  double lambda = 0.0;      // ||Phi*||_2 / (4 sigma_min(R) phi^2)
  double phi_min = 0.0;     // min over policies of sigma_min(Phi)
  double phi_star_norm = 0.0;
  double worst_ratio = 0.0; // max of (L - D) / (lambda ||grad||_F^2)
  bool holds = true;
};

/// Local gradient-dominance constant over `policies` and a check of
/// L(X) - D(mu) <= lambda ||grad L(X)||_F^2 for each of them.
GradientDominanceReport gradient_dominance_certificate(
    const RiskLagrangian& rl, const std::vector<Policy>& policies);

}  // namespace rclqr
