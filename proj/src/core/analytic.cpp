#include "analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace rclqr {

RiskLagrangian::RiskLagrangian(LinearSystem sys, NoiseStats stats,
                               RiskSpec spec, double mu)
    : sys_(std::move(sys)),
      stats_(std::move(stats)),
      spec_(spec),
      mu_(mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw Error(ErrorCode::kPrecondition,
                "multiplier must be finite and non-negative");
  }
  qwq_ = symmetrize(sys_.Q * stats_.W * sys_.Q);
  qm3_ = sys_.Q * stats_.M3;
  qmu_ = symmetrize(sys_.Q + 4.0 * mu_ * qwq_);
  s_ = 2.0 * mu_ * qm3_;
}

RiskLagrangian RiskLagrangian::from_problem(const Problem& problem, double mu) {
  return RiskLagrangian(problem.sys, problem.noise.stats(), problem.risk, mu);
}

RiskLagrangian RiskLagrangian::with_mu(double mu) const {
  return RiskLagrangian(sys_, stats_, spec_, mu);
}

PolicyEvaluation evaluate(const RiskLagrangian& rl, const Policy& p) {
  const LinearSystem& sys = rl.sys();
  const NoiseStats& ns = rl.stats();
  const Mat acl = closed_loop(sys, p);
  const double rho = spectral_radius(acl);
  if (rho >= 1.0) {
    throw Error(ErrorCode::kInstability,
                "policy is not stabilizing (spectral radius of A - BK = " +
                    std::to_string(rho) + "); the Lagrangian is infinite");
  }
  const auto n = sys.n();
  const Mat& K = p.K;
  const Vec& l = p.l;
  const Mat rk = sys.R * K;

  PolicyEvaluation ev;
  const Mat qk = symmetrize(rl.Qmu() + K.transpose() * rk);
  ev.P = solve_discrete_lyapunov(acl.transpose(), qk);
  ev.Sigma = solve_discrete_lyapunov(acl, ns.W);
  ev.V = (Mat::Identity(n, n) - acl).partialPivLu().inverse();

  const Vec bl = sys.B * l + ns.wbar;
  ev.xbar = ev.V * bl;
  const Mat btp = sys.B.transpose() * ev.P;
  ev.H = symmetrize(sys.R + btp * sys.B);
  ev.E = ev.H * K - btp * sys.A;
  ev.g = 2.0 * ev.V.transpose() *
         (-ev.E.transpose() * l + rl.S() + acl.transpose() * (ev.P * ns.wbar));
  ev.G = ev.H * l + btp * ns.wbar + 0.5 * sys.B.transpose() * ev.g;

  const Mat second = ev.Sigma + ev.xbar * ev.xbar.transpose();
  ev.Phi.resize(n + 1, n + 1);
  ev.Phi.topLeftCorner(n, n) = second;
  ev.Phi.topRightCorner(n, 1) = -ev.xbar;
  ev.Phi.bottomLeftCorner(1, n) = -ev.xbar.transpose();
  ev.Phi(n, n) = 1.0;

  Mat eg(sys.m(), n + 1);
  eg << ev.E, ev.G;
  ev.grad = 2.0 * eg * ev.Phi;

  const double mu_rho = rl.mu() * rl.rho_bar();
  const double lrl = l.dot(sys.R * l);
  ev.L_value = (ev.P * (ns.W + bl * bl.transpose())).trace() + ev.g.dot(bl) +
               lrl - mu_rho;
  ev.L_stationary = (qk * second).trace() +
                    (2.0 * rl.S() - 2.0 * rk.transpose() * l).dot(ev.xbar) +
                    lrl - mu_rho;
  ev.J_value = ((sys.Q + K.transpose() * rk) * second).trace() -
               2.0 * l.dot(rk * ev.xbar) + lrl;
  ev.Jc_value = 4.0 * (rl.QWQ() * second).trace() + 4.0 * ev.xbar.dot(rl.QM3());
  return ev;
}

Mat gradient(const RiskLagrangian& rl, const Policy& p) {
  return evaluate(rl, p).grad;
}

Policy stationary_point(const RiskLagrangian& rl) {
  const LinearSystem& sys = rl.sys();
  const auto n = sys.n();
  const Mat P = solve_dare(sys.A, sys.B, rl.Qmu(), sys.R);
  const Mat h = sys.R + sys.B.transpose() * P * sys.B;
  const auto h_llt = h.llt();
  Policy out;
  out.K = h_llt.solve(sys.B.transpose() * P * sys.A);
  const Mat v = (Mat::Identity(n, n) - (sys.A - sys.B * out.K)).partialPivLu().inverse();
  out.l = -h_llt.solve(sys.B.transpose() * v.transpose() *
                       (P * rl.stats().wbar + rl.S()));
  return out;
}

DualValue dual_value(const RiskLagrangian& rl) {
  Policy star = stationary_point(rl);
  const double value = evaluate(rl, star).L_value;
  return DualValue{value, std::move(star)};
}

DualOptimum maximize_dual(const Problem& problem, double mu_cap) {
  const RiskLagrangian base = RiskLagrangian::from_problem(problem, 0.0);
  auto slope = [&](double mu) {
    const RiskLagrangian rl = base.with_mu(mu);
    return evaluate(rl, stationary_point(rl)).Jc_value - rl.rho_bar();
  };
  DualOptimum out;
  if (slope(0.0) <= 0.0) {
    out.value = dual_value(base).value;
    return out;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (slope(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > mu_cap) {
      out.mu = mu_cap;
      out.value = dual_value(base.with_mu(mu_cap)).value;
      out.bounded = false;
      return out;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  out.mu = 0.5 * (lo + hi);
  out.value = dual_value(base.with_mu(out.mu)).value;
  return out;
}

double value_function(const RiskLagrangian& rl, const Policy& p, const Vec& x) {
  const PolicyEvaluation ev = evaluate(rl, p);
  return x.dot(ev.P * x) + ev.g.dot(x);
}

double bellman_residual(const RiskLagrangian& rl, const Policy& p, const Vec& x) {
  const PolicyEvaluation ev = evaluate(rl, p);
  const LinearSystem& sys = rl.sys();
  const Vec u = apply(p, x);
  const double stage = x.dot(rl.Qmu() * x) + 2.0 * x.dot(rl.S()) +
                       u.dot(sys.R * u) - rl.mu() * rl.rho_bar();
  const Vec next_mean = sys.A * x + sys.B * u + rl.stats().wbar;
  const double expected_next = next_mean.dot(ev.P * next_mean) +
                               (ev.P * rl.stats().W).trace() +
                               ev.g.dot(next_mean);
  const double lhs = x.dot(ev.P * x) + ev.g.dot(x);
  return lhs - (stage - ev.L_value + expected_next);
}

namespace {

// Advantage as x^T M x + a^T x + c.
struct QuadraticForm {
  Mat M;
  Vec a;
  double c;
};

QuadraticForm advantage_form(const PolicyEvaluation& base_ev, const Policy& base,
                             const Policy& probe) {
  const Mat dk = probe.K - base.K;
  const Vec dl = probe.l - base.l;
  const Mat& E = base_ev.E;
  const Vec& G = base_ev.G;
  const Mat& H = base_ev.H;
  QuadraticForm q;
  q.M = symmetrize(dk.transpose() * E + E.transpose() * dk +
                   dk.transpose() * H * dk);
  q.a = -2.0 * (dk.transpose() * G + dk.transpose() * (H * dl) + E.transpose() * dl);
  q.c = 2.0 * dl.dot(G) + dl.dot(H * dl);
  return q;
}

}  // namespace

double advantage(const RiskLagrangian& rl, const Policy& base,
                 const Policy& probe, const Vec& x) {
  require_compatible(rl.sys(), probe);
  const PolicyEvaluation ev = evaluate(rl, base);
  const QuadraticForm q = advantage_form(ev, base, probe);
  return x.dot(q.M * x) + q.a.dot(x) + q.c;
}

double average_advantage(const RiskLagrangian& rl, const Policy& base,
                         const Policy& probe) {
  const PolicyEvaluation ev = evaluate(rl, base);
  const PolicyEvaluation probe_ev = evaluate(rl, probe);
  const QuadraticForm q = advantage_form(ev, base, probe);
  const Mat second = probe_ev.Sigma + probe_ev.xbar * probe_ev.xbar.transpose();
  return (q.M * second).trace() + q.a.dot(probe_ev.xbar) + q.c;
}

double advantage_lower_bound(const RiskLagrangian& rl, const Policy& base,
                             const Policy& probe) {
  const PolicyEvaluation ev = evaluate(rl, base);
  const PolicyEvaluation probe_ev = evaluate(rl, probe);
  Mat eg(ev.E.rows(), ev.E.cols() + 1);
  eg << ev.E, ev.G;
  const Mat inner = eg.transpose() * ev.H.llt().solve(eg);
  return -(probe_ev.Phi * inner).trace();
}

GradientDominanceReport gradient_dominance_certificate(
    const RiskLagrangian& rl, const std::vector<Policy>& policies) {
  if (policies.empty()) {
    throw Error(ErrorCode::kConfiguration,
                "gradient_dominance_certificate: empty policy list");
  }
  const DualValue dual = dual_value(rl);
  const PolicyEvaluation star = evaluate(rl, dual.argmin);

  GradientDominanceReport report;
  report.phi_star_norm = max_eigenvalue_symmetric(star.Phi);
  const double sigma_r = min_eigenvalue_symmetric(rl.sys().R);

  std::vector<PolicyEvaluation> evals;
  evals.reserve(policies.size());
  double phi_min = std::numeric_limits<double>::infinity();
  for (const Policy& p : policies) {
    evals.push_back(evaluate(rl, p));
    phi_min = std::min(phi_min, min_eigenvalue_symmetric(evals.back().Phi));
  }
  report.phi_min = phi_min;
  report.lambda = report.phi_star_norm / (4.0 * sigma_r * phi_min * phi_min);

  const double slack = 1e-9 * std::max(1.0, std::abs(dual.value));
  for (const PolicyEvaluation& ev : evals) {
    const double gap = ev.L_value - dual.value;
    const double bound = report.lambda * ev.grad.squaredNorm();
    if (gap > bound + slack) report.holds = false;
    if (bound > 0.0) report.worst_ratio = std::max(report.worst_ratio, gap / bound);
  }
  return report;
}

}  // namespace rclqr
