#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"
#include "linalg.hpp"

namespace rclqr {

namespace {

CheckResult bound_check(std::string name, double measured, double tolerance) {
  CheckResult r;
  r.name = std::move(name);
  r.measured = measured;
  r.tolerance = tolerance;
  r.passed = std::isfinite(measured) && measured <= tolerance;
  return r;
}

std::string mu_tag(double mu) {
  std::ostringstream os;
  os << "[mu=" << mu << "]";
  return os.str();
}

double stage_cost(const RiskLagrangian& rl, const Vec& x, const Vec& u) {
  return x.dot(rl.Qmu() * x) + 2.0 * x.dot(rl.S()) + u.dot(rl.sys().R * u) -
         rl.mu() * rl.rho_bar();
}

// Perturbations of `center` that stay stabilizing and inside the sublevel
// set {L <= level}.
std::vector<Policy> sample_sublevel_policies(const RiskLagrangian& rl, const Policy& center,
                                             double level, std::size_t count,
                                             std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Mat c = center.as_matrix();
  std::vector<Policy> out;
  std::size_t tries = 0;
  while (out.size() < count && tries < 100000) {
    ++tries;
    Mat dir(c.rows(), c.cols());
    for (Eigen::Index k = 0; k < dir.size(); ++k) dir.data()[k] = normal(engine);
    dir /= dir.norm();
    // Radius spread over several scales so the sample covers the set.
    const double radius = std::pow(10.0, -2.0 + 2.5 * uniform(engine));
    const Policy p = Policy::from_matrix(c + radius * dir);
    if (!is_stabilizing(rl.sys(), p, 1e-3)) continue;
    if (evaluate(rl, p).L_value > level) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace

Mat lyapunov_series(const Mat& Acl, const Mat& W, std::size_t max_terms) {
  Mat sum = W;
  Mat term = W;
  for (std::size_t k = 1; k < max_terms; ++k) {
    term = Acl * term * Acl.transpose();
    sum += term;
    if (term.norm() <= 1e-18 * sum.norm()) return symmetrize(sum);
  }
  throw NonConvergenceError("lyapunov_series: terms did not decay", max_terms);
}

Mat finite_difference_gradient(const RiskLagrangian& rl, const Policy& p, double h) {
  const Mat x = p.as_matrix();
  Mat grad(x.rows(), x.cols());
  auto L = [&](const Mat& y) { return evaluate(rl, Policy::from_matrix(y)).L_value; };
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      double step = h * std::max(1.0, std::abs(x(i, j)));
      for (int attempt = 0;; ++attempt) {
        Mat e = Mat::Zero(x.rows(), x.cols());
        e(i, j) = step;
        try {
          grad(i, j) = (-L(x + 2 * e) + 8 * L(x + e) - 8 * L(x - e) + L(x - 2 * e)) /
                       (12.0 * step);
          break;
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kInstability || attempt == 4) throw;
          step /= 10.0;
        }
      }
    }
  }
  return grad;
}

double entrywise_relative_error(const Mat& a, const Mat& b, double floor) {
  const double scale = floor * b.norm();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double denom = std::max(std::abs(b.data()[k]), scale);
    const double diff = std::abs(a.data()[k] - b.data()[k]);
    worst = std::max(worst, denom > 0.0 ? diff / denom : diff);
  }
  return worst;
}

std::vector<Policy> sample_stabilizing_policies(const LinearSystem& sys,
                                                const Policy& center, std::size_t count,
                                                double scale, std::mt19937_64& engine,
                                                double max_radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Mat c = center.as_matrix();
  std::vector<Policy> out;
  while (out.size() < count) {
    Mat d(c.rows(), c.cols());
    for (Eigen::Index k = 0; k < d.size(); ++k) d.data()[k] = scale * normal(engine);
    for (int shrink = 0; shrink < 60; ++shrink) {
      const Policy p = Policy::from_matrix(c + d);
      if (closed_loop_spectral_radius(sys, p) <= max_radius) {
        out.push_back(p);
        break;
      }
      d *= 0.5;
    }
  }
  return out;
}

std::vector<CheckResult> run_checks(const Problem& problem, const CheckOptions& options) {
  std::vector<CheckResult> results;
  std::mt19937_64 engine(options.seed);
  const LinearSystem& sys = problem.sys;
  const NoiseStats& stats = problem.noise.stats();
  const Policy& p0 = problem.initial;

  std::vector<double> mus{0.0};
  if (options.mu != 0.0) mus.push_back(options.mu);

  // Lyapunov solver against the truncated series.
  {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat F(sys.n(), sys.n());
    for (Eigen::Index k = 0; k < F.size(); ++k) F.data()[k] = normal(engine);
    const Mat W_pd = F * F.transpose() + Mat::Identity(sys.n(), sys.n());
    double worst = 0.0;
    std::vector<Policy> policies = sample_stabilizing_policies(sys, p0, 20, 0.2, engine, 0.99);
    policies.push_back(p0);
    for (const Policy& p : policies) {
      const Mat acl = closed_loop(sys, p);
      for (const Mat* W : {&stats.W, &W_pd}) {
        const Mat series = lyapunov_series(acl, *W);
        const Mat sigma = solve_discrete_lyapunov(acl, *W);
        worst = std::max(worst, (sigma - series).norm() / series.norm());
      }
    }
    results.push_back(bound_check("lyapunov solver vs truncated series", worst, 1e-8));
  }

  for (double mu : mus) {
    const RiskLagrangian rl = RiskLagrangian::from_problem(problem, mu);
    const std::string tag = mu_tag(mu);

    // Riccati solution.
    const Mat P = solve_dare(sys.A, sys.B, rl.Qmu(), sys.R);
    results.push_back(bound_check("riccati relative residual " + tag,
                                  dare_relative_residual(sys.A, sys.B, rl.Qmu(), sys.R, P),
                                  1e-9));
    const Policy star = stationary_point(rl);
    {
      CheckResult r = bound_check("riccati gain is stabilizing " + tag,
                                  closed_loop_spectral_radius(sys, star), 1.0);
      r.passed = r.measured < 1.0;
      results.push_back(r);
    }

    const PolicyEvaluation ev0 = evaluate(rl, p0);
    const PolicyEvaluation ev_star = evaluate(rl, star);

    // Gradient against finite differences.
    {
      std::vector<Policy> policies = sample_stabilizing_policies(sys, p0, 10, 0.1, engine, 0.98);
      const std::vector<Policy> near = sample_stabilizing_policies(sys, star, 10, 0.1, engine, 0.98);
      policies.insert(policies.end(), near.begin(), near.end());
      double worst = 0.0;
      for (const Policy& p : policies) {
        worst = std::max(worst, entrywise_relative_error(gradient(rl, p),
                                                         finite_difference_gradient(rl, p)));
      }
      results.push_back(bound_check("gradient vs finite differences " + tag, worst, 1e-5));
    }

    // Two closed forms of L and the objective/constraint split.
    {
      double worst_forms = 0.0;
      double worst_split = 0.0;
      for (const Policy& p : sample_stabilizing_policies(sys, p0, 20, 0.2, engine, 0.99)) {
        const PolicyEvaluation ev = evaluate(rl, p);
        const double scale = std::max(1.0, std::abs(ev.L_value));
        worst_forms = std::max(worst_forms, std::abs(ev.L_value - ev.L_stationary) / scale);
        const double split = ev.J_value + mu * (ev.Jc_value - rl.rho_bar());
        worst_split = std::max(worst_split, std::abs(ev.L_value - split) / scale);
      }
      results.push_back(bound_check("lagrangian closed forms agree " + tag, worst_forms, 1e-9));
      results.push_back(bound_check("lagrangian = J + mu (Jc - rho_bar) " + tag, worst_split, 1e-9));
    }

    // Bellman equation of the relative value function.
    {
      std::normal_distribution<double> normal(0.0, 1.0);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        Vec x(sys.n());
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = 10.0 * normal(engine);
        x += ev0.xbar;
        const double scale = std::abs(value_function(rl, p0, x)) + std::abs(ev0.L_value) +
                             std::abs(stage_cost(rl, x, apply(p0, x)));
        worst = std::max(worst, std::abs(bellman_residual(rl, p0, x)) / scale);
      }
      results.push_back(bound_check("bellman residual at 100 states " + tag, worst, 1e-8));
    }

    // Cost difference through the advantage function.
    {
      const std::vector<Policy> bases = sample_stabilizing_policies(sys, p0, 50, 0.2, engine, 0.99);
      const std::vector<Policy> probes = sample_stabilizing_policies(sys, star, 50, 0.2, engine, 0.99);
      double worst = 0.0;
      double worst_bound = -1e300;
      for (std::size_t k = 0; k < bases.size(); ++k) {
        const double diff = evaluate(rl, probes[k]).L_value - evaluate(rl, bases[k]).L_value;
        const double avg = average_advantage(rl, bases[k], probes[k]);
        worst = std::max(worst, std::abs(avg - diff) / std::abs(diff));
        const double lb = advantage_lower_bound(rl, bases[k], probes[k]);
        worst_bound = std::max(worst_bound, (lb - avg) / std::max(1.0, std::abs(avg)));
      }
      results.push_back(bound_check("advantage cost-difference identity " + tag, worst, 1e-7));
      results.push_back(bound_check("advantage lower bound " + tag, worst_bound, 1e-9));
    }

    // Stationary point: zero gradient and locally minimal.
    {
      const double ratio = ev_star.grad.norm() / std::max(1.0, std::abs(ev_star.L_value));
      results.push_back(bound_check("stationary gradient norm " + tag, ratio, 1e-7));
      double worst = -1e300;
      for (const Policy& p : sample_stabilizing_policies(sys, star, 100, 0.05, engine, 0.999)) {
        worst = std::max(worst, (ev_star.L_value - evaluate(rl, p).L_value) /
                                    std::max(1.0, std::abs(ev_star.L_value)));
      }
      results.push_back(bound_check("stationary point below 100 perturbations " + tag,
                                    worst, 1e-12));
    }

    // Local gradient dominance on the sublevel set of the initial policy.
    {
      const std::vector<Policy> policies =
          sample_sublevel_policies(rl, star, ev0.L_value, 50, engine);
      GradientDominanceReport rep = gradient_dominance_certificate(rl, policies);
      CheckResult r = bound_check("gradient dominance on 50 sublevel policies " + tag,
                                  rep.worst_ratio, 1.0);
      r.passed = rep.holds && policies.size() == 50;
      std::ostringstream os;
      os << "lambda=" << rep.lambda << " phi_min=" << rep.phi_min
         << " policies=" << policies.size();
      r.detail = os.str();
      results.push_back(r);
    }

    // Coercivity: along rays towards the stability boundary, L is
    // non-decreasing once rho(A - BK) > 1 - 1e-3.
    {
      std::normal_distribution<double> normal(0.0, 1.0);
      const Mat c = star.as_matrix();
      double worst_drop = 0.0;
      std::size_t probed = 0;
      for (int k = 0; k < 10; ++k) {
        Mat dir(c.rows(), c.cols());
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir.data()[i] = normal(engine);
        dir /= dir.norm();
        auto radius_at = [&](double t) {
          return closed_loop_spectral_radius(sys, Policy::from_matrix(c + t * dir));
        };
        double hi = 1.0;
        while (radius_at(hi) < 1.0 && hi < 1e6) hi *= 2.0;
        if (radius_at(hi) < 1.0) continue;
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
          const double mid = 0.5 * (lo + hi);
          (radius_at(mid) < 1.0 ? lo : hi) = mid;
        }
        double prev = -1e300;
        for (int e = 10; e <= 80; ++e) {
          const double t = lo * (1.0 - std::pow(10.0, -e / 10.0));
          if (radius_at(t) <= 1.0 - 1e-3) continue;
          const double value = evaluate(rl, Policy::from_matrix(c + t * dir)).L_value;
          if (prev > -1e300) worst_drop = std::max(worst_drop, (prev - value) / std::abs(prev));
          prev = value;
          ++probed;
        }
      }
      CheckResult r = bound_check("lagrangian non-decreasing near the stability boundary " + tag,
                                  worst_drop, 1e-12);
      r.passed = r.passed && probed > 0;
      r.detail = "points=" + std::to_string(probed);
      results.push_back(r);
    }
  }

  // Constraint value along the multiplier grid, and concavity of D.
  {
    double worst_increase = 0.0;
    double worst_convexity = 0.0;
    double prev_jc = 0.0;
    std::vector<double> dvals;
    for (int k = 0; k <= 20; ++k) {
      const double mu = 0.5 * k;
      const RiskLagrangian rl = RiskLagrangian::from_problem(problem, mu);
      const DualValue d = dual_value(rl);
      const double jc = evaluate(rl, d.argmin).Jc_value;
      if (k > 0) worst_increase = std::max(worst_increase, (jc - prev_jc) / std::abs(prev_jc));
      prev_jc = jc;
      dvals.push_back(d.value);
    }
    for (std::size_t k = 1; k + 1 < dvals.size(); ++k) {
      const double second = dvals[k - 1] - 2.0 * dvals[k] + dvals[k + 1];
      worst_convexity = std::max(worst_convexity, second / std::max(1.0, std::abs(dvals[k])));
    }
    results.push_back(bound_check("Jc(X*(mu)) non-increasing on mu grid 0:0.5:10",
                                  worst_increase, 1e-9));
    results.push_back(bound_check("dual function concave on mu grid 0:0.5:10",
                                  worst_convexity, 1e-9));
  }

  // Slater condition: informational, since it is a property of the data.
  {
    const RiskLagrangian rl = RiskLagrangian::from_problem(problem, 1e4);
    const double floor = evaluate(rl, stationary_point(rl)).Jc_value;
    CheckResult r;
    r.name = "slater: min Jc over multipliers (mu=1e4) below rho_bar";
    r.measured = floor;
    r.tolerance = problem.risk.rho_bar;
    r.passed = floor < problem.risk.rho_bar;
    r.informational = true;
    r.detail = r.passed ? "risk constraint strictly feasible"
                        : "risk constraint appears infeasible; duality checks will not hold";
    results.push_back(r);
  }
  return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& r) { return r.passed || r.informational; });
}

}  // namespace rclqr
