#include "optimize.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include "error.hpp"

namespace rclqr {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void put_double(std::ostream& os, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  os.write(buf, res.ptr - buf);
}

Error precondition(const std::string& msg) {
  return Error(ErrorCode::kPrecondition, msg);
}

void require_stabilizing_start(const LinearSystem& sys, const Policy& p) {
  const double rho = closed_loop_spectral_radius(sys, p);
  if (!(rho < 1.0)) {
    throw precondition("initial policy is not stabilizing: rho(A - BK) = " +
                       std::to_string(rho));
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination of the inputs.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

void RandomSearchConfig::validate() const {
  if (!(radius > 0.0)) throw Error(ErrorCode::kConfiguration, "radius_r must be > 0");
  if (!(step > 0.0)) throw Error(ErrorCode::kConfiguration, "step_eta must be > 0");
  if (oracle.horizon < 1) {
    throw Error(ErrorCode::kConfiguration, "oracle horizon T must be >= 1");
  }
  if (safeguard.kind == SafeguardKind::kSublevel && !(safeguard.factor > 0.0)) {
    throw Error(ErrorCode::kConfiguration, "sublevel factor must be > 0");
  }
}

double StepSchedule::at(std::size_t j) const {
  if (kind == StepKind::kConstant) return value;
  return value * std::sqrt(2.0 / static_cast<double>(j));
}

void PrimalDualConfig::validate() const {
  if (!(mu_init >= 0.0)) throw Error(ErrorCode::kConfiguration, "mu_init must be >= 0");
  if (outer_iters < 1) throw Error(ErrorCode::kConfiguration, "outer_iters must be >= 1");
  if (risk_oracle_T < 1) throw Error(ErrorCode::kConfiguration, "risk_oracle_T must be >= 1");
  if (inner == InnerMode::kRandomSearch) inner_search.validate();
}

void IterateLog::write_csv(std::ostream& os) const {
  os << "# schema: " << kIterateLogSchema << '\n';
  os << "iter,mu,L_est,J_est,Jc_est,grad_norm,eta_effective,wallclock_ms\n";
  for (const IterateRecord& r : records_) {
    os << r.iter;
    for (double v : {r.mu, r.L_est, r.J_est, r.Jc_est, r.grad_norm,
                     r.eta_effective, r.wallclock_ms}) {
      os << ',';
      put_double(os, v);
    }
    os << '\n';
  }
}

Mat sample_perturbation(Eigen::Index rows, Eigen::Index cols, Geometry geometry,
                        std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat u(rows, cols);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = normal(engine);
    norm = u.norm();
  }
  u /= norm;
  if (geometry == Geometry::kBall) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    u *= std::pow(uniform(engine), 1.0 / static_cast<double>(u.size()));
  }
  return u;
}

GradientEstimate zeroth_order_gradient(const RiskLagrangian& rl,
                                       const NoiseModel& noise, const Policy& p,
                                       double radius, const RolloutConfig& oracle,
                                       Geometry geometry, Estimator estimator,
                                       std::size_t max_resamples,
                                       std::mt19937_64& engine) {
  const Mat x = p.as_matrix();
  const double d = static_cast<double>(x.size());
  const std::size_t attempts = std::max<std::size_t>(1, max_resamples);
  RolloutConfig cfg = oracle;
  GradientEstimate est;
  for (std::size_t attempt = 0;; ++attempt) {
    const Mat u = sample_perturbation(x.rows(), x.cols(), geometry, engine);
    cfg.seed = engine();
    try {
      const OracleSample plus =
          rollout_cost(rl, noise, Policy::from_matrix(x + radius * u), cfg);
      if (estimator == Estimator::kOnePoint) {
        est.grad = (d / radius) * plus.L_hat * u;
        est.L_est = plus.L_hat;
        est.J_est = plus.J_hat;
        est.Jc_est = plus.Jc_hat;
      } else {
        // Same seed: both queries see the same noise sequence.
        const OracleSample minus =
            rollout_cost(rl, noise, Policy::from_matrix(x - radius * u), cfg);
        est.grad = (d / (2.0 * radius)) * (plus.L_hat - minus.L_hat) * u;
        est.L_est = 0.5 * (plus.L_hat + minus.L_hat);
        est.J_est = 0.5 * (plus.J_hat + minus.J_hat);
        est.Jc_est = 0.5 * (plus.Jc_hat + minus.Jc_hat);
      }
      return est;
    } catch (const DivergenceError&) {
      if (attempt + 1 >= attempts) throw;
      ++est.resamples;
    }
  }
}

RandomSearchResult random_search(const RiskLagrangian& rl, const NoiseModel& noise,
                                 const Policy& p0, const RandomSearchConfig& cfg) {
  return random_search_with(rl, p0, cfg, [&](const Policy& p, std::mt19937_64& engine) {
    return zeroth_order_gradient(rl, noise, p, cfg.radius, cfg.oracle, cfg.geometry,
                                 cfg.estimator, cfg.max_resamples, engine);
  });
}

RandomSearchResult random_search_with(const RiskLagrangian& rl, const Policy& p0,
                                      const RandomSearchConfig& cfg,
                                      const GradientOracle& oracle) {
  cfg.validate();
  const LinearSystem& sys = rl.sys();
  require_compatible(sys, p0);
  require_stabilizing_start(sys, p0);

  double sublevel_limit = 0.0;
  if (cfg.safeguard.kind == SafeguardKind::kSublevel) {
    const double l0 = evaluate(rl, p0).L_value;
    const double gap = l0 - dual_value(rl).value;
    sublevel_limit = l0 + cfg.safeguard.factor * std::max(gap, 0.0);
  }
  auto acceptable = [&](const Mat& candidate) {
    if (cfg.safeguard.kind == SafeguardKind::kNone) return true;
    const Policy p = Policy::from_matrix(candidate);
    if (!is_stabilizing(sys, p)) return false;
    if (cfg.safeguard.kind == SafeguardKind::kSublevel) {
      return evaluate(rl, p).L_value <= sublevel_limit;
    }
    return true;
  };

  RandomSearchResult result;
  std::mt19937_64 engine(cfg.seed);
  Mat x = p0.as_matrix();
  result.log.snapshot(0, p0);
  const auto start = Clock::now();

  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    GradientEstimate est;
    try {
      est = oracle(Policy::from_matrix(x), engine);
    } catch (const DivergenceError& e) {
      result.status = RunStatus::kFailed;
      result.message = "iteration " + std::to_string(i + 1) +
                       ": perturbation retries exhausted (" + e.what() + ")";
      break;
    }
    double eta = cfg.step;
    Mat next = x - eta * est.grad;
    if (!acceptable(next)) {
      std::size_t halvings = 0;
      do {
        eta *= 0.5;
        next = x - eta * est.grad;
      } while (!acceptable(next) && ++halvings < cfg.max_halvings);
      if (!acceptable(next)) {
        eta = 0.0;
        next = x;
      }
    }
    x = next;

    IterateRecord rec;
    rec.iter = i + 1;
    rec.mu = rl.mu();
    rec.L_est = est.L_est;
    rec.J_est = est.J_est;
    rec.Jc_est = est.Jc_est;
    rec.grad_norm = est.grad.norm();
    rec.eta_effective = eta;
    rec.wallclock_ms = cfg.record_wallclock ? elapsed_ms(start) : 0.0;
    result.log.append(rec);
    if ((cfg.snapshot_every > 0 && rec.iter % cfg.snapshot_every == 0) ||
        rec.iter == cfg.iterations) {
      result.log.snapshot(rec.iter, Policy::from_matrix(x));
    }
  }
  result.policy = Policy::from_matrix(x);
  return result;
}

SearchDiagnostics diagnose_random_search(const RiskLagrangian& rl,
                                         const NoiseModel& noise,
                                         const Policy& p0,
                                         const RandomSearchConfig& cfg,
                                         std::size_t window) {
  cfg.validate();
  require_stabilizing_start(rl.sys(), p0);
  std::mt19937_64 engine(derive_seed(cfg.seed, 0xd1a9));
  SearchDiagnostics out;

  std::vector<Mat> grads;
  grads.reserve(window);
  for (std::size_t i = 0; i < window; ++i) {
    grads.push_back(zeroth_order_gradient(rl, noise, p0, cfg.radius, cfg.oracle,
                                          cfg.geometry, cfg.estimator,
                                          cfg.max_resamples, engine)
                        .grad);
    out.G_inf = std::max(out.G_inf, grads.back().norm());
  }
  Mat mean = Mat::Zero(p0.m(), p0.n() + 1);
  for (const Mat& g : grads) mean += g;
  mean /= static_cast<double>(grads.size());
  for (const Mat& g : grads) out.G_2 += (g - mean).squaredNorm();
  out.G_2 /= static_cast<double>(grads.size());

  // Second differences with common random numbers along random directions.
  const Mat x = p0.as_matrix();
  const double h = cfg.radius;
  RolloutConfig oc = cfg.oracle;
  for (int k = 0; k < 20; ++k) {
    const Mat dir = sample_perturbation(x.rows(), x.cols(), Geometry::kSphere, engine);
    oc.seed = engine();
    try {
      const double lp = rollout_cost(rl, noise, Policy::from_matrix(x + h * dir), oc).L_hat;
      const double l0 = rollout_cost(rl, noise, p0, oc).L_hat;
      const double lm = rollout_cost(rl, noise, Policy::from_matrix(x - h * dir), oc).L_hat;
      out.beta = std::max(out.beta, std::abs(lp - 2.0 * l0 + lm) / (h * h));
    } catch (const DivergenceError&) {
    }
  }
  out.eta_bound = out.beta > 0.0 ? 1.0 / (2.0 * out.beta) : 0.0;
  out.step_too_large = out.beta > 0.0 && cfg.step > out.eta_bound;
  return out;
}

double dual_subgradient(const RiskLagrangian& rl, const NoiseModel& noise,
                        const Policy& p_star, const RolloutConfig& risk_oracle,
                        bool exact) {
  if (exact) return evaluate(rl, p_star).Jc_value - rl.rho_bar();
  return rollout_cost(rl, noise, p_star, risk_oracle).Jc_hat - rl.rho_bar();
}

PrimalDualResult primal_dual(const Problem& problem, const PrimalDualConfig& cfg,
                             const Policy& p0) {
  cfg.validate();
  require_compatible(problem.sys, p0);
  require_stabilizing_start(problem.sys, p0);

  const bool exact = cfg.inner == InnerMode::kExact;
  const double rho_bar = problem.risk.rho_bar;
  const double stop_tol = cfg.tolerance * std::max(1.0, std::abs(rho_bar));
  StepSchedule schedule = cfg.schedule;

  PrimalDualResult result;
  Policy x = p0;
  double mu = cfg.mu_init;
  double mu_sum = 0.0;
  const auto start = Clock::now();

  for (std::size_t j = 1; j <= cfg.outer_iters; ++j) {
    const RiskLagrangian rl(problem.sys, problem.noise.stats(), problem.risk, mu);

    IterateRecord rec;
    rec.iter = j;
    rec.mu = mu;
    double omega = 0.0;
    if (exact) {
      x = stationary_point(rl);
      const PolicyEvaluation ev = evaluate(rl, x);
      omega = ev.Jc_value - rho_bar;
      rec.L_est = ev.L_value;
      rec.J_est = ev.J_value;
      rec.Jc_est = ev.Jc_value;
    } else {
      RandomSearchConfig inner = cfg.inner_search;
      inner.seed = derive_seed(cfg.seed, j, 1);
      inner.record_wallclock = false;
      const Policy& start_policy = cfg.warm_start ? x : p0;
      RandomSearchResult rs = random_search(rl, problem.noise, start_policy, inner);
      if (rs.status != RunStatus::kOk || !is_stabilizing(problem.sys, rs.policy)) {
        result.status = RunStatus::kFailed;
        result.message = "outer iteration " + std::to_string(j) +
                         ": inner random search failed" +
                         (rs.message.empty() ? std::string(" (unstable iterate)")
                                             : ": " + rs.message);
        break;
      }
      x = rs.policy;
      RolloutConfig risk = cfg.inner_search.oracle;
      risk.horizon = cfg.risk_oracle_T;
      risk.seed = derive_seed(cfg.seed, j, 2);
      OracleSample s;
      try {
        s = rollout_cost(rl, problem.noise, x, risk);
      } catch (const DivergenceError& e) {
        result.status = RunStatus::kFailed;
        result.message = "outer iteration " + std::to_string(j) +
                         ": risk oracle diverged (" + e.what() + ")";
        break;
      }
      omega = s.Jc_hat - rho_bar;
      rec.L_est = s.L_hat;
      rec.J_est = s.J_hat;
      rec.Jc_est = s.Jc_hat;
    }

    if (j == 1 && !(schedule.value > 0.0)) {
      // Auto-calibrate so the first step moves mu by about 0.1 rho_bar.
      const double xi1 = omega != 0.0 ? 0.1 * std::abs(rho_bar) / std::abs(omega) : 1.0;
      schedule.value = schedule.kind == StepKind::kDiminishing ? xi1 / std::sqrt(2.0) : xi1;
    }
    const double xi = schedule.at(j);

    mu_sum += mu;
    result.policy = x;
    result.mu = mu;
    result.mu_average = mu_sum / static_cast<double>(j);
    result.omegas.push_back(omega);
    result.mu_averages.push_back(result.mu_average);
    result.steps.push_back(xi);
    rec.grad_norm = std::abs(omega);
    rec.eta_effective = xi;
    rec.wallclock_ms = cfg.record_wallclock ? elapsed_ms(start) : 0.0;
    result.log.append(rec);
    result.log.snapshot(j, x);

    if (exact && omega <= stop_tol && mu * std::abs(omega) <= stop_tol) {
      result.converged = true;
      break;
    }
    const double next = std::max(0.0, mu + xi * omega);
    if (!(next <= cfg.mu_max)) {
      result.status = RunStatus::kFailed;
      result.message = "multiplier exceeded guard " + std::to_string(cfg.mu_max) +
                       " at outer iteration " + std::to_string(j) +
                       " (risk constraint may be infeasible)";
      break;
    }
    mu = next;
  }

  if (result.log.size() == 0) {
    result.policy = p0;
    result.mu = cfg.mu_init;
  }
  if (is_stabilizing(problem.sys, result.policy)) {
    const RiskLagrangian rl(problem.sys, problem.noise.stats(), problem.risk,
                            result.mu);
    const PolicyEvaluation ev = evaluate(rl, result.policy);
    result.J = ev.J_value;
    result.Jc = ev.Jc_value;
    result.dual = dual_value(rl).value;
    result.duality_gap = std::abs(result.J - result.dual) /
                         std::max(std::abs(result.dual), 1e-300);
    result.complementary_slackness = std::abs(result.mu * (result.Jc - rho_bar));
  }
  return result;
}

}  // namespace rclqr
