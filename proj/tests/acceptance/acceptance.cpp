// Acceptance run: one PASS/FAIL line per criterion, INFO lines for context.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "error.hpp"
#include "optimize.hpp"
#include "oracle.hpp"
#include "oracles.hpp"
#include "problem.hpp"
#include "verify.hpp"

using namespace rclqr;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

int failures = 0;

void verdict(int id, bool pass, const std::string& text) {
  if (!pass) ++failures;
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, text.c_str());
  std::fflush(stdout);
}

void info(const std::string& text) {
  std::printf("INFO   %s\n", text.c_str());
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::vector<std::uint64_t> seeds20() {
  std::vector<std::uint64_t> s;
  for (std::uint64_t k = 1; k <= 20; ++k) s.push_back(k);
  return s;
}

Problem with_rho_bar(Problem pr, double rho_bar) {
  pr.risk = RiskSpec::from_rho_bar(rho_bar, pr.noise.stats(), pr.sys.Q);
  return pr;
}

// ---- 1: exact solve on the benchmark ----

struct ExactOutcome {
  PrimalDualResult res;
  double secs = 0.0;
};

ExactOutcome exact_solve(const Problem& pr) {
  const auto t0 = Clock::now();
  ExactOutcome o{primal_dual(pr, PrimalDualConfig{}, pr.initial), 0.0};
  o.secs = seconds_since(t0);
  return o;
}

bool exact_ok(const Problem& pr, const ExactOutcome& o) {
  return o.res.duality_gap <= 1e-6 &&
         o.res.complementary_slackness <= 1e-6 * std::max(1.0, pr.risk.rho_bar) &&
         o.secs <= 5.0;
}

std::string describe_exact(const Problem& pr, const ExactOutcome& o) {
  return fmt("rho_bar=%g mu=%.6g J=%.6g Jc=%.6g gap=%.3g (tol 1e-6) cs=%.3g (tol %.3g) "
             "outer=%zu %.2fs (limit 5s)%s%s",
             pr.risk.rho_bar, o.res.mu, o.res.J, o.res.Jc, o.res.duality_gap,
             o.res.complementary_slackness, 1e-6 * std::max(1.0, pr.risk.rho_bar),
             o.res.log.size(), o.secs, o.res.message.empty() ? "" : "; ",
             o.res.message.c_str());
}

void criterion_exact() {
  const Problem uav = uav_benchmark();
  const ExactOutcome o = exact_solve(uav);
  const DualOptimum dual = maximize_dual(uav);
  if (!dual.bounded)
    info(fmt("benchmark dual keeps increasing up to mu=%g (risk budget below the attainable "
             "floor of Jc)", dual.mu));
  const Problem feasible = with_rho_bar(uav, 40.0);
  const ExactOutcome f = exact_solve(feasible);
  info("feasible variant: " + describe_exact(feasible, f) +
       (exact_ok(feasible, f) ? " -> met" : " -> not met"));
  verdict(1, exact_ok(uav, o), "exact primal-dual on the benchmark: " + describe_exact(uav, o));
}

// ---- 2: analytic gradient vs finite differences ----

Problem random_problem(Eigen::Index n, Eigen::Index m, std::mt19937_64& eng) {
  LinearSystem sys{oracle::random_stable(n, eng, 1.05), oracle::random_matrix(n, m, eng),
                   oracle::random_psd(n, eng, n) + 0.1 * Mat::Identity(n, n),
                   Mat::Identity(m, m) + 0.1 * oracle::random_psd(m, eng, m)};
  const NoiseModel noise = NoiseModel::create(
      GaussianMixture{{0.4, 0.6},
                      {Gaussian{oracle::random_matrix(n, 1, eng), oracle::random_psd(n, eng, n)},
                       Gaussian{oracle::random_matrix(n, 1, eng), oracle::random_psd(n, eng, 2)}}},
      NoiseOptions{}, sys);
  const RiskSpec risk = RiskSpec::from_rho_bar(100.0, noise.stats(), sys.Q);
  Problem pr{sys, noise, risk, Policy::zeros(m, n)};
  pr.initial = stationary_point(RiskLagrangian::from_problem(pr, 0.0));
  return pr;
}

void criterion_gradient() {
  std::mt19937_64 eng(2024);
  std::vector<Problem> problems;
  for (Eigen::Index k = 0; k < 5; ++k) problems.push_back(random_problem(2 + k, 1 + k % 3, eng));
  problems.push_back(uav_benchmark());
  const double mus[] = {0.0, 1.0, 2.0, 5.0};

  const auto t0 = Clock::now();
  double worst = 0.0, worst_plain = 0.0;
  size_t count = 0;
  for (size_t s = 0; s < problems.size(); ++s) {
    const Problem& pr = problems[s];
    const size_t per = s + 1 < problems.size() ? 17 : 15;
    const auto policies = sample_stabilizing_policies(pr.sys, pr.initial, per, 0.3, eng, 0.95);
    for (const Policy& p : policies) {
      const RiskLagrangian rl = RiskLagrangian::from_problem(pr, mus[count % 4]);
      auto f = [&](const Mat& y) { return evaluate(rl, Policy::from_matrix(y)).L_value; };
      const Mat g = gradient(rl, p);
      const Mat x = p.as_matrix();
      worst = std::max(worst, oracle::max_entrywise_rel(oracle::numeric_gradient(f, x), g));
      // plain two-point stencil at h = 1e-6, reported only
      Mat plain(x.rows(), x.cols());
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        Mat a = x, b = x;
        a.data()[k] += 1e-6;
        b.data()[k] -= 1e-6;
        plain.data()[k] = (f(a) - f(b)) / 2e-6;
      }
      worst_plain = std::max(worst_plain, oracle::max_entrywise_rel(plain, g));
      ++count;
    }
  }
  const double secs = seconds_since(t0);
  info(fmt("two-point differences at h=1e-6 on the same policies: worst %.3g", worst_plain));
  verdict(2, count == 100 && worst <= 1e-5 && secs < 60.0,
          fmt("%zu policies over 5 random systems and the benchmark: worst entrywise "
              "relative error %.3g (tol 1e-5), %.1fs (limit 60s)",
              count, worst, secs));
}

// ---- 3: rollout oracle vs closed form ----

void criterion_oracle() {
  const Problem uav = uav_benchmark();
  double worst = 0.0;
  std::string where;
  for (double mu : {0.0, 2.0, 5.0}) {
    const RiskLagrangian rl = RiskLagrangian::from_problem(uav, mu);
    const double L = evaluate(rl, uav.initial).L_value;
    double worst_mu = 0.0;
    for (std::uint64_t seed : seeds20()) {
      RolloutConfig cfg;
      cfg.horizon = 1000000;
      cfg.burn_in = 1000;
      cfg.seed = seed;
      const double e = std::abs(rollout_cost(rl, uav.noise, uav.initial, cfg).L_hat - L) / std::abs(L);
      worst_mu = std::max(worst_mu, e);
    }
    info(fmt("rollout mu=%g: L=%.6g, worst relative error over 20 seeds %.3g", mu, L, worst_mu));
    if (worst_mu >= worst) {
      worst = worst_mu;
      where = fmt("mu=%g", mu);
    }
  }
  verdict(3, worst <= 0.01,
          fmt("T=1e6 rollouts at mu in {0,2,5}, 20 seeds: worst relative error %.3g at %s "
              "(tol 0.01)", worst, where.c_str()));
}

// ---- 4: random search on L(., 2) ----

struct SearchOutcome {
  double rel = NAN;
  bool failed = false;
  bool trend = false;
};

// Block means of L_hat over windows of `w` iterations; the trend counts as
// non-increasing when no block exceeds its predecessor by more than 3
// standard errors of the difference.
bool non_increasing_trend(const IterateLog& log, size_t w) {
  const auto& rs = log.records();
  double prev_mean = 0.0, prev_var = 0.0;
  bool have = false;
  for (size_t b = 0; b + w <= rs.size(); b += w) {
    double s = 0.0, s2 = 0.0;
    for (size_t i = b; i < b + w; ++i) {
      s += rs[i].L_est;
      s2 += rs[i].L_est * rs[i].L_est;
    }
    const double mean = s / w;
    const double var = std::max(0.0, s2 / w - mean * mean) / w;
    if (have && mean > prev_mean + 3.0 * std::sqrt(var + prev_var)) return false;
    prev_mean = mean;
    prev_var = var;
    have = true;
  }
  return have;
}

std::vector<SearchOutcome> run_search(Estimator est) {
  const Problem uav = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(uav, 2.0);
  const double D = dual_value(rl).value;
  std::vector<SearchOutcome> out;
  for (std::uint64_t seed : seeds20()) {
    RandomSearchConfig cfg;
    cfg.iterations = 300000;
    cfg.radius = 0.2;
    cfg.step = 1e-5;
    cfg.oracle.horizon = 100;
    cfg.estimator = est;
    cfg.seed = seed;
    const RandomSearchResult r = random_search(rl, uav.noise, uav.initial, cfg);
    SearchOutcome o;
    o.failed = r.status != RunStatus::kOk;
    o.rel = (evaluate(rl, r.policy).L_value - D) / D;
    o.trend = non_increasing_trend(r.log, 1000);
    out.push_back(o);
  }
  return out;
}

void criterion_search() {
  const auto t0 = Clock::now();
  const auto anti = run_search(Estimator::kAntithetic);
  const double secs = seconds_since(t0);
  std::vector<double> rels;
  size_t failed = 0, trend = 0;
  for (const auto& o : anti) {
    rels.push_back(o.rel);
    failed += o.failed;
    trend += o.trend;
  }
  info(fmt("antithetic search: moving average non-increasing (1e3 windows, 3 SE) in %zu/20 "
           "seeds (want >= 18); %zu runs stopped early; %.0fs",
           trend, failed, secs));

  const auto one = run_search(Estimator::kOnePoint);
  std::vector<double> rels1;
  size_t failed1 = 0;
  for (const auto& o : one) {
    rels1.push_back(o.rel);
    failed1 += o.failed;
  }
  info(fmt("one-point search, same settings: median final relative error %.3g, %zu/20 runs "
           "stopped early",
           median(rels1), failed1));

  const double med = median(rels);
  verdict(4, med <= 0.05,
          fmt("random search at mu=2, r=0.2, T=100, eta=1e-5, N=3e5, antithetic, 20 seeds: "
              "median final (L - D)/D %.3g (tol 0.05)",
              med));
}

// ---- 5: primal-dual ----

struct ModelFreeOutcome {
  double gap = NAN;
  double violation = NAN;
  size_t failed = 0;
};

ModelFreeOutcome model_free(const Problem& pr) {
  const PrimalDualResult ref = primal_dual(pr, PrimalDualConfig{}, pr.initial);
  const double j_star = evaluate(RiskLagrangian::from_problem(pr, 0.0), ref.policy).J_value;
  info(fmt("reference for rho_bar=%g: mu*=%.6g J*=%.6g Jc*=%.6g converged=%d", pr.risk.rho_bar,
           ref.mu, j_star, ref.Jc, int(ref.converged)));
  std::vector<double> gaps, viols;
  ModelFreeOutcome o;
  for (std::uint64_t seed : seeds20()) {
    PrimalDualConfig cfg;
    cfg.inner = InnerMode::kRandomSearch;
    cfg.outer_iters = 40;
    cfg.risk_oracle_T = 10000;
    cfg.inner_search.iterations = 5000;
    cfg.inner_search.estimator = Estimator::kAntithetic;
    cfg.seed = seed;
    const PrimalDualResult r = primal_dual(pr, cfg, pr.initial);
    o.failed += r.status != RunStatus::kOk;
    const PolicyEvaluation ev = evaluate(RiskLagrangian::from_problem(pr, 0.0), r.policy);
    gaps.push_back(std::abs(ev.J_value - j_star) / j_star);
    viols.push_back(std::abs(ev.Jc_value - pr.risk.rho_bar) / pr.risk.rho_bar);
  }
  o.gap = median(gaps);
  o.violation = median(viols);
  return o;
}

struct RateOutcome {
  bool ok = false;
  std::string text;
};

// Exact dual ascent with xi_j = sqrt(2/j) / (b e); b and e re-measured from
// the checked run.
RateOutcome rate_check(const Problem& pr) {
  const DualOptimum best = maximize_dual(pr);
  if (!best.bounded)
    return {false, fmt("dual optimum unbounded (D still increasing at mu=%g)", best.mu)};

  auto measure = [](const PrimalDualResult& r, double& b, double& e) {
    b = 0.0;
    e = 0.0;
    for (double w : r.omegas) b = std::max(b, std::abs(w));
    for (const auto& rec : r.log.records()) e = std::max(e, rec.mu);
  };
  PrimalDualConfig cfg;
  cfg.tolerance = 0.0;
  cfg.outer_iters = 2000;
  PrimalDualResult pilot = primal_dual(pr, cfg, pr.initial);
  double b = 0.0, e = 0.0;
  measure(pilot, b, e);
  cfg.schedule.value = 1.0 / (b * e);
  const PrimalDualResult run = primal_dual(pr, cfg, pr.initial);
  measure(run, b, e);

  double worst = -INFINITY;
  size_t worst_j = 0, violated = 0;
  for (size_t j = 1; j <= run.mu_averages.size(); ++j) {
    const double d = dual_value(RiskLagrangian::from_problem(pr, run.mu_averages[j - 1])).value;
    const double lhs = best.value - d, rhs = 3.0 * b * e / std::sqrt(double(j));
    if (lhs > rhs) ++violated;
    if (lhs / rhs > worst) {
      worst = lhs / rhs;
      worst_j = j;
    }
  }
  return {violated == 0,
          fmt("D*=%.8g at mu=%.6g, b=%.4g e=%.4g, %zu iterations, worst (D*-D)/(3be/sqrt j) "
              "%.3g at j=%zu, %zu violations",
              best.value, best.mu, b, e, run.mu_averages.size(), worst, worst_j, violated)};
}

void criterion_primal_dual() {
  const Problem uav = uav_benchmark();
  const Problem feasible = with_rho_bar(uav, 40.0);

  const RateOutcome rate_f = rate_check(feasible);
  info("feasible variant rate bound: " + rate_f.text + (rate_f.ok ? " -> met" : " -> not met"));
  const auto t1 = Clock::now();
  const ModelFreeOutcome mf_f = model_free(feasible);
  info(fmt("feasible variant model-free: median gap %.3g, violation %.3g (tol 0.1), %zu runs "
           "stopped early, %.0fs -> %s",
           mf_f.gap, mf_f.violation, mf_f.failed, seconds_since(t1),
           mf_f.gap <= 0.1 && mf_f.violation <= 0.1 ? "met" : "not met"));

  const RateOutcome rate = rate_check(uav);
  info("benchmark rate bound: " + rate.text + (rate.ok ? " -> met" : " -> not met"));
  const auto t0 = Clock::now();
  const ModelFreeOutcome mf = model_free(uav);
  verdict(5, mf.gap <= 0.1 && mf.violation <= 0.1 && rate.ok,
          fmt("model-free primal-dual on the benchmark, 20 seeds, risk T=1e4, 40 outer x 5000 "
              "antithetic inner steps: median gap %.3g, violation %.3g (tol 0.1), %zu runs "
              "stopped early, %.0fs; rate bound %s",
              mf.gap, mf.violation, mf.failed, seconds_since(t0), rate.ok ? "met" : "not met"));
}

// ---- 6: invariant suite ----

void criterion_checks() {
  const auto t0 = Clock::now();
  const std::vector<CheckResult> results = run_checks(uav_benchmark(), CheckOptions{});
  const double secs = seconds_since(t0);
  size_t bad = 0;
  for (const CheckResult& r : results) {
    if (!r.informational && !r.passed) ++bad;
    info(fmt("check %-40s %s measured %.3g tol %.3g %s", r.name.c_str(),
             r.informational ? "info" : (r.passed ? "ok  " : "FAIL"), r.measured, r.tolerance,
             r.detail.c_str()));
  }
  verdict(6, all_passed(results) && secs < 120.0,
          fmt("%zu checks on the benchmark, %zu failing, %.1fs (limit 120s)", results.size(),
              bad, secs));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  struct Step {
    int id;
    void (*run)();
  };
  const Step steps[] = {{1, criterion_exact},  {2, criterion_gradient},
                        {3, criterion_oracle}, {4, criterion_search},
                        {5, criterion_primal_dual}, {6, criterion_checks}};
  for (const Step& s : steps) {
    try {
      s.run();
    } catch (const std::exception& e) {
      verdict(s.id, false, std::string("aborted: ") + e.what());
    }
  }
  std::printf("%d criteria failing, %.0fs total\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
