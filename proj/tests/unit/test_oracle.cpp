#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "analytic.hpp"
#include "error.hpp"
#include "expect.hpp"
#include "oracle.hpp"
#include "problem.hpp"

using namespace rclqr;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("noiseless rollout from the fixed point is constant") {
  const LinearSystem sys = uav_system();
  const Policy p = uav_initial_policy();
  const NoiseModel quiet = NoiseModel::create(Deterministic{Vec::Zero(4)}, NoiseOptions{}, sys);
  const RiskLagrangian rl(sys, quiet.stats(), RiskSpec{1.0, 1.0}, 0.0);
  const Mat acl = sys.A - sys.B * p.K;
  const Vec xbar = (Mat::Identity(4, 4) - acl).fullPivLu().solve(sys.B * p.l);
  const Mat& R = sys.R;
  const double expected = xbar.dot((sys.Q + p.K.transpose() * R * p.K) * xbar) -
                          2 * p.l.dot(R * p.K * xbar) + p.l.dot(R * p.l);
  RolloutConfig cfg;
  cfg.horizon = 500;
  cfg.x0 = xbar;
  const OracleSample s = rollout_cost(rl, quiet, p, cfg);
  CHECK(s.L_hat == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s.J_hat == doctest::Approx(expected).epsilon(1e-12));
  CHECK(s.Jc_hat == 0.0);
  CHECK(s.trajectory_len == 500);
}

TEST_CASE("rollout averages match a direct simulation") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 2.0);
  const Policy& p = pr.initial;
  RolloutConfig cfg;
  cfg.horizon = 300;
  cfg.burn_in = 50;
  cfg.seed = 4;
  cfg.x0 = Vec::Constant(4, 0.5);

  NoiseSampler noise = pr.noise.sampler(4);
  Vec x = cfg.x0;
  double L = 0, J = 0, Jc = 0;
  const Mat& Q = pr.sys.Q;
  const NoiseStats& s = pr.noise.stats();
  std::size_t seen = 0, out_of_order = 0;
  rollout_cost(rl, pr.noise, p, cfg, [&](std::size_t t, const Vec&, const Vec&, double) {
    out_of_order += t != seen;
    ++seen;
  });
  CHECK(seen == 350);
  CHECK(out_of_order == 0);
  for (std::size_t t = 0; t < 350; ++t) {
    const Vec u = -p.K * x + p.l;
    if (t >= 50) {
      L += x.dot(Q * x) + 4 * 2.0 * x.dot(Q * s.W * Q * x) + 2 * x.dot(2 * 2.0 * Q * s.M3) +
           u.dot(pr.sys.R * u) - 2.0 * pr.risk.rho_bar;
      J += x.dot(Q * x) + u.dot(pr.sys.R * u);
      Jc += 4 * x.dot(Q * s.W * Q * x) + 4 * x.dot(Q * s.M3);
    }
    x = pr.sys.A * x + pr.sys.B * u + noise.sample();
  }
  const OracleSample got = rollout_cost(rl, pr.noise, p, cfg);
  CHECK(got.L_hat == doctest::Approx(L / 300).epsilon(1e-10));
  CHECK(got.J_hat == doctest::Approx(J / 300).epsilon(1e-10));
  CHECK(got.Jc_hat == doctest::Approx(Jc / 300).epsilon(1e-10));
}

TEST_CASE("long rollout on the benchmark agrees with the closed form within 1%") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 2.0);
  const PolicyEvaluation ev = evaluate(rl, pr.initial);
  RolloutConfig cfg;
  cfg.horizon = 1000000;
  cfg.burn_in = 1000;
  cfg.seed = 1;
  const OracleSample s = rollout_cost(rl, pr.noise, pr.initial, cfg);
  CHECK(std::abs(s.L_hat - ev.L_value) <= 0.01 * std::abs(ev.L_value));
  CHECK(std::abs(s.J_hat - ev.J_value) <= 0.01 * std::abs(ev.J_value));
  CHECK(std::abs(s.Jc_hat - ev.Jc_value) <= 0.01 * std::abs(ev.Jc_value));
}

TEST_CASE("short-horizon dispersion over 100 seeds") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 2.0);
  double sum = 0, sum_sq = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RolloutConfig cfg;
    cfg.seed = seed;
    const double L = rollout_cost(rl, pr.noise, pr.initial, cfg).L_hat;
    sum += L;
    sum_sq += L * L;
  }
  const double mean = sum / 100;
  const double sd = std::sqrt((sum_sq - 100 * mean * mean) / 99);
  MESSAGE("T = 100 oracle: mean " << mean << ", std " << sd << " over 100 seeds");
  CHECK(std::isfinite(sd));
  CHECK(sd > 0.0);
}

TEST_CASE("estimation error shrinks with the horizon") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 2.0);
  const double exact = evaluate(rl, pr.initial).L_value;
  double prev = INFINITY;
  for (std::size_t T : {1000u, 10000u, 100000u, 1000000u}) {
    std::vector<double> err;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      RolloutConfig cfg;
      cfg.horizon = T;
      cfg.seed = 100 + seed;
      err.push_back(std::abs(rollout_cost(rl, pr.noise, pr.initial, cfg).L_hat - exact));
    }
    const double m = median(err);
    MESSAGE("T = " << T << ": median |L_hat - L| = " << m);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("rollouts are bit-identical for a fixed seed") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 3.0);
  RolloutConfig cfg;
  cfg.horizon = 5000;
  cfg.seed = 99;
  const OracleSample a = rollout_cost(rl, pr.noise, pr.initial, cfg);
  const OracleSample b = rollout_cost(rl, pr.noise, pr.initial, cfg);
  CHECK(a.L_hat == b.L_hat);
  CHECK(a.J_hat == b.J_hat);
  CHECK(a.Jc_hat == b.Jc_hat);
  cfg.seed = 100;
  CHECK(rollout_cost(rl, pr.noise, pr.initial, cfg).L_hat != a.L_hat);
}

TEST_CASE("a clearly unstable policy trips the divergence guard") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 0.0);
  Policy p = pr.initial;
  p.K *= -0.2;
  const double r = closed_loop_spectral_radius(pr.sys, p);
  REQUIRE(r >= 1.05);
  RolloutConfig cfg;
  cfg.horizon = 1000000;
  try {
    rollout_cost(rl, pr.noise, p, cfg);
    FAIL("no divergence reported");
  } catch (const DivergenceError& e) {
    CHECK(e.code() == ErrorCode::kDivergence);
    // Growth at rate r reaches the 1e9 guard in a few hundred steps.
    CHECK(e.step() < 2000);
    CHECK(e.state_norm() > 1e9);
  }
}

TEST_CASE("rollout argument errors") {
  const Problem pr = uav_benchmark();
  const RiskLagrangian rl = RiskLagrangian::from_problem(pr, 0.0);
  RolloutConfig cfg;
  cfg.horizon = 0;
  CHECK(error_code_of([&] { rollout_cost(rl, pr.noise, pr.initial, cfg); }) ==
        ErrorCode::kConfiguration);
  cfg.horizon = 10;
  cfg.x0 = Vec::Zero(3);
  CHECK(error_code_of([&] { rollout_cost(rl, pr.noise, pr.initial, cfg); }) ==
        ErrorCode::kDimension);
}
