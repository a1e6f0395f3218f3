#include <doctest.h>

#include <cmath>
#include <random>

#include "expect.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "problem.hpp"

using namespace rclqr;

namespace {

LinearSystem scalar_system(double q) {
  return LinearSystem{Mat::Constant(1, 1, 0.5), Mat::Ones(1, 1), Mat::Constant(1, 1, q),
                      Mat::Ones(1, 1)};
}

// Running mean and variance of one scalar statistic, for standard errors.
struct Moments {
  double n = 0, mean = 0, m2 = 0;
  void add(double x) {
    n += 1;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double se() const { return std::sqrt(m2 / (n - 1) / n); }
};

bool within_se(double value, const Moments& m, double k = 3.0) {
  return std::abs(value - m.mean) <= k * m.se() + 1e-12;
}

}  // namespace

TEST_CASE("noise stats: a constant sampler has zero spread") {
  const LinearSystem sys = uav_system();
  const Vec c = (Vec(4) << 0.3, -1.0, 2.0, 0.25).finished();
  const NoiseModel model = NoiseModel::create(Deterministic{c}, NoiseOptions{}, sys);
  CHECK(model.stats().wbar.isApprox(c));
  CHECK(model.stats().W.norm() == 0.0);
  CHECK(model.stats().M3.norm() == 0.0);
  CHECK(model.stats().m4 == 0.0);

  const NoiseStats est = estimate_noise_stats(model.sampler(1), sys.Q, 10000);
  CHECK((est.wbar - c).norm() <= 1e-12);
  CHECK(est.W.norm() <= 1e-20);
  CHECK(est.M3.norm() <= 1e-20);
  CHECK(est.m4 <= 1e-20);
}

TEST_CASE("noise stats: scalar Gaussian against its moment formulas") {
  const double sigma = 1.7, q = 2.5;
  const LinearSystem sys = scalar_system(q);
  const NoiseModel model = NoiseModel::create(
      Gaussian{Vec::Zero(1), Mat::Constant(1, 1, sigma * sigma)}, NoiseOptions{}, sys);
  const double s2 = sigma * sigma, s4 = s2 * s2;
  CHECK(model.stats().W(0, 0) == doctest::Approx(s2).epsilon(1e-14));
  CHECK(std::abs(model.stats().M3(0)) <= 1e-14);
  CHECK(model.stats().m4 == doctest::Approx(2 * q * q * s4).epsilon(1e-14));

  const std::size_t N = 1000000;
  const NoiseStats est = estimate_noise_stats(model.sampler(9), sys.Q, N);
  const double rootN = std::sqrt(static_cast<double>(N));
  CHECK(std::abs(est.W(0, 0) - s2) <= 3 * std::sqrt(2.0) * s2 / rootN);
  // Var(q w^3) = 15 q^2 sigma^6
  CHECK(std::abs(est.M3(0)) <= 3 * std::sqrt(15.0) * q * s2 * sigma / rootN);
  // Var(q^2 (w^2 - sigma^2)^2) = 56 q^4 sigma^8
  CHECK(std::abs(est.m4 - 2 * q * q * s4) <= 3 * std::sqrt(56.0) * q * q * s4 / rootN);
}

TEST_CASE("noise stats: UAV mixture against a 1e7-draw reference") {
  const Problem pr = uav_benchmark();
  const NoiseStats& s = pr.noise.stats();
  const Mat& B = pr.sys.B;
  const Mat& Q = pr.sys.Q;

  // Independent sampler: pick a component, draw the input, map through B.
  std::mt19937_64 eng(20240101);
  std::bernoulli_distribution second(0.8);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t N = 10000000;
  std::vector<Vec> draws;
  draws.reserve(N);
  Vec mean = Vec::Zero(4);
  for (std::size_t i = 0; i < N; ++i) {
    const bool k = second(eng);
    Vec u(2);
    u(0) = k ? 8.0 + std::sqrt(60.0) * nd(eng) : 3.0 + std::sqrt(30.0) * nd(eng);
    u(1) = 0.1 * nd(eng);
    draws.push_back(B * u);
    mean += draws.back();
  }
  mean /= static_cast<double>(N);

  std::vector<Moments> wbar(4), W(16), M3(4);
  Moments m4;
  const double trace_wq = (s.W * Q).trace();
  for (const Vec& w : draws) {
    const Vec d = w - mean;
    const double sq = d.dot(Q * d);
    for (int i = 0; i < 4; ++i) {
      wbar[i].add(w(i));
      M3[i].add(sq * d(i));
      for (int j = 0; j < 4; ++j) W[4 * i + j].add(d(i) * d(j));
    }
    m4.add((sq - trace_wq) * (sq - trace_wq));
  }
  for (int i = 0; i < 4; ++i) {
    CHECK(within_se(s.wbar(i), wbar[i]));
    CHECK(within_se(s.M3(i), M3[i]));
    for (int j = 0; j < 4; ++j) CHECK(within_se(s.W(i, j), W[4 * i + j]));
  }
  CHECK(within_se(s.m4, m4));
}

TEST_CASE("noise stats: sample floor") {
  const LinearSystem sys = scalar_system(1.0);
  const NoiseModel model =
      NoiseModel::create(Gaussian{Vec::Zero(1), Mat::Ones(1, 1)}, NoiseOptions{}, sys);
  CHECK(error_code_of([&] { estimate_noise_stats(model.sampler(0), sys.Q, 9999); }) ==
        ErrorCode::kConfiguration);
  CHECK_NOTHROW(estimate_noise_stats(model.sampler(0), sys.Q, 10000));
}

TEST_CASE("noise stats: bit-exact for a fixed seed") {
  const Problem pr = uav_benchmark();
  const NoiseStats a = estimate_noise_stats(pr.noise.sampler(77), pr.sys.Q, 20000);
  const NoiseStats b = estimate_noise_stats(pr.noise.sampler(77), pr.sys.Q, 20000);
  const NoiseStats c = estimate_noise_stats(pr.noise.sampler(78), pr.sys.Q, 20000);
  CHECK(a.wbar == b.wbar);
  CHECK(a.W == b.W);
  CHECK(a.M3 == b.M3);
  CHECK(a.m4 == b.m4);
  CHECK(a.W != c.W);
}

TEST_CASE("noise stats: a symmetric zero-mean sampler has vanishing third moment") {
  LinearSystem sys = uav_system();
  std::mt19937_64 eng(3);
  Mat F = Mat::Random(4, 4);
  const Mat cov = F * F.transpose() + 0.1 * Mat::Identity(4, 4);
  const NoiseModel model = NoiseModel::create(Gaussian{Vec::Zero(4), cov}, NoiseOptions{}, sys);
  CHECK(model.stats().M3.norm() <= 1e-12);

  const std::size_t N = 1000000;
  const NoiseStats est = estimate_noise_stats(model.sampler(5), sys.Q, N);
  std::vector<Moments> m3(4);
  NoiseSampler replay = model.sampler(5);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec w = replay.sample();
    const double sq = w.dot(sys.Q * w);
    for (int k = 0; k < 4; ++k) m3[k].add(sq * w(k));
  }
  for (int k = 0; k < 4; ++k) CHECK(std::abs(est.M3(k)) <= 3 * m3[k].se());
}

TEST_CASE("noise: truncated samples respect the bound") {
  const LinearSystem sys = uav_system();
  NoiseOptions opts;
  opts.enters_via_B = true;
  opts.bound_v = 4.0;
  opts.stats_samples = 20000;
  const NoiseModel model = NoiseModel::create(uav_input_noise(), opts, sys);
  NoiseSampler s = model.sampler(12);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) worst = std::max(worst, s.sample().norm());
  CHECK(worst <= 4.0);
  CHECK(model.stats().m4 >= 0.0);
  CHECK(is_psd(model.stats().W));
}

TEST_CASE("noise: bad truncation or regularization settings") {
  const LinearSystem sys = uav_system();
  NoiseOptions opts;
  opts.enters_via_B = true;
  opts.bound_v = -1.0;
  CHECK(error_code_of([&] { NoiseModel::create(uav_input_noise(), opts, sys); }) ==
        ErrorCode::kConfiguration);
  NoiseOptions reg;
  reg.enters_via_B = true;
  reg.regularize_W = -0.5;
  CHECK(error_code_of([&] { NoiseModel::create(uav_input_noise(), reg, sys); }) ==
        ErrorCode::kConfiguration);
}

TEST_CASE("noise: regularization makes W positive definite") {
  const LinearSystem sys = uav_system();
  NoiseOptions opts;
  opts.enters_via_B = true;
  const NoiseModel plain = NoiseModel::create(uav_input_noise(), opts, sys);
  opts.regularize_W = 1e-3;
  const NoiseModel reg = NoiseModel::create(uav_input_noise(), opts, sys);
  CHECK(min_eigenvalue_symmetric(plain.stats().W) <= 1e-10);
  CHECK(min_eigenvalue_symmetric(reg.stats().W) >= 1e-3 * (1 - 1e-9));
  CHECK((reg.stats().W - plain.stats().W - 1e-3 * Mat::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("risk spec: transformed tolerance") {
  const Problem pr = uav_benchmark();
  const NoiseStats& s = pr.noise.stats();
  const Mat wq = s.W * pr.sys.Q;
  const RiskSpec r = RiskSpec::from_rho(40.0, s, pr.sys.Q);
  CHECK(r.rho_bar == doctest::Approx(40.0 - s.m4 + 4 * (wq * wq).trace()).epsilon(1e-14));
  CHECK(error_code_of([&] { RiskSpec::from_rho(-1.0, s, pr.sys.Q); }) ==
        ErrorCode::kConfiguration);
  CHECK(error_code_of([&] { RiskSpec::from_rho_bar(NAN, s, pr.sys.Q); }) ==
        ErrorCode::kConfiguration);
}

TEST_CASE("uav benchmark: plant, start policy and tolerance") {
  const Problem pr = uav_benchmark();
  CHECK(spectral_radius(pr.sys.A) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(is_stabilizing(pr.sys, pr.initial));
  CHECK(pr.risk.rho_bar == 15.0);
  const NoiseStats& s = pr.noise.stats();
  const Mat wq = s.W * pr.sys.Q;
  CHECK(pr.risk.rho == doctest::Approx(15.0 + s.m4 - 4 * (wq * wq).trace()).epsilon(1e-14));
  CHECK(pr.sys.Q.diagonal().isApprox((Vec(4) << 1, 0.1, 2, 0.2).finished()));
  CHECK(pr.sys.R.isApprox(Mat::Identity(2, 2)));
  CHECK_NOTHROW(pr.sys.validate());
}

TEST_CASE("system validation errors") {
  LinearSystem bad = uav_system();
  bad.B = Mat::Ones(3, 2);
  CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::kDimension);

  LinearSystem neg_q = uav_system();
  neg_q.Q(0, 0) = -1.0;
  CHECK(error_code_of([&] { neg_q.validate(); }) == ErrorCode::kDefiniteness);

  LinearSystem neg_r = uav_system();
  neg_r.R(1, 1) = 0.0;
  CHECK(error_code_of([&] { neg_r.validate(); }) == ErrorCode::kDefiniteness);

  // An unstable mode the input cannot move.
  LinearSystem unreachable{Mat::Identity(2, 2) * 1.2, (Mat(2, 1) << 1, 0).finished(),
                           Mat::Identity(2, 2), Mat::Ones(1, 1)};
  const ErrorCode code = error_code_of([&] { unreachable.validate(); });
  CHECK((code == ErrorCode::kPrecondition || code == ErrorCode::kNonConvergence));
}

TEST_CASE("gaussian mixture weights are validated") {
  const LinearSystem sys = uav_system();
  GaussianMixture mix = uav_input_noise();
  mix.weights = {0.5, 0.4};
  NoiseOptions opts;
  opts.enters_via_B = true;
  CHECK(error_code_of([&] { NoiseModel::create(mix, opts, sys); }) ==
        ErrorCode::kConfiguration);
}
