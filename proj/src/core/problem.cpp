#include "problem.hpp"

namespace rclqr {

LinearSystem uav_system() {
  LinearSystem sys;
  sys.A.resize(4, 4);
  sys.A << 1, 0.5, 0, 0,
           0, 1, 0, 0,
           0, 0, 1, 0.5,
           0, 0, 0, 1;
  sys.B.resize(4, 2);
  sys.B << 0.125, 0,
           0.5, 0,
           0, 0.125,
           0, 0.5;
  sys.Q = Vec((Vec(4) << 1.0, 0.1, 2.0, 0.2).finished()).asDiagonal();
  sys.R = Mat::Identity(2, 2);
  return sys;
}

GaussianMixture uav_input_noise() {
  // Second parameter of N(mean, .) is read as a variance.
  auto component = [](double mean, double var) {
    Gaussian g;
    g.mean = Vec((Vec(2) << mean, 0.0).finished());
    g.cov = Vec((Vec(2) << var, 0.01).finished()).asDiagonal();
    return g;
  };
  return GaussianMixture{{0.2, 0.8}, {component(3.0, 30.0), component(8.0, 60.0)}};
}

Policy uav_initial_policy() {
  Policy p;
  p.K.resize(2, 4);
  p.K << 0.5, 0.5, 0, 0,
         0, 0, 0.5, 0.5;
  p.l = Vec((Vec(2) << -6.0, 0.0).finished());
  return p;
}

Problem uav_benchmark() {
  LinearSystem sys = uav_system();
  NoiseOptions opts;
  opts.enters_via_B = true;
  NoiseModel noise = NoiseModel::create(uav_input_noise(), opts, sys);
  RiskSpec risk = RiskSpec::from_rho_bar(kUavRhoBar, noise.stats(), sys.Q);
  return Problem{std::move(sys), std::move(noise), risk, uav_initial_policy()};
}

}  // namespace rclqr
