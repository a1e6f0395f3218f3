#include "oracle.hpp"

#include <cmath>

#include "error.hpp"

namespace rclqr {

OracleSample rollout_cost(const RiskLagrangian& rl, const NoiseModel& noise,
                          const Policy& p, const RolloutConfig& cfg,
                          const TrajectorySink& sink) {
  const LinearSystem& sys = rl.sys();
  require_compatible(sys, p);
  const auto n = sys.n();
  if (cfg.horizon < 1) {
    throw Error(ErrorCode::kConfiguration, "rollout horizon must be >= 1");
  }
  if (noise.dim() != n) {
    throw Error(ErrorCode::kDimension, "noise dimension does not match the state");
  }
  if (cfg.x0.size() != 0 && cfg.x0.size() != n) {
    throw Error(ErrorCode::kDimension, "x0 must have the state dimension");
  }

  // Every per-step cost is a quadratic in x once u = -K x + l is substituted.
  const Mat rk = sys.R * p.K;
  const Mat kRk = p.K.transpose() * rk;
  const Vec rkl = rk.transpose() * p.l;  // K^T R l
  const double lrl = p.l.dot(sys.R * p.l);
  const Mat lag_quad = rl.Qmu() + kRk;
  const Vec lag_lin = 2.0 * rl.S() - 2.0 * rkl;
  const double lag_const = lrl - rl.mu() * rl.rho_bar();
  const Mat obj_quad = sys.Q + kRk;
  const Mat risk_quad = 4.0 * rl.QWQ();
  const Vec risk_lin = 4.0 * rl.QM3();
  const Mat acl = sys.A - sys.B * p.K;
  const Vec drift = sys.B * p.l;

  NoiseSampler sampler = noise.sampler(cfg.seed);
  Vec x = cfg.x0.size() == 0 ? Vec::Zero(n) : cfg.x0;
  Vec next(n);
  Vec w(n);
  Vec tmp(n);
  Vec u;

  const double guard_sq = cfg.divergence_guard * cfg.divergence_guard;
  const std::size_t total = cfg.burn_in + cfg.horizon;
  double lag_sum = 0.0;
  double obj_sum = 0.0;
  double risk_sum = 0.0;
  for (std::size_t t = 0; t < total; ++t) {
    const double norm_sq = x.squaredNorm();
    if (!(norm_sq <= guard_sq)) throw DivergenceError(t, std::sqrt(norm_sq));
    if (t >= cfg.burn_in || sink) {
      tmp.noalias() = lag_quad * x;
      const double lag = x.dot(tmp) + lag_lin.dot(x) + lag_const;
      if (t >= cfg.burn_in) {
        tmp.noalias() = obj_quad * x;
        obj_sum += x.dot(tmp) - 2.0 * rkl.dot(x) + lrl;
        tmp.noalias() = risk_quad * x;
        risk_sum += x.dot(tmp) + risk_lin.dot(x);
        lag_sum += lag;
      }
      if (sink) {
        u = apply(p, x);
        sink(t, x, u, lag);
      }
    }
    if (t + 1 == total) break;
    sampler.sample(w);
    next.noalias() = acl * x;
    next += drift;
    next += w;
    x.swap(next);
  }
  const double horizon = static_cast<double>(cfg.horizon);
  return OracleSample{lag_sum / horizon, obj_sum / horizon, risk_sum / horizon,
                      total};
}

}  // namespace rclqr
