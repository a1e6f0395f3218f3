#include "rclqr/rclqr.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "analytic.hpp"
#include "config.hpp"
#include "error.hpp"
#include "optimize.hpp"
#include "oracle.hpp"
#include "problem.hpp"
#include "verify.hpp"

struct rclqr_problem {
  rclqr::Problem value;
};

struct rclqr_policy {
  rclqr::Policy value;
};

struct rclqr_run {
  rclqr::IterateLog log;
  rclqr::Policy policy;
  rclqr_run_summary summary{};
  std::string message;
};

struct rclqr_experiment {
  rclqr::ExperimentConfig cfg;
  std::string resolved;
};

namespace {

thread_local std::string g_last_error;

rclqr_status to_status(rclqr::ErrorCode code) {
  using rclqr::ErrorCode;
  switch (code) {
    case ErrorCode::kDimension: return RCLQR_ERR_DIMENSION;
    case ErrorCode::kInstability: return RCLQR_ERR_INSTABILITY;
    case ErrorCode::kNumerical: return RCLQR_ERR_NUMERICAL;
    case ErrorCode::kNonConvergence: return RCLQR_ERR_NONCONVERGENCE;
    case ErrorCode::kDefiniteness: return RCLQR_ERR_DEFINITENESS;
    case ErrorCode::kConfiguration: return RCLQR_ERR_CONFIG;
    case ErrorCode::kDivergence: return RCLQR_ERR_DIVERGENCE;
    case ErrorCode::kPrecondition: return RCLQR_ERR_PRECONDITION;
  }
  return RCLQR_ERR_INTERNAL;
}

rclqr_status fail(rclqr_status status, const std::string& msg) {
  g_last_error = msg;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
rclqr_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return RCLQR_OK;
  } catch (const rclqr::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(RCLQR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RCLQR_ERR_INTERNAL, e.what());
  }
}

#define RCLQR_REQUIRE(cond)                                                   \
  do {                                                                        \
    if (!(cond)) return fail(RCLQR_ERR_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

rclqr::Mat row_major(const double* data, std::size_t rows, std::size_t cols) {
  rclqr::Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  }
  return m;
}

void copy_out(const rclqr::Mat& m, double* out) {
  if (!out) return;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = m(r, c);
  }
}

void copy_out(const rclqr::Vec& v, double* out) {
  if (!out) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
}

rclqr::RolloutConfig from_c(const rclqr_rollout_config& c, Eigen::Index n) {
  rclqr::RolloutConfig r;
  r.horizon = c.horizon;
  r.burn_in = c.burn_in;
  if (c.x0) r.x0 = Eigen::Map<const rclqr::Vec>(c.x0, n);
  r.seed = c.seed;
  r.divergence_guard = c.divergence_guard;
  return r;
}

// x0 points into `r`, which must outlive the returned struct.
rclqr_rollout_config to_c(const rclqr::RolloutConfig& r) {
  rclqr_rollout_config c;
  c.horizon = r.horizon;
  c.burn_in = r.burn_in;
  c.x0 = r.x0.size() > 0 ? r.x0.data() : nullptr;
  c.seed = r.seed;
  c.divergence_guard = r.divergence_guard;
  return c;
}

rclqr::RandomSearchConfig from_c(const rclqr_random_search_config& c, Eigen::Index n) {
  rclqr::RandomSearchConfig r;
  r.iterations = c.iterations;
  r.radius = c.radius;
  r.step = c.step;
  r.oracle = from_c(c.oracle, n);
  r.seed = c.seed;
  r.safeguard.kind = static_cast<rclqr::SafeguardKind>(c.safeguard);
  r.safeguard.factor = c.sublevel_factor;
  r.geometry = static_cast<rclqr::Geometry>(c.geometry);
  r.estimator = static_cast<rclqr::Estimator>(c.estimator);
  r.max_resamples = c.max_resamples;
  r.max_halvings = c.max_halvings;
  r.snapshot_every = c.snapshot_every;
  r.record_wallclock = c.record_wallclock != 0;
  return r;
}

rclqr_random_search_config to_c(const rclqr::RandomSearchConfig& r) {
  rclqr_random_search_config c;
  c.iterations = r.iterations;
  c.radius = r.radius;
  c.step = r.step;
  c.oracle = to_c(r.oracle);
  c.seed = r.seed;
  c.safeguard = static_cast<rclqr_safeguard>(r.safeguard.kind);
  c.sublevel_factor = r.safeguard.factor;
  c.geometry = static_cast<rclqr_geometry>(r.geometry);
  c.estimator = static_cast<rclqr_estimator>(r.estimator);
  c.max_resamples = r.max_resamples;
  c.max_halvings = r.max_halvings;
  c.snapshot_every = r.snapshot_every;
  c.record_wallclock = r.record_wallclock ? 1 : 0;
  return c;
}

rclqr::PrimalDualConfig from_c(const rclqr_primal_dual_config& c, Eigen::Index n) {
  rclqr::PrimalDualConfig r;
  r.mu_init = c.mu_init;
  r.outer_iters = c.outer_iters;
  r.schedule.kind = static_cast<rclqr::StepKind>(c.schedule);
  r.schedule.value = c.step_scale;
  r.inner = static_cast<rclqr::InnerMode>(c.inner);
  r.inner_search = from_c(c.inner_search, n);
  r.warm_start = c.warm_start != 0;
  r.risk_oracle_T = c.risk_oracle_T;
  r.seed = c.seed;
  r.tolerance = c.tolerance;
  r.mu_max = c.mu_max;
  r.record_wallclock = c.record_wallclock != 0;
  return r;
}

rclqr_primal_dual_config to_c(const rclqr::PrimalDualConfig& r) {
  rclqr_primal_dual_config c;
  c.mu_init = r.mu_init;
  c.outer_iters = r.outer_iters;
  c.schedule = static_cast<rclqr_step_kind>(r.schedule.kind);
  c.step_scale = r.schedule.value;
  c.inner = static_cast<rclqr_inner_mode>(r.inner);
  c.inner_search = to_c(r.inner_search);
  c.warm_start = r.warm_start ? 1 : 0;
  c.risk_oracle_T = r.risk_oracle_T;
  c.seed = r.seed;
  c.tolerance = r.tolerance;
  c.mu_max = r.mu_max;
  c.record_wallclock = r.record_wallclock ? 1 : 0;
  return c;
}

bool valid_enums(const rclqr_random_search_config& c) {
  return c.safeguard >= RCLQR_SAFEGUARD_NONE && c.safeguard <= RCLQR_SAFEGUARD_SUBLEVEL &&
         (c.geometry == RCLQR_GEOMETRY_SPHERE || c.geometry == RCLQR_GEOMETRY_BALL) &&
         (c.estimator == RCLQR_ESTIMATOR_ONE_POINT || c.estimator == RCLQR_ESTIMATOR_ANTITHETIC);
}

const rclqr::Policy& start_policy(const rclqr_problem* problem, const rclqr_policy* p0) {
  return p0 ? p0->value : problem->value.initial;
}

}  // namespace

extern "C" {

const char* rclqr_last_error(void) { return g_last_error.c_str(); }

const char* rclqr_status_name(rclqr_status status) {
  switch (status) {
    case RCLQR_OK: return "ok";
    case RCLQR_ERR_DIMENSION: return "dimension error";
    case RCLQR_ERR_INSTABILITY: return "instability error";
    case RCLQR_ERR_NUMERICAL: return "numerical error";
    case RCLQR_ERR_NONCONVERGENCE: return "non-convergence error";
    case RCLQR_ERR_DEFINITENESS: return "definiteness error";
    case RCLQR_ERR_CONFIG: return "configuration error";
    case RCLQR_ERR_DIVERGENCE: return "divergence error";
    case RCLQR_ERR_PRECONDITION: return "precondition error";
    case RCLQR_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RCLQR_ERR_IO: return "i/o error";
    case RCLQR_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

rclqr_status rclqr_problem_uav(rclqr_problem** out) {
  RCLQR_REQUIRE(out);
  return guarded([&] { *out = new rclqr_problem{rclqr::uav_benchmark()}; });
}

rclqr_status rclqr_problem_from_json(const char* json, rclqr_problem** out) {
  RCLQR_REQUIRE(json && out);
  return guarded([&] { *out = new rclqr_problem{rclqr::parse_config(json).problem}; });
}

void rclqr_problem_free(rclqr_problem* problem) { delete problem; }

rclqr_status rclqr_problem_dims(const rclqr_problem* problem, size_t* n, size_t* m) {
  RCLQR_REQUIRE(problem);
  if (n) *n = static_cast<size_t>(problem->value.sys.n());
  if (m) *m = static_cast<size_t>(problem->value.sys.m());
  return RCLQR_OK;
}

rclqr_status rclqr_problem_rho_bar(const rclqr_problem* problem, double* rho_bar) {
  RCLQR_REQUIRE(problem && rho_bar);
  *rho_bar = problem->value.risk.rho_bar;
  return RCLQR_OK;
}

rclqr_status rclqr_problem_noise_stats(const rclqr_problem* problem, double* wbar, double* W,
                                       double* M3, double* m4) {
  RCLQR_REQUIRE(problem);
  const rclqr::NoiseStats& s = problem->value.noise.stats();
  copy_out(s.wbar, wbar);
  copy_out(s.W, W);
  copy_out(s.M3, M3);
  if (m4) *m4 = s.m4;
  return RCLQR_OK;
}

rclqr_status rclqr_problem_initial_policy(const rclqr_problem* problem, rclqr_policy** out) {
  RCLQR_REQUIRE(problem && out);
  return guarded([&] { *out = new rclqr_policy{problem->value.initial}; });
}

rclqr_status rclqr_policy_create(size_t m, size_t n, const double* K, const double* l,
                                 rclqr_policy** out) {
  RCLQR_REQUIRE(m > 0 && n > 0 && K && l && out);
  return guarded([&] {
    rclqr::Policy p{row_major(K, m, n), Eigen::Map<const rclqr::Vec>(l, static_cast<Eigen::Index>(m))};
    rclqr::require_finite(p.as_matrix(), "policy");
    *out = new rclqr_policy{std::move(p)};
  });
}

void rclqr_policy_free(rclqr_policy* policy) { delete policy; }

rclqr_status rclqr_policy_dims(const rclqr_policy* policy, size_t* m, size_t* n) {
  RCLQR_REQUIRE(policy);
  if (m) *m = static_cast<size_t>(policy->value.m());
  if (n) *n = static_cast<size_t>(policy->value.n());
  return RCLQR_OK;
}

rclqr_status rclqr_policy_get(const rclqr_policy* policy, double* K, double* l) {
  RCLQR_REQUIRE(policy);
  copy_out(policy->value.K, K);
  copy_out(policy->value.l, l);
  return RCLQR_OK;
}

rclqr_status rclqr_spectral_radius(const rclqr_problem* problem, const rclqr_policy* policy,
                                   double* out) {
  RCLQR_REQUIRE(problem && policy && out);
  return guarded([&] {
    *out = rclqr::closed_loop_spectral_radius(problem->value.sys, policy->value);
  });
}

rclqr_status rclqr_is_stabilizing(const rclqr_problem* problem, const rclqr_policy* policy,
                                  double margin, int* out) {
  RCLQR_REQUIRE(problem && policy && out);
  return guarded([&] {
    *out = rclqr::is_stabilizing(problem->value.sys, policy->value, margin) ? 1 : 0;
  });
}

rclqr_status rclqr_evaluate(const rclqr_problem* problem, const rclqr_policy* policy, double mu,
                            rclqr_evaluation* out, double* grad) {
  RCLQR_REQUIRE(problem && policy && out && mu >= 0.0);
  return guarded([&] {
    const auto rl = rclqr::RiskLagrangian::from_problem(problem->value, mu);
    const rclqr::PolicyEvaluation ev = rclqr::evaluate(rl, policy->value);
    out->L = ev.L_value;
    out->J = ev.J_value;
    out->Jc = ev.Jc_value;
    copy_out(ev.grad, grad);
  });
}

rclqr_status rclqr_stationary_point(const rclqr_problem* problem, double mu, rclqr_policy** out) {
  RCLQR_REQUIRE(problem && out && mu >= 0.0);
  return guarded([&] {
    const auto rl = rclqr::RiskLagrangian::from_problem(problem->value, mu);
    *out = new rclqr_policy{rclqr::stationary_point(rl)};
  });
}

rclqr_status rclqr_dual_value(const rclqr_problem* problem, double mu, double* out) {
  RCLQR_REQUIRE(problem && out && mu >= 0.0);
  return guarded([&] {
    *out = rclqr::dual_value(rclqr::RiskLagrangian::from_problem(problem->value, mu)).value;
  });
}

rclqr_status rclqr_maximize_dual(const rclqr_problem* problem, double* mu, double* value,
                                 int* bounded) {
  RCLQR_REQUIRE(problem);
  return guarded([&] {
    const rclqr::DualOptimum d = rclqr::maximize_dual(problem->value);
    if (mu) *mu = d.mu;
    if (value) *value = d.value;
    if (bounded) *bounded = d.bounded ? 1 : 0;
  });
}

void rclqr_rollout_config_default(rclqr_rollout_config* cfg) {
  if (cfg) *cfg = to_c(rclqr::RolloutConfig{});
}

rclqr_status rclqr_rollout(const rclqr_problem* problem, const rclqr_policy* policy, double mu,
                           const rclqr_rollout_config* cfg, rclqr_trajectory_fn sink,
                           void* user, rclqr_oracle_sample* out) {
  RCLQR_REQUIRE(problem && policy && cfg && out && mu >= 0.0);
  return guarded([&] {
    const auto rl = rclqr::RiskLagrangian::from_problem(problem->value, mu);
    rclqr::TrajectorySink cb;
    if (sink) {
      cb = [&](std::size_t t, const rclqr::Vec& x, const rclqr::Vec& u, double cost) {
        sink(user, t, x.data(), static_cast<size_t>(x.size()), u.data(),
             static_cast<size_t>(u.size()), cost);
      };
    }
    const rclqr::OracleSample s =
        rclqr::rollout_cost(rl, problem->value.noise, policy->value,
                            from_c(*cfg, problem->value.sys.n()), cb);
    *out = rclqr_oracle_sample{s.L_hat, s.J_hat, s.Jc_hat, s.trajectory_len};
  });
}

void rclqr_random_search_config_default(rclqr_random_search_config* cfg) {
  if (cfg) *cfg = to_c(rclqr::RandomSearchConfig{});
}

void rclqr_primal_dual_config_default(rclqr_primal_dual_config* cfg) {
  if (cfg) *cfg = to_c(rclqr::PrimalDualConfig{});
}

rclqr_status rclqr_random_search(const rclqr_problem* problem, double mu, const rclqr_policy* p0,
                                 const rclqr_random_search_config* cfg, rclqr_run** out) {
  RCLQR_REQUIRE(problem && cfg && out && mu >= 0.0 && valid_enums(*cfg));
  return guarded([&] {
    const auto rl = rclqr::RiskLagrangian::from_problem(problem->value, mu);
    rclqr::RandomSearchResult res =
        rclqr::random_search(rl, problem->value.noise, start_policy(problem, p0),
                             from_c(*cfg, problem->value.sys.n()));
    auto* run = new rclqr_run;
    run->log = std::move(res.log);
    run->policy = std::move(res.policy);
    run->message = std::move(res.message);
    run->summary.failed = res.status == rclqr::RunStatus::kFailed ? 1 : 0;
    run->summary.mu = mu;
    run->summary.mu_average = mu;
    *out = run;
  });
}

rclqr_status rclqr_primal_dual(const rclqr_problem* problem, const rclqr_primal_dual_config* cfg,
                               const rclqr_policy* p0, rclqr_run** out) {
  RCLQR_REQUIRE(problem && cfg && out && valid_enums(cfg->inner_search) &&
                (cfg->schedule == RCLQR_STEP_DIMINISHING || cfg->schedule == RCLQR_STEP_CONSTANT) &&
                (cfg->inner == RCLQR_INNER_EXACT || cfg->inner == RCLQR_INNER_RANDOM_SEARCH));
  return guarded([&] {
    rclqr::PrimalDualResult res = rclqr::primal_dual(
        problem->value, from_c(*cfg, problem->value.sys.n()), start_policy(problem, p0));
    auto* run = new rclqr_run;
    run->log = std::move(res.log);
    run->policy = std::move(res.policy);
    run->message = std::move(res.message);
    rclqr_run_summary& s = run->summary;
    s.failed = res.status == rclqr::RunStatus::kFailed ? 1 : 0;
    s.converged = res.converged ? 1 : 0;
    s.mu = res.mu;
    s.mu_average = res.mu_average;
    s.J = res.J;
    s.Jc = res.Jc;
    s.dual = res.dual;
    s.duality_gap = res.duality_gap;
    s.complementary_slackness = res.complementary_slackness;
    *out = run;
  });
}

rclqr_status rclqr_diagnose_random_search(const rclqr_problem* problem, double mu,
                                          const rclqr_policy* p0,
                                          const rclqr_random_search_config* cfg, size_t window,
                                          rclqr_search_diagnostics* out) {
  RCLQR_REQUIRE(problem && cfg && out && window > 1 && valid_enums(*cfg));
  return guarded([&] {
    const auto rl = rclqr::RiskLagrangian::from_problem(problem->value, mu);
    const rclqr::SearchDiagnostics d = rclqr::diagnose_random_search(
        rl, problem->value.noise, start_policy(problem, p0),
        from_c(*cfg, problem->value.sys.n()), window);
    *out = rclqr_search_diagnostics{d.G_inf, d.G_2, d.beta, d.eta_bound, d.step_too_large ? 1 : 0};
  });
}

void rclqr_run_free(rclqr_run* run) { delete run; }

size_t rclqr_run_record_count(const rclqr_run* run) { return run ? run->log.size() : 0; }

rclqr_status rclqr_run_record(const rclqr_run* run, size_t index, rclqr_iterate_record* out) {
  RCLQR_REQUIRE(run && out && index < run->log.size());
  const rclqr::IterateRecord& r = run->log.records()[index];
  *out = rclqr_iterate_record{r.iter,      r.mu,        r.L_est,         r.J_est,
                              r.Jc_est,    r.grad_norm, r.eta_effective, r.wallclock_ms};
  return RCLQR_OK;
}

size_t rclqr_run_snapshot_count(const rclqr_run* run) {
  return run ? run->log.snapshots().size() : 0;
}

rclqr_status rclqr_run_snapshot(const rclqr_run* run, size_t index, size_t* iter,
                                rclqr_policy** out) {
  RCLQR_REQUIRE(run && out && index < run->log.snapshots().size());
  const rclqr::PolicySnapshot& s = run->log.snapshots()[index];
  if (iter) *iter = s.iter;
  return guarded([&] { *out = new rclqr_policy{s.policy}; });
}

rclqr_status rclqr_run_final_policy(const rclqr_run* run, rclqr_policy** out) {
  RCLQR_REQUIRE(run && out);
  return guarded([&] { *out = new rclqr_policy{run->policy}; });
}

rclqr_status rclqr_run_summary_get(const rclqr_run* run, rclqr_run_summary* out) {
  RCLQR_REQUIRE(run && out);
  *out = run->summary;
  return RCLQR_OK;
}

const char* rclqr_run_message(const rclqr_run* run) { return run ? run->message.c_str() : ""; }

rclqr_status rclqr_run_write_csv(const rclqr_run* run, const char* path) {
  RCLQR_REQUIRE(run && path);
  std::ofstream os(path, std::ios::binary);
  if (!os) return fail(RCLQR_ERR_IO, std::string("cannot open '") + path + "' for writing");
  run->log.write_csv(os);
  os.close();
  if (!os) return fail(RCLQR_ERR_IO, std::string("write failed for '") + path + "'");
  return RCLQR_OK;
}

rclqr_status rclqr_run_checks(const rclqr_problem* problem, uint64_t seed, double mu,
                              rclqr_check_fn report, void* user, int* all_passed) {
  RCLQR_REQUIRE(problem && mu >= 0.0);
  return guarded([&] {
    const auto results = rclqr::run_checks(problem->value, rclqr::CheckOptions{seed, mu});
    if (report) {
      for (const rclqr::CheckResult& r : results) {
        report(user, r.name.c_str(), r.measured, r.tolerance, r.passed ? 1 : 0,
               r.informational ? 1 : 0, r.detail.c_str());
      }
    }
    if (all_passed) *all_passed = rclqr::all_passed(results) ? 1 : 0;
  });
}

rclqr_status rclqr_experiment_load(const char* path, rclqr_experiment** out) {
  RCLQR_REQUIRE(path && out);
  return guarded([&] { *out = new rclqr_experiment{rclqr::load_config(path), {}}; });
}

rclqr_status rclqr_experiment_parse(const char* json, rclqr_experiment** out) {
  RCLQR_REQUIRE(json && out);
  return guarded([&] { *out = new rclqr_experiment{rclqr::parse_config(json), {}}; });
}

rclqr_status rclqr_experiment_default(rclqr_experiment** out) {
  RCLQR_REQUIRE(out);
  return guarded([&] { *out = new rclqr_experiment{rclqr::ExperimentConfig{}, {}}; });
}

void rclqr_experiment_free(rclqr_experiment* exp) { delete exp; }

rclqr_status rclqr_experiment_problem(const rclqr_experiment* exp, rclqr_problem** out) {
  RCLQR_REQUIRE(exp && out);
  return guarded([&] { *out = new rclqr_problem{exp->cfg.problem}; });
}

rclqr_status rclqr_experiment_random_search(const rclqr_experiment* exp,
                                            rclqr_random_search_config* cfg, double* mu) {
  RCLQR_REQUIRE(exp && cfg);
  *cfg = to_c(exp->cfg.random_search);
  cfg->record_wallclock = exp->cfg.record_wallclock ? 1 : 0;
  if (mu) *mu = exp->cfg.learn_mu;
  return RCLQR_OK;
}

rclqr_status rclqr_experiment_primal_dual(const rclqr_experiment* exp,
                                          rclqr_primal_dual_config* cfg) {
  RCLQR_REQUIRE(exp && cfg);
  *cfg = to_c(exp->cfg.primal_dual);
  cfg->record_wallclock = exp->cfg.record_wallclock ? 1 : 0;
  return RCLQR_OK;
}

rclqr_status rclqr_experiment_rollout(const rclqr_experiment* exp, rclqr_rollout_config* cfg) {
  RCLQR_REQUIRE(exp && cfg);
  *cfg = to_c(exp->cfg.rollout);
  return RCLQR_OK;
}

size_t rclqr_experiment_seed_count(const rclqr_experiment* exp) {
  return exp ? exp->cfg.seeds.size() : 0;
}

rclqr_status rclqr_experiment_seeds(const rclqr_experiment* exp, uint64_t* out, size_t capacity) {
  RCLQR_REQUIRE(exp && (out || capacity == 0));
  for (size_t i = 0; i < capacity && i < exp->cfg.seeds.size(); ++i) out[i] = exp->cfg.seeds[i];
  return RCLQR_OK;
}

const char* rclqr_experiment_output_dir(const rclqr_experiment* exp) {
  return exp ? exp->cfg.output_dir.c_str() : "";
}

int rclqr_experiment_wallclock(const rclqr_experiment* exp) {
  return exp && exp->cfg.record_wallclock ? 1 : 0;
}

int rclqr_experiment_trajectory(const rclqr_experiment* exp) {
  return exp && exp->cfg.dump_trajectory ? 1 : 0;
}

rclqr_status rclqr_experiment_set_seeds(rclqr_experiment* exp, const uint64_t* seeds,
                                        size_t count) {
  RCLQR_REQUIRE(exp && seeds && count > 0);
  exp->cfg.seeds.assign(seeds, seeds + count);
  return RCLQR_OK;
}

rclqr_status rclqr_experiment_set_output_dir(rclqr_experiment* exp, const char* dir) {
  RCLQR_REQUIRE(exp && dir && *dir);
  exp->cfg.output_dir = dir;
  return RCLQR_OK;
}

rclqr_status rclqr_experiment_set_wallclock(rclqr_experiment* exp, int enabled) {
  RCLQR_REQUIRE(exp);
  exp->cfg.record_wallclock = enabled != 0;
  return RCLQR_OK;
}

rclqr_status rclqr_experiment_set_inner_mode(rclqr_experiment* exp, rclqr_inner_mode mode) {
  RCLQR_REQUIRE(exp && (mode == RCLQR_INNER_EXACT || mode == RCLQR_INNER_RANDOM_SEARCH));
  exp->cfg.primal_dual.inner = static_cast<rclqr::InnerMode>(mode);
  return RCLQR_OK;
}

const char* rclqr_experiment_resolved_json(rclqr_experiment* exp) {
  if (!exp) return "";
  exp->resolved = exp->cfg.resolved_json();
  return exp->resolved.c_str();
}

rclqr_status rclqr_parse_seeds(const char* text, uint64_t* out, size_t capacity, size_t* count) {
  RCLQR_REQUIRE(text && count && (out || capacity == 0));
  return guarded([&] {
    const auto seeds = rclqr::parse_seed_list(text);
    for (size_t i = 0; i < capacity && i < seeds.size(); ++i) out[i] = seeds[i];
    *count = seeds.size();
  });
}

}  // extern "C"
