/* C interface to the risk-constrained LQR library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an rclqr_status;
 * on failure rclqr_last_error() holds a message for the calling thread.
 * Matrices are passed row-major. */
#ifndef RCLQR_RCLQR_H
#define RCLQR_RCLQR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RCLQR_API __declspec(dllexport)
#else
#define RCLQR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rclqr_status {
  RCLQR_OK = 0,
  RCLQR_ERR_DIMENSION = 1,
  RCLQR_ERR_INSTABILITY = 2,
  RCLQR_ERR_NUMERICAL = 3,
  RCLQR_ERR_NONCONVERGENCE = 4,
  RCLQR_ERR_DEFINITENESS = 5,
  RCLQR_ERR_CONFIG = 6,
  RCLQR_ERR_DIVERGENCE = 7,
  RCLQR_ERR_PRECONDITION = 8,
  RCLQR_ERR_INVALID_ARGUMENT = 9,
  RCLQR_ERR_IO = 10,
  RCLQR_ERR_INTERNAL = 11
} rclqr_status;

RCLQR_API const char* rclqr_last_error(void);
RCLQR_API const char* rclqr_status_name(rclqr_status status);

typedef struct rclqr_problem rclqr_problem;
typedef struct rclqr_policy rclqr_policy;
typedef struct rclqr_run rclqr_run;
typedef struct rclqr_experiment rclqr_experiment;

/* ---- problems ---- */

/* The built-in UAV benchmark. */
RCLQR_API rclqr_status rclqr_problem_uav(rclqr_problem** out);
/* Problem section of a JSON config (same format as experiment files). */
RCLQR_API rclqr_status rclqr_problem_from_json(const char* json, rclqr_problem** out);
RCLQR_API void rclqr_problem_free(rclqr_problem* problem);

RCLQR_API rclqr_status rclqr_problem_dims(const rclqr_problem* problem, size_t* n, size_t* m);
RCLQR_API rclqr_status rclqr_problem_rho_bar(const rclqr_problem* problem, double* rho_bar);
/* wbar: n, W: n*n, M3: n; any pointer may be NULL. */
RCLQR_API rclqr_status rclqr_problem_noise_stats(const rclqr_problem* problem, double* wbar,
                                                 double* W, double* M3, double* m4);
RCLQR_API rclqr_status rclqr_problem_initial_policy(const rclqr_problem* problem,
                                                    rclqr_policy** out);

/* ---- policies: u = -K x + l ---- */

RCLQR_API rclqr_status rclqr_policy_create(size_t m, size_t n, const double* K,
                                           const double* l, rclqr_policy** out);
RCLQR_API void rclqr_policy_free(rclqr_policy* policy);
RCLQR_API rclqr_status rclqr_policy_dims(const rclqr_policy* policy, size_t* m, size_t* n);
/* K: m*n, l: m; either may be NULL. */
RCLQR_API rclqr_status rclqr_policy_get(const rclqr_policy* policy, double* K, double* l);

RCLQR_API rclqr_status rclqr_spectral_radius(const rclqr_problem* problem,
                                             const rclqr_policy* policy, double* out);
RCLQR_API rclqr_status rclqr_is_stabilizing(const rclqr_problem* problem,
                                            const rclqr_policy* policy, double margin,
                                            int* out);

/* ---- exact model-based evaluation ---- */

typedef struct rclqr_evaluation {
  double L;   /* Lagrangian at the given multiplier */
  double J;   /* average quadratic cost */
  double Jc;  /* average predictive variance term */
} rclqr_evaluation;

/* grad (m*(n+1), [dK dl] row-major) may be NULL. */
RCLQR_API rclqr_status rclqr_evaluate(const rclqr_problem* problem, const rclqr_policy* policy,
                                      double mu, rclqr_evaluation* out, double* grad);
RCLQR_API rclqr_status rclqr_stationary_point(const rclqr_problem* problem, double mu,
                                              rclqr_policy** out);
RCLQR_API rclqr_status rclqr_dual_value(const rclqr_problem* problem, double mu, double* out);
/* Maximizer of the dual function by bisection; *bounded = 0 when the
 * constraint stays violated up to the cap (no interior feasible point). */
RCLQR_API rclqr_status rclqr_maximize_dual(const rclqr_problem* problem, double* mu,
                                           double* value, int* bounded);

/* ---- sampled cost oracle ---- */

typedef struct rclqr_rollout_config {
  size_t horizon;
  size_t burn_in;
  const double* x0; /* n entries, NULL for the zero state; copied on use */
  uint64_t seed;
  double divergence_guard;
} rclqr_rollout_config;

typedef struct rclqr_oracle_sample {
  double L_hat;
  double J_hat;
  double Jc_hat;
  size_t length;
} rclqr_oracle_sample;

typedef void (*rclqr_trajectory_fn)(void* user, size_t t, const double* x, size_t n,
                                    const double* u, size_t m, double cost);

RCLQR_API void rclqr_rollout_config_default(rclqr_rollout_config* cfg);
/* sink may be NULL. */
RCLQR_API rclqr_status rclqr_rollout(const rclqr_problem* problem, const rclqr_policy* policy,
                                     double mu, const rclqr_rollout_config* cfg,
                                     rclqr_trajectory_fn sink, void* user,
                                     rclqr_oracle_sample* out);

/* ---- optimizers ---- */

typedef enum { RCLQR_SAFEGUARD_NONE = 0, RCLQR_SAFEGUARD_REJECT_UNSTABLE = 1,
               RCLQR_SAFEGUARD_SUBLEVEL = 2 } rclqr_safeguard;
typedef enum { RCLQR_GEOMETRY_SPHERE = 0, RCLQR_GEOMETRY_BALL = 1 } rclqr_geometry;
typedef enum { RCLQR_ESTIMATOR_ONE_POINT = 0, RCLQR_ESTIMATOR_ANTITHETIC = 1 } rclqr_estimator;
typedef enum { RCLQR_STEP_DIMINISHING = 0, RCLQR_STEP_CONSTANT = 1 } rclqr_step_kind;
typedef enum { RCLQR_INNER_EXACT = 0, RCLQR_INNER_RANDOM_SEARCH = 1 } rclqr_inner_mode;

typedef struct rclqr_random_search_config {
  size_t iterations;
  double radius;
  double step;
  rclqr_rollout_config oracle;
  uint64_t seed;
  rclqr_safeguard safeguard;
  double sublevel_factor;
  rclqr_geometry geometry;
  rclqr_estimator estimator;
  size_t max_resamples;
  size_t max_halvings;
  size_t snapshot_every;
  int record_wallclock;
} rclqr_random_search_config;

typedef struct rclqr_primal_dual_config {
  double mu_init;
  size_t outer_iters;
  rclqr_step_kind schedule;
  double step_scale; /* <= 0 selects the automatic scale */
  rclqr_inner_mode inner;
  rclqr_random_search_config inner_search;
  int warm_start;
  size_t risk_oracle_T;
  uint64_t seed;
  double tolerance;
  double mu_max;
  int record_wallclock;
} rclqr_primal_dual_config;

RCLQR_API void rclqr_random_search_config_default(rclqr_random_search_config* cfg);
RCLQR_API void rclqr_primal_dual_config_default(rclqr_primal_dual_config* cfg);

/* p0 == NULL starts from the problem's initial policy. A run that stops
 * early (retries exhausted, multiplier overflow) still returns RCLQR_OK and
 * a run handle; inspect rclqr_run_summary().failed. */
RCLQR_API rclqr_status rclqr_random_search(const rclqr_problem* problem, double mu,
                                           const rclqr_policy* p0,
                                           const rclqr_random_search_config* cfg,
                                           rclqr_run** out);
RCLQR_API rclqr_status rclqr_primal_dual(const rclqr_problem* problem,
                                         const rclqr_primal_dual_config* cfg,
                                         const rclqr_policy* p0, rclqr_run** out);

typedef struct rclqr_search_diagnostics {
  double G_inf;
  double G_2;
  double beta;
  double eta_bound;
  int step_too_large;
} rclqr_search_diagnostics;

RCLQR_API rclqr_status rclqr_diagnose_random_search(const rclqr_problem* problem, double mu,
                                                    const rclqr_policy* p0,
                                                    const rclqr_random_search_config* cfg,
                                                    size_t window,
                                                    rclqr_search_diagnostics* out);

/* ---- run results ---- */

typedef struct rclqr_iterate_record {
  size_t iter;
  double mu;
  double L_est;
  double J_est;
  double Jc_est;
  double grad_norm;
  double eta_effective;
  double wallclock_ms;
} rclqr_iterate_record;

typedef struct rclqr_run_summary {
  int failed;
  int converged;      /* primal-dual, exact inner mode only */
  double mu;          /* final multiplier (0 for random search at mu = 0) */
  double mu_average;
  double J;           /* exact values at the final policy (primal-dual) */
  double Jc;
  double dual;
  double duality_gap;
  double complementary_slackness;
} rclqr_run_summary;

RCLQR_API void rclqr_run_free(rclqr_run* run);
RCLQR_API size_t rclqr_run_record_count(const rclqr_run* run);
RCLQR_API rclqr_status rclqr_run_record(const rclqr_run* run, size_t index,
                                        rclqr_iterate_record* out);
RCLQR_API size_t rclqr_run_snapshot_count(const rclqr_run* run);
RCLQR_API rclqr_status rclqr_run_snapshot(const rclqr_run* run, size_t index, size_t* iter,
                                          rclqr_policy** out);
RCLQR_API rclqr_status rclqr_run_final_policy(const rclqr_run* run, rclqr_policy** out);
RCLQR_API rclqr_status rclqr_run_summary_get(const rclqr_run* run, rclqr_run_summary* out);
/* Empty string when the run finished normally. Valid until the run is freed. */
RCLQR_API const char* rclqr_run_message(const rclqr_run* run);
RCLQR_API rclqr_status rclqr_run_write_csv(const rclqr_run* run, const char* path);

/* ---- invariant suite ---- */

typedef void (*rclqr_check_fn)(void* user, const char* name, double measured, double tolerance,
                               int passed, int informational, const char* detail);

/* Calls `report` once per check; *all_passed ignores informational lines. */
RCLQR_API rclqr_status rclqr_run_checks(const rclqr_problem* problem, uint64_t seed, double mu,
                                        rclqr_check_fn report, void* user, int* all_passed);

/* ---- experiment configs ---- */

RCLQR_API rclqr_status rclqr_experiment_load(const char* path, rclqr_experiment** out);
RCLQR_API rclqr_status rclqr_experiment_parse(const char* json, rclqr_experiment** out);
/* Default experiment: the UAV benchmark with library defaults. */
RCLQR_API rclqr_status rclqr_experiment_default(rclqr_experiment** out);
RCLQR_API void rclqr_experiment_free(rclqr_experiment* exp);

RCLQR_API rclqr_status rclqr_experiment_problem(const rclqr_experiment* exp, rclqr_problem** out);
/* Pointers inside the returned configs stay valid while exp lives. */
RCLQR_API rclqr_status rclqr_experiment_random_search(const rclqr_experiment* exp,
                                                      rclqr_random_search_config* cfg,
                                                      double* mu);
RCLQR_API rclqr_status rclqr_experiment_primal_dual(const rclqr_experiment* exp,
                                                    rclqr_primal_dual_config* cfg);
RCLQR_API rclqr_status rclqr_experiment_rollout(const rclqr_experiment* exp,
                                                rclqr_rollout_config* cfg);
RCLQR_API size_t rclqr_experiment_seed_count(const rclqr_experiment* exp);
RCLQR_API rclqr_status rclqr_experiment_seeds(const rclqr_experiment* exp, uint64_t* out,
                                              size_t capacity);
RCLQR_API const char* rclqr_experiment_output_dir(const rclqr_experiment* exp);
RCLQR_API int rclqr_experiment_wallclock(const rclqr_experiment* exp);
RCLQR_API int rclqr_experiment_trajectory(const rclqr_experiment* exp);

/* Overrides (reflected in the resolved config). */
RCLQR_API rclqr_status rclqr_experiment_set_seeds(rclqr_experiment* exp, const uint64_t* seeds,
                                                  size_t count);
RCLQR_API rclqr_status rclqr_experiment_set_output_dir(rclqr_experiment* exp, const char* dir);
RCLQR_API rclqr_status rclqr_experiment_set_wallclock(rclqr_experiment* exp, int enabled);
RCLQR_API rclqr_status rclqr_experiment_set_inner_mode(rclqr_experiment* exp,
                                                       rclqr_inner_mode mode);

/* Fully-resolved config as JSON; valid until exp is freed or modified. */
RCLQR_API const char* rclqr_experiment_resolved_json(rclqr_experiment* exp);

/* "3,7,11" is a list, "20" means seeds 0..19. Writes up to `capacity`
 * seeds and the total into *count. */
RCLQR_API rclqr_status rclqr_parse_seeds(const char* text, uint64_t* out, size_t capacity,
                                         size_t* count);

#ifdef __cplusplus
}
#endif

#endif
