#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "handles.hpp"
#include "output.hpp"

namespace {

using cli::ApiError;
using json = nlohmann::json;
namespace fs = std::filesystem;

enum ExitCode { kSuccess = 0, kAssertion = 1, kConfigError = 2, kNumericalFailure = 3 };

struct Options {
  std::string config;
  std::string out;
  std::string seeds;
  unsigned workers = 0;
  bool exact = false;
  bool model_free = false;
  bool wallclock = false;
  bool trajectory = false;
  bool diagnose = false;
};

int exit_code_for(rclqr_status status) {
  switch (status) {
    case RCLQR_ERR_CONFIG:
    case RCLQR_ERR_DEFINITENESS:
    case RCLQR_ERR_PRECONDITION:
    case RCLQR_ERR_DIMENSION:
    case RCLQR_ERR_INVALID_ARGUMENT:
      return kConfigError;
    default:
      return kNumericalFailure;
  }
}

// Loaded experiment with command-line overrides applied.
struct Context {
  cli::ExperimentPtr exp;
  cli::ProblemPtr problem;
  std::vector<std::uint64_t> seeds;
  fs::path out;
  unsigned workers = 1;
  size_t n = 0;
  size_t m = 0;
  double rho_bar = 0.0;
};

Context load(const Options& opt) {
  Context ctx;
  rclqr_experiment* exp = nullptr;
  if (opt.config.empty()) {
    CLI_CHECK(rclqr_experiment_default(&exp));
  } else {
    CLI_CHECK(rclqr_experiment_load(opt.config.c_str(), &exp));
  }
  ctx.exp.reset(exp);

  if (!opt.seeds.empty()) {
    size_t count = 0;
    CLI_CHECK(rclqr_parse_seeds(opt.seeds.c_str(), nullptr, 0, &count));
    std::vector<std::uint64_t> seeds(count);
    CLI_CHECK(rclqr_parse_seeds(opt.seeds.c_str(), seeds.data(), seeds.size(), &count));
    CLI_CHECK(rclqr_experiment_set_seeds(exp, seeds.data(), seeds.size()));
  }
  if (!opt.out.empty()) CLI_CHECK(rclqr_experiment_set_output_dir(exp, opt.out.c_str()));
  if (opt.wallclock) CLI_CHECK(rclqr_experiment_set_wallclock(exp, 1));
  if (opt.exact) CLI_CHECK(rclqr_experiment_set_inner_mode(exp, RCLQR_INNER_EXACT));
  if (opt.model_free) CLI_CHECK(rclqr_experiment_set_inner_mode(exp, RCLQR_INNER_RANDOM_SEARCH));

  ctx.seeds.resize(rclqr_experiment_seed_count(exp));
  CLI_CHECK(rclqr_experiment_seeds(exp, ctx.seeds.data(), ctx.seeds.size()));
  ctx.out = rclqr_experiment_output_dir(exp);
  ctx.workers = opt.workers > 0 ? opt.workers : std::max(1u, std::thread::hardware_concurrency());

  rclqr_problem* problem = nullptr;
  CLI_CHECK(rclqr_experiment_problem(exp, &problem));
  ctx.problem.reset(problem);
  CLI_CHECK(rclqr_problem_dims(problem, &ctx.n, &ctx.m));
  CLI_CHECK(rclqr_problem_rho_bar(problem, &ctx.rho_bar));

  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw ApiError(RCLQR_ERR_IO, "cannot create '" + ctx.out.string() + "': " + ec.message());
  cli::write_text((ctx.out / "config.resolved.json").string(),
                  rclqr_experiment_resolved_json(exp));
  return ctx;
}

json resolved_config(const Context& ctx) {
  return json::parse(rclqr_experiment_resolved_json(ctx.exp.get()));
}

json policy_json(const rclqr_policy* p) {
  size_t m = 0;
  size_t n = 0;
  CLI_CHECK(rclqr_policy_dims(p, &m, &n));
  std::vector<double> K(m * n);
  std::vector<double> l(m);
  CLI_CHECK(rclqr_policy_get(p, K.data(), l.data()));
  return json{{"K", K}, {"l", l}, {"rows", m}, {"cols", n}};
}

// Runs job(i) for i in [0, count) on `workers` threads. Exceptions are
// captured per job.
std::vector<std::exception_ptr> run_pool(size_t count, unsigned workers,
                                         const std::function<void(size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const unsigned width = static_cast<unsigned>(std::min<size_t>(workers, count));
  for (unsigned t = 1; t < width; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  return errors;
}

std::string describe(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "unknown error";
}

std::string seed_file(const Context& ctx, const std::string& stem, std::uint64_t seed) {
  return (ctx.out / (stem + "_seed_" + std::to_string(seed) + ".csv")).string();
}

// ---- check ----

struct CheckLine {
  std::string name;
  double measured;
  double tolerance;
  bool passed;
  bool info;
  std::string detail;
};

int cmd_check(const Options& opt) {
  Context ctx = load(opt);
  double mu = 0.0;
  rclqr_random_search_config rs;
  CLI_CHECK(rclqr_experiment_random_search(ctx.exp.get(), &rs, &mu));

  std::vector<CheckLine> lines;
  int all = 0;
  CLI_CHECK(rclqr_run_checks(
      ctx.problem.get(), ctx.seeds.front(), mu,
      [](void* user, const char* name, double measured, double tolerance, int passed, int info,
         const char* detail) {
        static_cast<std::vector<CheckLine>*>(user)->push_back(
            {name, measured, tolerance, passed != 0, info != 0, detail});
      },
      &lines, &all));

  std::string csv = std::string("# schema: ") + cli::kCheckSchema +
                    "\nname,measured,tolerance,status\n";
  for (const CheckLine& c : lines) {
    const char* status = c.info ? "INFO" : (c.passed ? "PASS" : "FAIL");
    std::printf("%-4s %-58s measured=%-12.4g tol=%-10.3g %s\n", status, c.name.c_str(),
                c.measured, c.tolerance, c.detail.c_str());
    csv += "\"" + c.name + "\"," + cli::fmt(c.measured) + "," + cli::fmt(c.tolerance) + "," +
           status + "\n";
  }
  cli::write_text((ctx.out / "check_report.csv").string(), csv);
  std::printf("%s\n", all ? "all checks passed" : "some checks FAILED");
  return all ? kSuccess : kAssertion;
}

// ---- solve-exact ----

struct ExactSolution {
  cli::RunPtr run;
  cli::PolicyPtr policy;
  rclqr_run_summary summary{};
};

ExactSolution solve_exact(const Context& ctx) {
  rclqr_primal_dual_config pd;
  CLI_CHECK(rclqr_experiment_primal_dual(ctx.exp.get(), &pd));
  pd.inner = RCLQR_INNER_EXACT;
  pd.seed = ctx.seeds.front();
  ExactSolution sol;
  rclqr_run* run = nullptr;
  CLI_CHECK(rclqr_primal_dual(ctx.problem.get(), &pd, nullptr, &run));
  sol.run.reset(run);
  rclqr_policy* p = nullptr;
  CLI_CHECK(rclqr_run_final_policy(run, &p));
  sol.policy.reset(p);
  CLI_CHECK(rclqr_run_summary_get(run, &sol.summary));
  return sol;
}

int cmd_solve_exact(const Options& opt) {
  Context ctx = load(opt);
  ExactSolution sol = solve_exact(ctx);
  CLI_CHECK(rclqr_run_write_csv(sol.run.get(), (ctx.out / "solve_exact.csv").string().c_str()));

  double mu_bisect = 0.0;
  double d_star = 0.0;
  int bounded = 0;
  CLI_CHECK(rclqr_maximize_dual(ctx.problem.get(), &mu_bisect, &d_star, &bounded));

  const rclqr_run_summary& s = sol.summary;
  const double cs_tol = 1e-6 * std::max(1.0, ctx.rho_bar);
  const bool gap_ok = s.duality_gap <= 1e-6;
  const bool cs_ok = s.complementary_slackness <= cs_tol;

  json summary;
  summary["policy"] = policy_json(sol.policy.get());
  summary["mu"] = s.mu;
  summary["mu_average"] = s.mu_average;
  summary["J"] = s.J;
  summary["Jc"] = s.Jc;
  summary["rho_bar"] = ctx.rho_bar;
  summary["dual_value"] = s.dual;
  summary["duality_gap"] = s.duality_gap;
  summary["complementary_slackness"] = s.complementary_slackness;
  summary["converged"] = s.converged != 0;
  summary["outer_iterations"] = rclqr_run_record_count(sol.run.get());
  summary["status"] = s.failed ? "failed" : "ok";
  summary["message"] = rclqr_run_message(sol.run.get());
  summary["dual_bisection"] = {{"mu", mu_bisect}, {"value", d_star}, {"bounded", bounded != 0}};
  summary["seed"] = ctx.seeds.front();
  summary["config"] = resolved_config(ctx);
  cli::write_text((ctx.out / "solve_exact_summary.json").string(), summary.dump(2) + "\n");

  std::printf("mu* = %.12g  J = %.12g  Jc = %.12g  rho_bar = %.12g\n", s.mu, s.J, s.Jc,
              ctx.rho_bar);
  std::printf("%s duality gap %.3e (tol 1e-06)\n", gap_ok ? "PASS" : "FAIL", s.duality_gap);
  std::printf("%s complementary slackness %.3e (tol %.3e)\n", cs_ok ? "PASS" : "FAIL",
              s.complementary_slackness, cs_tol);
  if (!bounded) {
    std::printf("note: Jc(X*(mu)) stays above rho_bar up to mu = %g; the risk constraint has no "
                "strictly feasible policy\n", mu_bisect);
  }
  if (s.failed) std::fprintf(stderr, "warning: %s\n", rclqr_run_message(sol.run.get()));
  return gap_ok && cs_ok ? kSuccess : kAssertion;
}

// ---- learn ----

struct SeedOutcome {
  bool failed = false;
  std::string message;
  std::vector<std::pair<size_t, double>> trace;  // (iteration, metric) at snapshots
  std::vector<std::pair<size_t, double>> trace2;
  std::vector<std::pair<size_t, double>> trace3;
  json policy;
  double final_mu = 0.0;
  double final_mu_average = 0.0;
  size_t iterations = 0;
};

json outcome_json(std::uint64_t seed, const SeedOutcome& o) {
  json j;
  j["seed"] = seed;
  j["status"] = o.failed ? "failed" : "ok";
  j["message"] = o.message;
  j["iterations"] = o.iterations;
  if (!o.policy.is_null()) j["policy"] = o.policy;
  return j;
}

// Per-iteration aggregate over the seeds that reached that iteration.
void aggregate(cli::LongTable& table, const std::string& prefix,
               const std::vector<SeedOutcome>& outcomes,
               std::vector<std::pair<size_t, double>> SeedOutcome::*member,
               const std::vector<std::uint64_t>& seeds) {
  std::map<size_t, std::vector<double>> by_iter;
  for (size_t k = 0; k < outcomes.size(); ++k) {
    for (const auto& [it, v] : outcomes[k].*member) {
      by_iter[it].push_back(v);
      table.add(prefix + "_seed_" + std::to_string(seeds[k]), it, v);
    }
  }
  for (const auto& [it, vals] : by_iter) table.add_summary(prefix, it, vals);
}

int cmd_learn(const Options& opt) {
  Context ctx = load(opt);
  double mu = 0.0;
  rclqr_random_search_config base;
  CLI_CHECK(rclqr_experiment_random_search(ctx.exp.get(), &base, &mu));
  double dual = 0.0;
  CLI_CHECK(rclqr_dual_value(ctx.problem.get(), mu, &dual));

  if (opt.diagnose) {
    rclqr_search_diagnostics d;
    rclqr_random_search_config cfg = base;
    cfg.seed = ctx.seeds.front();
    CLI_CHECK(rclqr_diagnose_random_search(ctx.problem.get(), mu, nullptr, &cfg, 1000, &d));
    std::fprintf(stderr, "diagnostics: G_inf=%.4g G_2=%.4g beta=%.4g eta_bound=%.4g\n", d.G_inf,
                 d.G_2, d.beta, d.eta_bound);
    if (d.step_too_large) {
      std::fprintf(stderr, "warning: step %.3g exceeds the curvature bound %.3g\n", base.step,
                   d.eta_bound);
    }
  }

  std::vector<SeedOutcome> outcomes(ctx.seeds.size());
  const auto errors = run_pool(ctx.seeds.size(), ctx.workers, [&](size_t k) {
    rclqr_random_search_config cfg = base;
    cfg.seed = ctx.seeds[k];
    rclqr_run* raw = nullptr;
    CLI_CHECK(rclqr_random_search(ctx.problem.get(), mu, nullptr, &cfg, &raw));
    cli::RunPtr run(raw);
    CLI_CHECK(rclqr_run_write_csv(run.get(), seed_file(ctx, "learn", ctx.seeds[k]).c_str()));
    SeedOutcome& o = outcomes[k];
    rclqr_run_summary s;
    CLI_CHECK(rclqr_run_summary_get(run.get(), &s));
    o.failed = s.failed != 0;
    o.message = rclqr_run_message(run.get());
    o.iterations = rclqr_run_record_count(run.get());
    for (size_t i = 0; i < rclqr_run_snapshot_count(run.get()); ++i) {
      size_t iter = 0;
      rclqr_policy* p = nullptr;
      CLI_CHECK(rclqr_run_snapshot(run.get(), i, &iter, &p));
      cli::PolicyPtr snap(p);
      rclqr_evaluation ev;
      CLI_CHECK(rclqr_evaluate(ctx.problem.get(), snap.get(), mu, &ev, nullptr));
      o.trace.emplace_back(iter, (ev.L - dual) / dual);
    }
    rclqr_policy* fp = nullptr;
    CLI_CHECK(rclqr_run_final_policy(run.get(), &fp));
    cli::PolicyPtr final_policy(fp);
    o.policy = policy_json(final_policy.get());
  });

  cli::LongTable table;
  aggregate(table, "rel_error", outcomes, &SeedOutcome::trace, ctx.seeds);
  table.write((ctx.out / "learn_aggregate.csv").string());

  json summary;
  summary["mu"] = mu;
  summary["dual_value"] = dual;
  summary["seeds"] = json::array();
  std::vector<double> finals;
  bool any_failed = false;
  for (size_t k = 0; k < outcomes.size(); ++k) {
    json j = outcome_json(ctx.seeds[k], outcomes[k]);
    if (errors[k]) {
      j["status"] = "error";
      j["message"] = describe(errors[k]);
    } else if (!outcomes[k].trace.empty()) {
      j["final_relative_error"] = outcomes[k].trace.back().second;
      finals.push_back(outcomes[k].trace.back().second);
    }
    any_failed = any_failed || errors[k] || outcomes[k].failed;
    summary["seeds"].push_back(std::move(j));
  }
  const cli::Summary final_stats = cli::summarize(finals);
  summary["final_relative_error"] = {{"median", final_stats.median}, {"q25", final_stats.q25},
                                     {"q75", final_stats.q75},       {"mean", final_stats.mean},
                                     {"std", final_stats.stddev}};
  summary["config"] = resolved_config(ctx);
  cli::write_text((ctx.out / "learn_summary.json").string(), summary.dump(2) + "\n");

  std::printf("D(mu=%g) = %.10g; final relative error median %.4g (IQR %.4g..%.4g) over %zu seeds\n",
              mu, dual, final_stats.median, final_stats.q25, final_stats.q75, finals.size());
  for (size_t k = 0; k < outcomes.size(); ++k) {
    if (errors[k]) std::fprintf(stderr, "seed %llu: %s\n", (unsigned long long)ctx.seeds[k],
                                describe(errors[k]).c_str());
    else if (outcomes[k].failed)
      std::fprintf(stderr, "seed %llu: %s\n", (unsigned long long)ctx.seeds[k],
                   outcomes[k].message.c_str());
  }
  return any_failed ? kNumericalFailure : kSuccess;
}

// ---- primal-dual ----

int cmd_primal_dual(const Options& opt) {
  Context ctx = load(opt);
  rclqr_primal_dual_config base;
  CLI_CHECK(rclqr_experiment_primal_dual(ctx.exp.get(), &base));

  // Reference optimum from the exact solver.
  ExactSolution ref = solve_exact(ctx);
  rclqr_evaluation ref_ev;
  CLI_CHECK(rclqr_evaluate(ctx.problem.get(), ref.policy.get(), 0.0, &ref_ev, nullptr));
  const double j_star = ref_ev.J;

  std::vector<SeedOutcome> outcomes(ctx.seeds.size());
  const auto errors = run_pool(ctx.seeds.size(), ctx.workers, [&](size_t k) {
    rclqr_primal_dual_config cfg = base;
    cfg.seed = ctx.seeds[k];
    rclqr_run* raw = nullptr;
    CLI_CHECK(rclqr_primal_dual(ctx.problem.get(), &cfg, nullptr, &raw));
    cli::RunPtr run(raw);
    CLI_CHECK(rclqr_run_write_csv(run.get(), seed_file(ctx, "primal_dual", ctx.seeds[k]).c_str()));
    SeedOutcome& o = outcomes[k];
    rclqr_run_summary s;
    CLI_CHECK(rclqr_run_summary_get(run.get(), &s));
    o.failed = s.failed != 0;
    o.message = rclqr_run_message(run.get());
    o.iterations = rclqr_run_record_count(run.get());
    o.final_mu = s.mu;
    o.final_mu_average = s.mu_average;
    for (size_t i = 0; i < rclqr_run_snapshot_count(run.get()); ++i) {
      size_t iter = 0;
      rclqr_policy* p = nullptr;
      CLI_CHECK(rclqr_run_snapshot(run.get(), i, &iter, &p));
      cli::PolicyPtr snap(p);
      rclqr_evaluation ev;
      CLI_CHECK(rclqr_evaluate(ctx.problem.get(), snap.get(), 0.0, &ev, nullptr));
      o.trace.emplace_back(iter, std::abs(ev.J - j_star) / j_star);
      o.trace2.emplace_back(iter, std::abs(ev.Jc - ctx.rho_bar) / ctx.rho_bar);
    }
    for (size_t i = 0; i < o.iterations; ++i) {
      rclqr_iterate_record r;
      CLI_CHECK(rclqr_run_record(run.get(), i, &r));
      o.trace3.emplace_back(r.iter, r.mu);
    }
    rclqr_policy* fp = nullptr;
    CLI_CHECK(rclqr_run_final_policy(run.get(), &fp));
    cli::PolicyPtr final_policy(fp);
    o.policy = policy_json(final_policy.get());
  });

  cli::LongTable table;
  aggregate(table, "optimality_gap", outcomes, &SeedOutcome::trace, ctx.seeds);
  aggregate(table, "constraint_violation", outcomes, &SeedOutcome::trace2, ctx.seeds);
  aggregate(table, "mu", outcomes, &SeedOutcome::trace3, ctx.seeds);
  table.write((ctx.out / "primal_dual_aggregate.csv").string());

  json summary;
  summary["reference"] = {{"J_star", j_star},
                          {"Jc_star", ref_ev.Jc},
                          {"mu_star", ref.summary.mu},
                          {"converged", ref.summary.converged != 0},
                          {"policy", policy_json(ref.policy.get())}};
  summary["rho_bar"] = ctx.rho_bar;
  summary["seeds"] = json::array();
  std::vector<double> gaps;
  std::vector<double> viols;
  bool any_failed = false;
  for (size_t k = 0; k < outcomes.size(); ++k) {
    json j = outcome_json(ctx.seeds[k], outcomes[k]);
    if (errors[k]) {
      j["status"] = "error";
      j["message"] = describe(errors[k]);
    } else if (!outcomes[k].trace.empty()) {
      j["mu"] = outcomes[k].final_mu;
      j["mu_average"] = outcomes[k].final_mu_average;
      j["optimality_gap"] = outcomes[k].trace.back().second;
      j["constraint_violation"] = outcomes[k].trace2.back().second;
      gaps.push_back(outcomes[k].trace.back().second);
      viols.push_back(outcomes[k].trace2.back().second);
    }
    any_failed = any_failed || errors[k] || outcomes[k].failed;
    summary["seeds"].push_back(std::move(j));
  }
  const cli::Summary g = cli::summarize(gaps);
  const cli::Summary v = cli::summarize(viols);
  summary["final_optimality_gap"] = {{"median", g.median}, {"q25", g.q25}, {"q75", g.q75},
                                     {"mean", g.mean}, {"std", g.stddev}};
  summary["final_constraint_violation"] = {{"median", v.median}, {"q25", v.q25}, {"q75", v.q75},
                                           {"mean", v.mean}, {"std", v.stddev}};
  summary["config"] = resolved_config(ctx);
  cli::write_text((ctx.out / "primal_dual_summary.json").string(), summary.dump(2) + "\n");

  std::printf("J(X*) = %.10g; final median optimality gap %.4g, constraint violation %.4g over "
              "%zu seeds\n", j_star, g.median, v.median, gaps.size());
  for (size_t k = 0; k < outcomes.size(); ++k) {
    if (errors[k]) std::fprintf(stderr, "seed %llu: %s\n", (unsigned long long)ctx.seeds[k],
                                describe(errors[k]).c_str());
    else if (outcomes[k].failed)
      std::fprintf(stderr, "seed %llu: %s\n", (unsigned long long)ctx.seeds[k],
                   outcomes[k].message.c_str());
  }
  return any_failed ? kNumericalFailure : kSuccess;
}

// ---- simulate ----

struct TrajectoryWriter {
  std::string text;
};

int cmd_simulate(const Options& opt) {
  Context ctx = load(opt);
  double mu = 0.0;
  rclqr_random_search_config rs;
  CLI_CHECK(rclqr_experiment_random_search(ctx.exp.get(), &rs, &mu));
  rclqr_rollout_config base;
  CLI_CHECK(rclqr_experiment_rollout(ctx.exp.get(), &base));
  const bool dump = opt.trajectory || rclqr_experiment_trajectory(ctx.exp.get());

  rclqr_policy* p = nullptr;
  CLI_CHECK(rclqr_problem_initial_policy(ctx.problem.get(), &p));
  cli::PolicyPtr policy(p);
  rclqr_evaluation exact;
  CLI_CHECK(rclqr_evaluate(ctx.problem.get(), policy.get(), mu, &exact, nullptr));

  std::string header = "t";
  for (size_t i = 1; i <= ctx.n; ++i) header += ",x" + std::to_string(i);
  for (size_t i = 1; i <= ctx.m; ++i) header += ",u" + std::to_string(i);
  header += ",cost\n";

  std::vector<rclqr_oracle_sample> samples(ctx.seeds.size());
  const auto errors = run_pool(ctx.seeds.size(), ctx.workers, [&](size_t k) {
    rclqr_rollout_config cfg = base;
    cfg.seed = ctx.seeds[k];
    TrajectoryWriter w;
    w.text = std::string("# schema: ") + cli::kTrajectorySchema + "\n" + header;
    rclqr_trajectory_fn sink = nullptr;
    if (dump) {
      sink = [](void* user, size_t t, const double* x, size_t n, const double* u, size_t m,
                double cost) {
        std::string& s = static_cast<TrajectoryWriter*>(user)->text;
        s += std::to_string(t);
        for (size_t i = 0; i < n; ++i) s += "," + cli::fmt(x[i]);
        for (size_t i = 0; i < m; ++i) s += "," + cli::fmt(u[i]);
        s += "," + cli::fmt(cost) + "\n";
      };
    }
    const rclqr_status st =
        rclqr_rollout(ctx.problem.get(), policy.get(), mu, &cfg, sink, &w, &samples[k]);
    if (dump) cli::write_text(seed_file(ctx, "trajectory", ctx.seeds[k]), w.text);
    CLI_CHECK(st);
  });

  json summary;
  summary["mu"] = mu;
  summary["policy"] = policy_json(policy.get());
  summary["exact"] = {{"L", exact.L}, {"J", exact.J}, {"Jc", exact.Jc}};
  summary["seeds"] = json::array();
  bool any_failed = false;
  for (size_t k = 0; k < samples.size(); ++k) {
    json j{{"seed", ctx.seeds[k]}};
    if (errors[k]) {
      j["status"] = "error";
      j["message"] = describe(errors[k]);
      any_failed = true;
      std::fprintf(stderr, "seed %llu: %s\n", (unsigned long long)ctx.seeds[k],
                   describe(errors[k]).c_str());
    } else {
      const rclqr_oracle_sample& s = samples[k];
      j["status"] = "ok";
      j["L_hat"] = s.L_hat;
      j["J_hat"] = s.J_hat;
      j["Jc_hat"] = s.Jc_hat;
      j["relative_error_L"] = std::abs(s.L_hat - exact.L) / std::abs(exact.L);
      std::printf("seed %llu: L_hat=%.8g (exact %.8g)  J_hat=%.8g  Jc_hat=%.8g\n",
                  (unsigned long long)ctx.seeds[k], s.L_hat, exact.L, s.J_hat, s.Jc_hat);
    }
    summary["seeds"].push_back(std::move(j));
  }
  summary["config"] = resolved_config(ctx);
  cli::write_text((ctx.out / "simulate_summary.json").string(), summary.dump(2) + "\n");
  return any_failed ? kNumericalFailure : kSuccess;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-constrained LQR: exact solver, model-free learning and checks"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config (JSON); default: UAV benchmark")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory (overrides the config)");
    sub->add_option("--seeds", opt.seeds, "seed list '3,7,11' or a count '20'");
    sub->add_option("--workers", opt.workers, "parallel seed workers (default: cores)");
    sub->add_flag("--wallclock", opt.wallclock, "record wall-clock time in iterate logs");
  };

  CLI::App* check = app.add_subcommand("check", "run the invariant suite");
  CLI::App* solve = app.add_subcommand("solve-exact", "exact primal-dual solve");
  CLI::App* learn = app.add_subcommand("learn", "zeroth-order random search per seed");
  CLI::App* pd = app.add_subcommand("primal-dual", "primal-dual learning per seed");
  CLI::App* sim = app.add_subcommand("simulate", "roll out the initial policy per seed");
  for (CLI::App* sub : {check, solve, learn, pd, sim}) add_common(sub);
  learn->add_flag("--diagnose", opt.diagnose, "estimate gradient bounds and curvature first");
  auto* exact = pd->add_flag("--exact", opt.exact, "exact inner solver");
  pd->add_flag("--model-free", opt.model_free, "random-search inner solver")->excludes(exact);
  sim->add_flag("--trajectory", opt.trajectory, "write per-step trajectory CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    if (check->parsed()) return cmd_check(opt);
    if (solve->parsed()) return cmd_solve_exact(opt);
    if (learn->parsed()) return cmd_learn(opt);
    if (pd->parsed()) return cmd_primal_dual(opt);
    return cmd_simulate(opt);
  } catch (const ApiError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.status());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kNumericalFailure;
  }
}
