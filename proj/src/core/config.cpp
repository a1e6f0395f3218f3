#include "config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "error.hpp"

namespace rclqr {

namespace {

using json = nlohmann::json;

Error config_error(const std::string& path, const std::string& msg) {
  return Error(ErrorCode::kConfiguration,
               "config: " + (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Object view that remembers which keys were consumed so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw config_error(path(key), "missing required key");
    seen_.insert(key);
    return j_.at(key);
  }

  Reader child(const std::string& key) { return Reader(at(key), path(key)); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) throw config_error(path(key), "expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw config_error(path(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) throw config_error(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) throw config_error(path(key), "expected a string");
    return v.get<std::string>();
  }

  void opt(const std::string& key, double& out) { if (has(key)) out = number(key); }
  void opt(const std::string& key, bool& out) { if (has(key)) out = boolean(key); }
  void opt(const std::string& key, std::size_t& out) { if (has(key)) out = count(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw config_error(path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vec to_vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw config_error(path, "expected a list of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw config_error(path + "[" + std::to_string(i) + "]", "expected a number");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Mat to_mat(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw config_error(path, "expected a list of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Mat m;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const Vec row = to_vec(j[r], rp);
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      if (cols == 0) throw config_error(rp, "empty row");
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw config_error(rp, "row length " + std::to_string(row.size()) +
                                 " differs from " + std::to_string(cols));
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json from_mat(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json from_vec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat read_mat(Reader& r, const std::string& key) { return to_mat(r.at(key), r.path(key)); }
Vec read_vec(Reader& r, const std::string& key) { return to_vec(r.at(key), r.path(key)); }

void parse_system(Reader r, LinearSystem& sys) {
  if (r.has("A")) sys.A = read_mat(r, "A");
  if (r.has("B")) sys.B = read_mat(r, "B");
  if (r.has("Q")) sys.Q = read_mat(r, "Q");
  if (r.has("R")) sys.R = read_mat(r, "R");
  r.finish();
}

void parse_noise(Reader r, NoiseDistribution& dist, NoiseOptions& opts) {
  const std::string type = r.has("type") ? r.string("type") : std::string();
  if (type == "gaussian") {
    dist = Gaussian{read_vec(r, "mean"), read_mat(r, "cov")};
  } else if (type == "gaussian_mixture") {
    GaussianMixture mix;
    const Vec w = read_vec(r, "weights");
    mix.weights.assign(w.data(), w.data() + w.size());
    const json& means = r.at("means");
    const json& covs = r.at("covariances");
    if (!means.is_array() || !covs.is_array() || means.size() != mix.weights.size() ||
        covs.size() != mix.weights.size()) {
      throw config_error(r.path("means"),
                         "weights, means and covariances must have equal length");
    }
    for (std::size_t i = 0; i < means.size(); ++i) {
      const std::string idx = "[" + std::to_string(i) + "]";
      mix.components.push_back(Gaussian{to_vec(means[i], r.path("means") + idx),
                                        to_mat(covs[i], r.path("covariances") + idx)});
    }
    dist = std::move(mix);
  } else if (type == "deterministic") {
    dist = Deterministic{read_vec(r, "value")};
  } else if (!type.empty()) {
    throw config_error(r.path("type"), "unknown noise type '" + type +
                                           "' (gaussian | gaussian_mixture | deterministic)");
  }
  r.opt("enters_via_B", opts.enters_via_B);
  if (r.has("bound_v")) {
    if (r.at("bound_v").is_null()) {
      opts.bound_v.reset();
    } else {
      opts.bound_v = r.number("bound_v");
    }
  }
  r.opt("regularize_W", opts.regularize_W);
  r.opt("stats_samples", opts.stats_samples);
  if (r.has("stats_seed")) opts.stats_seed = r.count("stats_seed");
  r.finish();
}

void parse_oracle(Reader r, RolloutConfig& cfg) {
  r.opt("horizon", cfg.horizon);
  r.opt("burn_in", cfg.burn_in);
  if (r.has("x0")) cfg.x0 = read_vec(r, "x0");
  r.opt("divergence_guard", cfg.divergence_guard);
  r.finish();
}

template <typename E>
E parse_enum(Reader& r, const std::string& key,
             std::initializer_list<std::pair<const char*, E>> table) {
  const std::string s = r.string(key);
  std::string names;
  for (const auto& [name, value] : table) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(" | ") + name;
  }
  throw config_error(r.path(key), "unknown value '" + s + "' (" + names + ")");
}

void parse_random_search(Reader r, RandomSearchConfig& cfg, double* mu) {
  if (mu) r.opt("mu", *mu);
  r.opt("iterations", cfg.iterations);
  r.opt("radius", cfg.radius);
  r.opt("step", cfg.step);
  if (r.has("oracle")) parse_oracle(r.child("oracle"), cfg.oracle);
  if (r.has("safeguard")) {
    cfg.safeguard.kind = parse_enum<SafeguardKind>(
        r, "safeguard",
        {{"none", SafeguardKind::kNone},
         {"reject_unstable", SafeguardKind::kRejectUnstable},
         {"sublevel", SafeguardKind::kSublevel}});
  }
  r.opt("sublevel_factor", cfg.safeguard.factor);
  if (r.has("geometry")) {
    cfg.geometry = parse_enum<Geometry>(
        r, "geometry", {{"sphere", Geometry::kSphere}, {"ball", Geometry::kBall}});
  }
  if (r.has("estimator")) {
    cfg.estimator = parse_enum<Estimator>(
        r, "estimator",
        {{"one_point", Estimator::kOnePoint}, {"antithetic", Estimator::kAntithetic}});
  }
  r.opt("max_resamples", cfg.max_resamples);
  r.opt("max_halvings", cfg.max_halvings);
  r.opt("snapshot_every", cfg.snapshot_every);
  r.finish();
}

void parse_primal_dual(Reader r, PrimalDualConfig& cfg) {
  r.opt("mu_init", cfg.mu_init);
  r.opt("outer_iters", cfg.outer_iters);
  if (r.has("schedule")) {
    cfg.schedule.kind = parse_enum<StepKind>(
        r, "schedule",
        {{"diminishing", StepKind::kDiminishing}, {"constant", StepKind::kConstant}});
  }
  r.opt("step_scale", cfg.schedule.value);
  if (r.has("inner")) {
    cfg.inner = parse_enum<InnerMode>(
        r, "inner", {{"exact", InnerMode::kExact}, {"random_search", InnerMode::kRandomSearch}});
  }
  if (r.has("inner_search")) parse_random_search(r.child("inner_search"), cfg.inner_search, nullptr);
  r.opt("warm_start", cfg.warm_start);
  r.opt("risk_oracle_T", cfg.risk_oracle_T);
  r.opt("tolerance", cfg.tolerance);
  r.opt("mu_max", cfg.mu_max);
  r.finish();
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

template <typename E>
const char* enum_name(E value, std::initializer_list<std::pair<const char*, E>> table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

json echo_random_search(const RandomSearchConfig& c) {
  json o;
  o["iterations"] = c.iterations;
  o["radius"] = c.radius;
  o["step"] = c.step;
  o["oracle"] = {{"horizon", c.oracle.horizon},
                 {"burn_in", c.oracle.burn_in},
                 {"divergence_guard", c.oracle.divergence_guard}};
  if (c.oracle.x0.size() > 0) o["oracle"]["x0"] = from_vec(c.oracle.x0);
  o["safeguard"] = enum_name(c.safeguard.kind, {{"none", SafeguardKind::kNone},
                                                {"reject_unstable", SafeguardKind::kRejectUnstable},
                                                {"sublevel", SafeguardKind::kSublevel}});
  o["sublevel_factor"] = c.safeguard.factor;
  o["geometry"] = c.geometry == Geometry::kSphere ? "sphere" : "ball";
  o["estimator"] = c.estimator == Estimator::kOnePoint ? "one_point" : "antithetic";
  o["max_resamples"] = c.max_resamples;
  o["max_halvings"] = c.max_halvings;
  o["snapshot_every"] = c.snapshot_every;
  return o;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfiguration,
                "config: line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }

  ExperimentConfig cfg;
  Reader r(root, "");
  if (r.has("benchmark")) {
    const std::string name = r.string("benchmark");
    if (name != "uav") throw config_error("benchmark", "unknown benchmark '" + name + "'");
  }

  LinearSystem sys = cfg.problem.sys;
  Policy initial = cfg.problem.initial;
  if (r.has("system")) parse_system(r.child("system"), sys);
  if (r.has("noise")) parse_noise(r.child("noise"), cfg.noise_dist, cfg.noise_options);

  std::optional<double> rho, rho_bar;
  if (r.has("risk")) {
    Reader rr = r.child("risk");
    if (rr.has("rho")) rho = rr.number("rho");
    if (rr.has("rho_bar")) rho_bar = rr.number("rho_bar");
    rr.finish();
    if (rho.has_value() == rho_bar.has_value()) {
      throw config_error("risk", "give exactly one of rho, rho_bar");
    }
  }
  if (r.has("policy")) {
    Reader pr = r.child("policy");
    if (pr.has("K")) initial.K = read_mat(pr, "K");
    if (pr.has("l")) initial.l = read_vec(pr, "l");
    pr.finish();
  } else if (sys.n() != 4 || sys.m() != 2) {
    throw config_error("policy", "required when the system is not the default one");
  }

  if (r.has("random_search")) parse_random_search(r.child("random_search"), cfg.random_search, &cfg.learn_mu);
  if (r.has("primal_dual")) parse_primal_dual(r.child("primal_dual"), cfg.primal_dual);
  if (r.has("rollout")) parse_oracle(r.child("rollout"), cfg.rollout);

  if (r.has("seeds")) {
    const json& s = r.at("seeds");
    cfg.seeds.clear();
    if (s.is_number_integer()) {
      if (s.get<std::int64_t>() < 1) throw config_error("seeds", "count must be >= 1");
      for (std::uint64_t i = 0; i < s.get<std::uint64_t>(); ++i) cfg.seeds.push_back(i);
    } else if (s.is_array() && !s.empty()) {
      for (const json& v : s) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
          throw config_error("seeds", "expected nonnegative integers");
        }
        cfg.seeds.push_back(v.get<std::uint64_t>());
      }
    } else {
      throw config_error("seeds", "expected a count or a nonempty list");
    }
  }
  if (r.has("output")) {
    Reader o = r.child("output");
    if (o.has("dir")) cfg.output_dir = o.string("dir");
    o.opt("wallclock", cfg.record_wallclock);
    o.opt("trajectory", cfg.dump_trajectory);
    o.finish();
  }
  r.finish();

  if (!(cfg.learn_mu >= 0.0)) throw config_error("random_search.mu", "must be >= 0");
  cfg.random_search.validate();
  cfg.primal_dual.validate();
  if (cfg.rollout.horizon < 1) throw config_error("rollout.horizon", "must be >= 1");

  sys.validate();
  NoiseModel noise = NoiseModel::create(cfg.noise_dist, cfg.noise_options, sys);
  const RiskSpec risk = rho ? RiskSpec::from_rho(*rho, noise.stats(), sys.Q)
                        : rho_bar ? RiskSpec::from_rho_bar(*rho_bar, noise.stats(), sys.Q)
                                  : RiskSpec::from_rho_bar(kUavRhoBar, noise.stats(), sys.Q);
  require_compatible(sys, initial);
  const double rho_cl = closed_loop_spectral_radius(sys, initial);
  if (!(rho_cl < 1.0)) {
    throw Error(ErrorCode::kPrecondition,
                "initial policy is not stabilizing: rho(A - BK) = " + std::to_string(rho_cl));
  }
  for (RolloutConfig* rc : {&cfg.rollout, &cfg.random_search.oracle,
                            &cfg.primal_dual.inner_search.oracle}) {
    if (rc->x0.size() != 0 && rc->x0.size() != sys.n()) {
      throw config_error("x0", "length must equal the state dimension");
    }
  }
  cfg.problem = Problem{std::move(sys), std::move(noise), risk, std::move(initial)};
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfiguration, "config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::resolved_json() const {
  json root;
  const LinearSystem& sys = problem.sys;
  root["system"] = {{"A", from_mat(sys.A)}, {"B", from_mat(sys.B)},
                    {"Q", from_mat(sys.Q)}, {"R", from_mat(sys.R)}};

  json noise;
  if (const auto* g = std::get_if<Gaussian>(&noise_dist)) {
    noise["type"] = "gaussian";
    noise["mean"] = from_vec(g->mean);
    noise["cov"] = from_mat(g->cov);
  } else if (const auto* mix = std::get_if<GaussianMixture>(&noise_dist)) {
    noise["type"] = "gaussian_mixture";
    noise["weights"] = mix->weights;
    noise["means"] = json::array();
    noise["covariances"] = json::array();
    for (const Gaussian& c : mix->components) {
      noise["means"].push_back(from_vec(c.mean));
      noise["covariances"].push_back(from_mat(c.cov));
    }
  } else {
    noise["type"] = "deterministic";
    noise["value"] = from_vec(std::get<Deterministic>(noise_dist).value);
  }
  noise["enters_via_B"] = noise_options.enters_via_B;
  noise["bound_v"] = noise_options.bound_v ? json(*noise_options.bound_v) : json(nullptr);
  noise["regularize_W"] = noise_options.regularize_W;
  noise["stats_samples"] = noise_options.stats_samples;
  noise["stats_seed"] = noise_options.stats_seed;
  root["noise"] = std::move(noise);

  root["risk"] = {{"rho_bar", problem.risk.rho_bar}};
  root["policy"] = {{"K", from_mat(problem.initial.K)}, {"l", from_vec(problem.initial.l)}};

  json rs = echo_random_search(random_search);
  rs["mu"] = learn_mu;
  root["random_search"] = std::move(rs);

  const PrimalDualConfig& pd = primal_dual;
  root["primal_dual"] = {
      {"mu_init", pd.mu_init},
      {"outer_iters", pd.outer_iters},
      {"schedule", pd.schedule.kind == StepKind::kDiminishing ? "diminishing" : "constant"},
      {"step_scale", pd.schedule.value},
      {"inner", pd.inner == InnerMode::kExact ? "exact" : "random_search"},
      {"inner_search", echo_random_search(pd.inner_search)},
      {"warm_start", pd.warm_start},
      {"risk_oracle_T", pd.risk_oracle_T},
      {"tolerance", pd.tolerance},
      {"mu_max", pd.mu_max}};

  json ro = {{"horizon", rollout.horizon},
             {"burn_in", rollout.burn_in},
             {"divergence_guard", rollout.divergence_guard}};
  if (rollout.x0.size() > 0) ro["x0"] = from_vec(rollout.x0);
  root["rollout"] = std::move(ro);

  root["seeds"] = seeds;
  root["output"] = {{"dir", output_dir},
                    {"wallclock", record_wallclock},
                    {"trajectory", dump_trajectory}};
  return root.dump(2) + "\n";
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  auto parse_one = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kConfiguration, "--seeds: cannot parse '" + std::string(s) + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> seeds;
  if (text.find(',') == std::string_view::npos) {
    const std::uint64_t n = parse_one(text);
    if (n == 0) throw Error(ErrorCode::kConfiguration, "--seeds: count must be >= 1");
    for (std::uint64_t i = 0; i < n; ++i) seeds.push_back(i);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, end - start);
    seeds.push_back(parse_one(item));
    start = end + 1;
  }
  return seeds;
}

}  // namespace rclqr
