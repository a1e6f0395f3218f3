#include "model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "error.hpp"

namespace rclqr {

namespace detail {

// Per-component state-space means and covariance factors (cov = F F^T).
struct SamplerTable {
  Eigen::Index n = 0;
  std::vector<double> cumulative;
  std::vector<Vec> means;
  std::vector<Mat> factors;
  Eigen::Index max_cols = 0;
  std::optional<double> bound;
};

}  // namespace detail

namespace {

constexpr std::size_t kMaxRejections = 1000000;

Error config_error(const std::string& msg) {
  return Error(ErrorCode::kConfiguration, msg);
}

Mat psd_factor(const Mat& cov) {
  if (cov.size() == 0) return Mat(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(cov));
  const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

void check_gaussian(const Gaussian& g, Eigen::Index dim, const std::string& what) {
  if (g.mean.size() != dim || g.cov.rows() != dim || g.cov.cols() != dim) {
    throw Error(ErrorCode::kDimension,
                what + ": expected mean of size " + std::to_string(dim) +
                    " and " + std::to_string(dim) + "x" + std::to_string(dim) +
                    " covariance");
  }
  if (!g.mean.allFinite() || !g.cov.allFinite()) {
    throw Error(ErrorCode::kNumerical, what + ": non-finite parameters");
  }
  if (!is_psd(g.cov, 1e-10)) {
    throw Error(ErrorCode::kDefiniteness,
                what + ": covariance must be symmetric PSD");
  }
}

struct Flattened {
  std::vector<double> weights;
  std::vector<Gaussian> components;  // source space
};

Flattened flatten(const NoiseDistribution& dist, Eigen::Index source_dim) {
  Flattened out;
  if (const auto* g = std::get_if<Gaussian>(&dist)) {
    check_gaussian(*g, source_dim, "gaussian noise");
    out.weights = {1.0};
    out.components = {*g};
  } else if (const auto* mix = std::get_if<GaussianMixture>(&dist)) {
    if (mix->weights.empty() || mix->weights.size() != mix->components.size()) {
      throw config_error("gaussian_mixture: weights and components must be "
                         "non-empty and of equal length");
    }
    double total = 0.0;
    for (double w : mix->weights) {
      if (!(w > 0.0)) throw config_error("gaussian_mixture: weights must be > 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw config_error("gaussian_mixture: weights sum to " +
                         std::to_string(total) + ", expected 1");
    }
    for (std::size_t i = 0; i < mix->components.size(); ++i) {
      check_gaussian(mix->components[i], source_dim,
                     "gaussian_mixture component " + std::to_string(i));
    }
    out.weights = mix->weights;
    out.components = mix->components;
  } else {
    const auto& d = std::get<Deterministic>(dist);
    if (d.value.size() != source_dim) {
      throw Error(ErrorCode::kDimension,
                  "deterministic noise: expected value of size " +
                      std::to_string(source_dim));
    }
    out.weights = {1.0};
    out.components = {Gaussian{d.value, Mat::Zero(source_dim, source_dim)}};
  }
  return out;
}

}  // namespace

void LinearSystem::validate() const {
  require_square(A, "A");
  const auto nn = A.rows();
  if (B.rows() != nn || B.cols() < 1) {
    throw Error(ErrorCode::kDimension, "B must have " + std::to_string(nn) +
                                           " rows and at least one column");
  }
  if (Q.rows() != nn || Q.cols() != nn) {
    throw Error(ErrorCode::kDimension, "Q must be " + std::to_string(nn) + "x" +
                                           std::to_string(nn));
  }
  if (R.rows() != B.cols() || R.cols() != B.cols()) {
    throw Error(ErrorCode::kDimension, "R must be " + std::to_string(B.cols()) +
                                           "x" + std::to_string(B.cols()));
  }
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(Q, "Q");
  require_finite(R, "R");
  if (!is_psd(Q)) {
    throw Error(ErrorCode::kDefiniteness, "Q must be symmetric positive semi-definite");
  }
  if (!is_pd(R)) {
    throw Error(ErrorCode::kDefiniteness, "R must be symmetric positive definite");
  }
  try {
    solve_dare(A, B, Q + 1e-9 * Mat::Identity(nn, nn), R);
  } catch (const Error& e) {
    throw Error(ErrorCode::kPrecondition,
                std::string("(A, B) is not stabilizable: ") + e.what());
  }
}

NoiseSampler::NoiseSampler(std::shared_ptr<const detail::SamplerTable> table,
                           std::uint64_t seed)
    : table_(std::move(table)), engine_(seed), xi_(table_->max_cols) {}

Eigen::Index NoiseSampler::dim() const { return table_->n; }

void NoiseSampler::sample(Eigen::Ref<Vec> out) {
  const auto& t = *table_;
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    std::size_t idx = 0;
    if (t.cumulative.size() > 1) {
      const double u = uniform_(engine_);
      while (idx + 1 < t.cumulative.size() && u >= t.cumulative[idx]) ++idx;
    }
    const Mat& f = t.factors[idx];
    const auto k = f.cols();
    for (Eigen::Index j = 0; j < k; ++j) xi_[j] = normal_(engine_);
    out = t.means[idx];
    if (k > 0) out.noalias() += f * xi_.head(k);
    if (!t.bound || out.norm() <= *t.bound) return;
  }
  throw Error(ErrorCode::kNumerical,
              "noise sampler: truncation radius rejects almost every draw");
}

Vec NoiseSampler::sample() {
  Vec out(table_->n);
  sample(out);
  return out;
}

NoiseStats closed_form_noise_stats(const std::vector<double>& weights,
                                   const std::vector<Vec>& means,
                                   const std::vector<Mat>& covs, const Mat& Q) {
  const auto n = Q.rows();
  NoiseStats s;
  s.wbar = Vec::Zero(n);
  for (std::size_t i = 0; i < weights.size(); ++i) s.wbar += weights[i] * means[i];
  s.W = Mat::Zero(n, n);
  s.M3 = Vec::Zero(n);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Vec d = means[i] - s.wbar;
    const Mat& c = covs[i];
    s.W += weights[i] * (c + d * d.transpose());
    s.M3 += weights[i] *
            (d * (d.dot(Q * d) + (Q * c).trace()) + 2.0 * c * (Q * d));
  }
  s.W = symmetrize(s.W);
  const double trace_wq = (s.W * Q).trace();
  double m4 = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Vec d = means[i] - s.wbar;
    const Mat qc = Q * covs[i];
    const double mean_s = d.dot(Q * d) + qc.trace();
    const double var_s = 4.0 * d.dot(qc * Q * d) + 2.0 * (qc * qc).trace();
    m4 += weights[i] * (var_s + (mean_s - trace_wq) * (mean_s - trace_wq));
  }
  s.m4 = m4;
  return s;
}

NoiseStats estimate_noise_stats(const NoiseSampler& sampler, const Mat& Q,
                                std::size_t sample_count) {
  if (sample_count < 10000) {
    throw config_error("estimate_noise_stats: sample_count " +
                       std::to_string(sample_count) + " below floor 10000");
  }
  const auto n = sampler.dim();
  require_same_shape(Q, Mat(n, n), "estimate_noise_stats Q");

  NoiseSampler first = sampler;
  Vec w(n);
  Vec mean = Vec::Zero(n);
  for (std::size_t i = 0; i < sample_count; ++i) {
    first.sample(w);
    mean += (w - mean) / static_cast<double>(i + 1);
  }

  NoiseSampler second = sampler;
  Mat w_acc = Mat::Zero(n, n);
  Vec m3_acc = Vec::Zero(n);
  double s_acc = 0.0;
  double s2_acc = 0.0;
  Vec d(n);
  for (std::size_t i = 0; i < sample_count; ++i) {
    second.sample(w);
    d = w - mean;
    const double s = d.dot(Q * d);
    w_acc.noalias() += d * d.transpose();
    m3_acc += s * d;
    s_acc += s;
    s2_acc += s * s;
  }
  const double count = static_cast<double>(sample_count);
  NoiseStats out;
  out.wbar = mean;
  out.W = symmetrize(w_acc / count);
  out.M3 = m3_acc / count;
  // tr(W Q) equals the sample mean of s for the empirical W.
  const double mean_s = s_acc / count;
  out.m4 = std::max(0.0, s2_acc / count - mean_s * mean_s);
  return out;
}

NoiseModel NoiseModel::create(const NoiseDistribution& dist,
                              const NoiseOptions& options,
                              const LinearSystem& sys) {
  const auto n = sys.n();
  const Mat map = options.enters_via_B ? sys.B : Mat::Identity(n, n);
  const Flattened flat = flatten(dist, map.cols());
  if (options.bound_v && !(*options.bound_v > 0.0)) {
    throw config_error("bound_v must be positive");
  }
  if (options.regularize_W < 0.0) {
    throw config_error("regularize_W must be non-negative");
  }

  auto table = std::make_shared<detail::SamplerTable>();
  table->n = n;
  table->bound = options.bound_v;
  std::vector<Vec> means;
  std::vector<Mat> covs;
  double acc = 0.0;
  for (std::size_t i = 0; i < flat.components.size(); ++i) {
    const Gaussian& g = flat.components[i];
    Vec mean = map * g.mean;
    Mat cov = map * g.cov * map.transpose();
    Mat factor = map * psd_factor(g.cov);
    if (options.regularize_W > 0.0) {
      cov += options.regularize_W * Mat::Identity(n, n);
      Mat widened(n, factor.cols() + n);
      widened << factor, std::sqrt(options.regularize_W) * Mat::Identity(n, n);
      factor = std::move(widened);
    }
    // Drop all-zero factor columns so deterministic draws stay exact.
    if (factor.size() > 0 && factor.norm() == 0.0) factor.resize(n, 0);
    acc += flat.weights[i];
    table->cumulative.push_back(acc);
    table->max_cols = std::max(table->max_cols, factor.cols());
    table->means.push_back(mean);
    table->factors.push_back(std::move(factor));
    means.push_back(std::move(mean));
    covs.push_back(symmetrize(cov));
  }
  table->cumulative.back() = 1.0;

  NoiseModel model;
  model.dist_ = dist;
  model.options_ = options;
  model.table_ = table;
  if (options.bound_v) {
    model.stats_ = estimate_noise_stats(NoiseSampler(table, options.stats_seed),
                                        sys.Q, options.stats_samples);
  } else {
    model.stats_ = closed_form_noise_stats(flat.weights, means, covs, sys.Q);
  }
  return model;
}

NoiseSampler NoiseModel::sampler(std::uint64_t seed) const {
  return NoiseSampler(table_, seed);
}

double risk_offset(const NoiseStats& stats, const Mat& Q) {
  const Mat wq = stats.W * Q;
  return 4.0 * (wq * wq).trace() - stats.m4;
}

RiskSpec RiskSpec::from_rho(double rho, const NoiseStats& stats, const Mat& Q) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw config_error("rho must be a positive finite number");
  }
  return RiskSpec{rho, rho + risk_offset(stats, Q)};
}

RiskSpec RiskSpec::from_rho_bar(double rho_bar, const NoiseStats& stats,
                                const Mat& Q) {
  if (!std::isfinite(rho_bar)) throw config_error("rho_bar must be finite");
  return RiskSpec{rho_bar - risk_offset(stats, Q), rho_bar};
}

}  // namespace rclqr
