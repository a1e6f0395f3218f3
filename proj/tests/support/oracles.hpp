#pragma once

// Reference computations used as test oracles. Each is an independent
// route to the quantity it checks (direct linear solves, polynomial roots,
// series sums, hand formulas), sharing no code with the library solvers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// vec(S) = (I - A kron A)^{-1} vec(W).
inline Mat lyapunov_kron(const Mat& A, const Mat& W) {
  const Eigen::Index n = A.rows();
  Mat K = Mat::Identity(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n) -= A(i, j) * A;
  // Column-major vec: vec(A S A^T) = (A kron A) vec(S).
  Vec w = Eigen::Map<const Vec>(W.data(), n * n);
  Vec s = K.fullPivLu().solve(w);
  return Eigen::Map<Mat>(s.data(), n, n);
}

inline Mat lyapunov_series(const Mat& A, const Mat& W, double tail = 1e-16) {
  Mat sum = W;
  Mat term = W;
  for (int k = 0; k < 10000000; ++k) {
    term = A * term * A.transpose();
    sum += term;
    if (term.cwiseAbs().maxCoeff() <= tail * std::max(1.0, sum.cwiseAbs().maxCoeff())) break;
  }
  return sum;
}

// Characteristic polynomial coefficients c_0..c_n (monic, c_n = 1) by the
// Faddeev-LeVerrier recursion.
inline std::vector<double> char_poly(const Mat& A) {
  const Eigen::Index n = A.rows();
  std::vector<double> c(n + 1);
  c[n] = 1.0;
  Mat M = Mat::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M + c[n - k + 1] * Mat::Identity(n, n);
    c[n - k] = -(A * M).trace() / static_cast<double>(k);
  }
  return c;
}

// All roots of a monic polynomial by Durand-Kerner iteration.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  const std::size_t n = c.size() - 1;
  using C = std::complex<double>;
  std::vector<C> z(n);
  const C seed(0.4, 0.9);
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i]));
  const double radius = 1.0 + bound;
  for (std::size_t i = 0; i < n; ++i) z[i] = radius * std::pow(seed, static_cast<double>(i));
  auto p = [&](C x) {
    C v = 1.0;
    for (std::size_t i = n; i-- > 0;) v = v * x + c[i];
    return v;
  };
  for (int it = 0; it < 20000; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      C denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      const C step = p(z[i]) / denom;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-15) break;
  }
  return z;
}

// Repeated roots only come out to ~sqrt(eps) each, but the mean of a
// cluster is well conditioned, so clusters are replaced by their centroid.
inline double spectral_radius(const Mat& A) {
  auto z = poly_roots(char_poly(A));
  const std::size_t n = z.size();
  std::vector<bool> used(n, false);
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    std::complex<double> sum = 0.0;
    int count = 0;
    for (std::size_t j = i; j < n; ++j)
      if (!used[j] && std::abs(z[j] - z[i]) <= 1e-5 * std::max(1.0, std::abs(z[i]))) {
        used[j] = true;
        sum += z[j];
        ++count;
      }
    r = std::max(r, std::abs(sum / static_cast<double>(count)));
  }
  return r;
}

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& eng,
                         double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = nd(eng);
  return m;
}

// Random matrix rescaled to a target spectral radius (via the oracle).
inline Mat random_stable(Eigen::Index n, std::mt19937_64& eng, double target) {
  Mat A = random_matrix(n, n, eng);
  const double r = spectral_radius(A);
  return r > 0 ? Mat(A * (target / r)) : A;
}

inline Mat random_psd(Eigen::Index n, std::mt19937_64& eng, Eigen::Index rank) {
  const Mat F = random_matrix(n, rank, eng);
  return F * F.transpose();
}

// Central differences of f at x (matrix argument), fourth-order stencil.
template <typename F>
Mat numeric_gradient(const F& f, const Mat& x, double h = 1e-4) {
  Mat g(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(x.data()[k]));
    auto at = [&](double s) {
      Mat y = x;
      y.data()[k] += s;
      return f(y);
    };
    g.data()[k] = (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step);
  }
  return g;
}

inline double max_entrywise_rel(const Mat& a, const Mat& b) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double d = std::abs(a.data()[k] - b.data()[k]);
    const double s = std::abs(b.data()[k]);
    worst = std::max(worst, s > 0 ? d / s : d);
  }
  return worst;
}

}  // namespace oracle
