#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace rclqr {

namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Doubling sweep shared by the solver and its residual correction.
Mat lyapunov_doubling(const Mat& Acl, const Mat& W) {
  constexpr double kIncrementTol = 1e-14;
  constexpr int kMaxDoublings = 200;
  Mat sigma = W;
  Mat m = Acl;
  Mat inc(W.rows(), W.cols());
  for (int k = 0; k < kMaxDoublings; ++k) {
    inc.noalias() = m * sigma * m.transpose();
    sigma += inc;
    const double scale = std::max(1.0, sigma.norm());
    if (inc.norm() <= kIncrementTol * scale && m.norm() < 1.0) {
      return symmetrize(sigma);
    }
    m = (m * m).eval();
    if (!sigma.allFinite()) break;
  }
  throw NonConvergenceError("solve_discrete_lyapunov: doubling did not settle",
                            kMaxDoublings);
}

}  // namespace

void require_square(const Mat& m, std::string_view what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimension,
                std::string(what) + " must be square, got " + shape(m));
  }
}

void require_finite(const Mat& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNumerical,
                std::string(what) + " has non-finite entries");
  }
}

void require_same_shape(const Mat& a, const Mat& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimension, std::string(what) + ": shape " +
                                           shape(a) + " vs " + shape(b));
  }
}

bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).norm() <= rel_tol * std::max(1.0, m.norm());
}

double min_eigenvalue_symmetric(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue_symmetric(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

bool is_psd(const Mat& m, double rel_tol) {
  if (!is_symmetric(m, rel_tol)) return false;
  return min_eigenvalue_symmetric(m) >= -rel_tol * std::max(1.0, m.norm());
}

bool is_pd(const Mat& m) {
  if (!is_symmetric(m)) return false;
  Eigen::LLT<Mat> llt(symmetrize(m));
  return llt.info() == Eigen::Success && min_eigenvalue_symmetric(m) > 0.0;
}

double spectral_radius(const Mat& m) {
  require_square(m, "spectral_radius input");
  require_finite(m, "spectral_radius input");
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical,
                "spectral_radius: eigenvalue iteration did not converge "
                "(max " + std::to_string(30 * m.rows()) + " sweeps)");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat solve_discrete_lyapunov(const Mat& Acl, const Mat& W) {
  require_square(Acl, "Lyapunov closed-loop matrix");
  require_same_shape(Acl, W, "Lyapunov right-hand side");
  require_finite(W, "Lyapunov right-hand side");
  const double rho = spectral_radius(Acl);
  if (rho >= 1.0) {
    throw Error(ErrorCode::kInstability,
                "solve_discrete_lyapunov: spectral radius " +
                    std::to_string(rho) + " >= 1");
  }
  Mat sigma = lyapunov_doubling(Acl, W);
  // Residual correction: Delta = Res + Acl Delta Acl^T.
  for (int pass = 0; pass < 2; ++pass) {
    const Mat res = symmetrize(W + Acl * sigma * Acl.transpose() - sigma);
    if (res.norm() <= 1e-13 * std::max(1.0, sigma.norm())) break;
    sigma = symmetrize(sigma + lyapunov_doubling(Acl, res));
  }
  return sigma;
}

double lyapunov_residual(const Mat& Acl, const Mat& W, const Mat& Sigma) {
  return (Sigma - W - Acl * Sigma * Acl.transpose()).norm();
}

Mat dare_gain(const Mat& A, const Mat& B, const Mat& R, const Mat& P) {
  const Mat btp = B.transpose() * P;
  const Mat s = R + btp * B;
  return s.llt().solve(btp * A);
}

Mat solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
               const DareOptions& options) {
  require_square(A, "DARE A");
  require_square(Q, "DARE Q");
  require_square(R, "DARE R");
  if (B.rows() != A.rows() || B.cols() != R.rows() || Q.rows() != A.rows()) {
    throw Error(ErrorCode::kDimension, "solve_dare: A " + shape(A) + ", B " +
                                           shape(B) + ", Q " + shape(Q) +
                                           ", R " + shape(R));
  }
  require_finite(A, "DARE A");
  require_finite(B, "DARE B");
  if (!is_pd(R)) {
    throw Error(ErrorCode::kDefiniteness, "solve_dare: R is not positive definite");
  }
  if (!is_psd(Q, 1e-9)) {
    throw Error(ErrorCode::kDefiniteness,
                "solve_dare: Q is not positive semi-definite");
  }

  Mat p = symmetrize(Q);
  Mat next(p.rows(), p.cols());
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const Mat k = dare_gain(A, B, R, p);
    const Mat acl = A - B * k;
    // Joseph-style update keeps the iterate PSD.
    next.noalias() = Q + k.transpose() * R * k + acl.transpose() * p * acl;
    next = symmetrize(next);
    if (!next.allFinite()) break;
    const double change = (next - p).norm();
    p.swap(next);
    if (change <= options.tolerance * std::max(1.0, p.norm())) {
      const double rho = spectral_radius(A - B * dare_gain(A, B, R, p));
      if (rho >= 1.0) {
        throw Error(ErrorCode::kInstability,
                    "solve_dare: converged solution is not stabilizing "
                    "(closed-loop spectral radius " + std::to_string(rho) + ")");
      }
      return p;
    }
  }
  throw NonConvergenceError(
      "solve_dare: no convergence within " +
          std::to_string(options.max_iterations) +
          " iterations (is (A, B) stabilizable?)",
      options.max_iterations);
}

double dare_relative_residual(const Mat& A, const Mat& B, const Mat& Q,
                              const Mat& R, const Mat& P) {
  const Mat btpa = B.transpose() * P * A;
  const Mat s = R + B.transpose() * P * B;
  const Mat ric =
      Q + A.transpose() * P * A - btpa.transpose() * s.llt().solve(btpa);
  return (ric - P).norm() / std::max(1.0, P.norm());
}

}  // namespace rclqr
