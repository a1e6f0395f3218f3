#pragma once

#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace rclqr {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Options for the Riccati value iteration.
struct DareOptions {
  double tolerance = 1e-12;       // relative Frobenius change between sweeps
  std::size_t max_iterations = 100000;
};

// Shape and sanity guards. All throw rclqr::Error(kDimension / kNumerical).
void require_square(const Mat& m, std::string_view what);
void require_finite(const Mat& m, std::string_view what);
void require_same_shape(const Mat& a, const Mat& b, std::string_view what);

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Mat& m, double rel_tol = 1e-10);
double min_eigenvalue_symmetric(const Mat& m);
double max_eigenvalue_symmetric(const Mat& m);
bool is_psd(const Mat& m, double rel_tol = 1e-10);
bool is_pd(const Mat& m);

/// Largest eigenvalue modulus of a square matrix.
double spectral_radius(const Mat& m);

/// Solves Sigma = W + Acl * Sigma * Acl^T by squared-iterate doubling
/// (Sigma <- Sigma + M Sigma M^T, M <- M^2) followed by one residual
/// correction. Requires spectral_radius(Acl) < 1. Output is symmetric.
Mat solve_discrete_lyapunov(const Mat& Acl, const Mat& W);

/// ||Sigma - W - Acl Sigma Acl^T||_F
double lyapunov_residual(const Mat& Acl, const Mat& W, const Mat& Sigma);

/// Stabilizing solution of
///   P = Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A
/// by value iteration from P = Q.
Mat solve_dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
               const DareOptions& options = {});

/// Gain K = (R + B^T P B)^{-1} B^T P A induced by a Riccati solution.
Mat dare_gain(const Mat& A, const Mat& B, const Mat& R, const Mat& P);

/// ||Ric(P) - P||_F / max(1, ||P||_F)
double dare_relative_residual(const Mat& A, const Mat& B, const Mat& Q,
                              const Mat& R, const Mat& P);

}  // namespace rclqr
