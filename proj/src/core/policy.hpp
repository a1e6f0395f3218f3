#pragma once

#include "linalg.hpp"
#include "model.hpp"

namespace rclqr {

/// Affine state feedback u = -K x + l.
struct Policy {
  Mat K;  // m x n
  Vec l;  // m

  Eigen::Index n() const { return K.cols(); }
  Eigen::Index m() const { return K.rows(); }

  /// The m x (n+1) augmentation [K l].
  Mat as_matrix() const;
  static Policy from_matrix(const Mat& x);

  static Policy zeros(Eigen::Index m, Eigen::Index n) {
    return Policy{Mat::Zero(m, n), Vec::Zero(m)};
  }
};

void require_compatible(const LinearSystem& sys, const Policy& p);

Mat closed_loop(const LinearSystem& sys, const Policy& p);

/// spectral_radius(A - B K); throws on dimension mismatch.
double closed_loop_spectral_radius(const LinearSystem& sys, const Policy& p);

/// True iff spectral_radius(A - B K) < 1 - margin.
bool is_stabilizing(const LinearSystem& sys, const Policy& p, double margin = 0.0);

/// -K x + l
Vec apply(const Policy& p, const Vec& x);

}  // namespace rclqr
