#include "policy.hpp"

#include <string>

#include "error.hpp"

namespace rclqr {

Mat Policy::as_matrix() const {
  Mat x(K.rows(), K.cols() + 1);
  x << K, l;
  return x;
}

Policy Policy::from_matrix(const Mat& x) {
  if (x.cols() < 2 || x.rows() < 1) {
    throw Error(ErrorCode::kDimension,
                "policy matrix must be m x (n+1) with n >= 1");
  }
  return Policy{x.leftCols(x.cols() - 1), x.col(x.cols() - 1)};
}

void require_compatible(const LinearSystem& sys, const Policy& p) {
  if (p.K.rows() != sys.m() || p.K.cols() != sys.n() || p.l.size() != sys.m()) {
    throw Error(ErrorCode::kDimension,
                "policy is " + std::to_string(p.K.rows()) + "x" +
                    std::to_string(p.K.cols()) + " with offset of size " +
                    std::to_string(p.l.size()) + ", system needs " +
                    std::to_string(sys.m()) + "x" + std::to_string(sys.n()));
  }
}

Mat closed_loop(const LinearSystem& sys, const Policy& p) {
  require_compatible(sys, p);
  return sys.A - sys.B * p.K;
}

double closed_loop_spectral_radius(const LinearSystem& sys, const Policy& p) {
  return spectral_radius(closed_loop(sys, p));
}

bool is_stabilizing(const LinearSystem& sys, const Policy& p, double margin) {
  return closed_loop_spectral_radius(sys, p) < 1.0 - margin;
}

Vec apply(const Policy& p, const Vec& x) {
  if (x.size() != p.K.cols()) {
    throw Error(ErrorCode::kDimension,
                "apply: state has size " + std::to_string(x.size()) +
                    ", policy expects " + std::to_string(p.K.cols()));
  }
  return p.l - p.K * x;
}

}  // namespace rclqr
