#include "wprg/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace wprg {

double inf_norm(const Mat& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

double entrywise_max(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

Mat mat_product(std::span<const Mat> ms) {
  if (ms.empty()) throw std::invalid_argument("mat_product: empty sequence");
  Mat acc = ms[0];
  for (size_t i = 1; i < ms.size(); ++i) {
    if (ms[i].rows() != acc.cols())
      throw std::invalid_argument("mat_product: dimension mismatch");
    acc = acc * ms[i];
  }
  return acc;
}

bool is_row_stochastic(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if ((m.array() < -tol).any()) return false;
  for (int i = 0; i < m.rows(); ++i)
    if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
  return true;
}

bool is_doubly_stochastic(const Mat& m, double tol) {
  if (!is_row_stochastic(m, tol)) return false;
  for (int j = 0; j < m.cols(); ++j)
    if (std::abs(m.col(j).sum() - 1.0) > tol) return false;
  return true;
}

namespace {

double min_eig(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

double sv_approx_error(const Mat& wt, const Mat& w, const SvOptions& opts) {
  if (wt.rows() != w.rows() || wt.cols() != w.cols() || w.rows() != w.cols())
    throw std::invalid_argument("sv_approx_error: order mismatch");
  if (!is_doubly_stochastic(wt) || !is_doubly_stochastic(w))
    throw std::invalid_argument("sv_approx_error: inputs not doubly stochastic");

  const int n = static_cast<int>(w.rows());
  Mat delta = wt - w;
  if (entrywise_max(delta) == 0.0) return 0.0;

  Mat a = Mat::Identity(n, n) - w * w.transpose();  // y side
  Mat b = Mat::Identity(n, n) - w.transpose() * w;  // x side

  auto feasible = [&](double eps) {
    Mat block(2 * n, 2 * n);
    block.topLeftCorner(n, n) = (eps / 4.0) * a;
    block.bottomRightCorner(n, n) = (eps / 4.0) * b;
    block.topRightCorner(n, n) = -delta / 2.0;
    block.bottomLeftCorner(n, n) = -delta.transpose() / 2.0;
    return min_eig(block) >= -opts.eig_tol;
  };

  double hi = 1.0;
  while (!feasible(hi)) {
    hi *= 2.0;
    if (hi > opts.eps_cap) return sv_infinity();
  }
  double lo = 0.0;
  while (hi - lo > opts.bisect_tol) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace wprg
