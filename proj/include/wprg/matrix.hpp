#pragma once

#include <Eigen/Dense>
#include <limits>
#include <span>

namespace wprg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Max absolute row sum.
double inf_norm(const Mat& m);

/// Largest absolute entry.
double entrywise_max(const Mat& m);

/// Left-to-right product; all orders must match.
Mat mat_product(std::span<const Mat> ms);

bool is_row_stochastic(const Mat& m, double tol = 1e-9);
bool is_doubly_stochastic(const Mat& m, double tol = 1e-9);

struct SvOptions {
  double bisect_tol = 1e-6;
  double eig_tol = 1e-9;
  double eps_cap = 1e9;  // above this the error is reported as infinity
};

/// Smallest eps such that for all x, y:
///   |y^T (Wt - W) x| <= (eps/4) (||x||^2_{I-W^T W} + ||y||^2_{I-W W^T}).
/// Certified by bisection on the positive semidefiniteness of the symmetric
/// block matrix [[(eps/4)(I-WW^T), D/2], [D^T/2, (eps/4)(I-W^T W)]] with
/// D = Wt - W; the quantified inequality and the block PSD condition are the
/// same statement. Returns +infinity when no finite eps certifies (D acts
/// outside the ranges of the Gram deficiencies). Inputs must be doubly
/// stochastic within 1e-9.
double sv_approx_error(const Mat& wt, const Mat& w, const SvOptions& opts = {});

inline double sv_infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace wprg
