#include <doctest.h>

#include <cmath>

#include "wprg/matrix.hpp"
#include "wprg/rng.hpp"
#include "wprg/robp.hpp"

using namespace wprg;

namespace {

Mat random_doubly_stochastic(int w, CounterRng& rng, int permutations = 6) {
  Mat m = Mat::Zero(w, w);
  for (int t = 0; t < permutations; ++t) {
    std::vector<int> p(w);
    for (int i = 0; i < w; ++i) p[i] = i;
    for (int i = w - 1; i > 0; --i) std::swap(p[i], p[rng.below(uint64_t(i) + 1)]);
    for (int i = 0; i < w; ++i) m(i, p[i]) += 1.0;
  }
  return m / double(permutations);
}

// dense grid search over unit vectors: sup |y' D x| / ((1/4)(|x|_B^2 + |y|_A^2))
double sv_grid_oracle_2x2(const Mat& wt, const Mat& w, int steps = 3000) {
  Mat d = wt - w;
  Mat a = Mat::Identity(2, 2) - w * w.transpose();
  Mat b = Mat::Identity(2, 2) - w.transpose() * w;
  double best = 0;
  for (int i = 0; i < steps; ++i) {
    double th = M_PI * i / steps;
    Vec x(2);
    x << std::cos(th), std::sin(th);
    double xb = x.dot(b * x);
    for (int j = 0; j < steps; ++j) {
      double ph = M_PI * j / steps;
      Vec y(2);
      y << std::cos(ph), std::sin(ph);
      double denom = 0.25 * (xb + y.dot(a * y));
      double num = std::abs(y.dot(d * x));
      if (num <= 1e-15) continue;
      if (denom <= 1e-13) return sv_infinity();
      best = std::max(best, num / denom);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("norm and product basics") {
  Mat id = Mat::Identity(3, 3);
  CHECK(inf_norm(id) == 1.0);
  CounterRng rng(1);
  Mat rs = random_doubly_stochastic(4, rng);
  CHECK(inf_norm(rs) == doctest::Approx(1.0));
  Mat a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  // hand multiplication
  Mat ab(2, 2);
  ab << 19, 22, 43, 50;
  std::vector<Mat> ms{a, b};
  CHECK(entrywise_max(mat_product(ms) - ab) == 0.0);
  CHECK(entrywise_max(a) == 4.0);
  std::vector<Mat> bad{a, Mat::Identity(3, 3)};
  CHECK_THROWS(mat_product(bad));
}

TEST_CASE("doubly stochastic check") {
  Mat p = Mat::Zero(3, 3);
  p(0, 1) = p(1, 2) = p(2, 0) = 1.0;
  CHECK(is_doubly_stochastic(p));
  Mat rsonly(2, 2);
  rsonly << 1.0, 0.0, 0.5, 0.5;
  CHECK(is_row_stochastic(rsonly));
  CHECK(!is_doubly_stochastic(rsonly));
  CounterRng rng(2);
  for (int t = 0; t < 10; ++t)
    CHECK(is_doubly_stochastic(random_doubly_stochastic(5, rng)));
}

TEST_CASE("sv approximation error: exact cases") {
  CounterRng rng(3);
  Mat w = random_doubly_stochastic(4, rng);
  CHECK(sv_approx_error(w, w) == 0.0);
  Mat p = Mat::Zero(3, 3);
  p(0, 2) = p(1, 0) = p(2, 1) = 1.0;
  CHECK(sv_approx_error(p, p) == 0.0);
  CHECK_THROWS(sv_approx_error(Mat::Identity(2, 2), Mat::Identity(3, 3)));
}

TEST_CASE("sv approximation error matches the grid-search oracle") {
  Mat j2 = Mat::Constant(2, 2, 0.5);
  Mat wt(2, 2);
  wt << 0.6, 0.4, 0.4, 0.6;
  double certified = sv_approx_error(wt, j2);
  double grid = sv_grid_oracle_2x2(wt, j2);
  CHECK(certified == doctest::Approx(grid).epsilon(1e-3));
  // the analytic value for this pair is 0.4
  CHECK(certified == doctest::Approx(0.4).epsilon(1e-4));

  // a non-symmetric perturbation
  Mat wt2(2, 2);
  wt2 << 0.7, 0.3, 0.3, 0.7;
  CHECK(sv_approx_error(wt2, j2) ==
        doctest::Approx(sv_grid_oracle_2x2(wt2, j2)).epsilon(1e-3));
}

TEST_CASE("sv error is infinite outside the deficiency ranges") {
  // W = identity has no contraction anywhere, any difference is uncertifiable
  Mat id = Mat::Identity(2, 2);
  Mat other(2, 2);
  other << 0, 1, 1, 0;
  CHECK(sv_approx_error(other, id) == sv_infinity());
}

TEST_CASE("sv error monotone under shrinking the difference") {
  CounterRng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Mat w = random_doubly_stochastic(4, rng, 4);
    Mat wt = random_doubly_stochastic(4, rng, 4);
    double full = sv_approx_error(wt, w);
    if (std::isinf(full)) continue;
    for (double t : {0.75, 0.5, 0.25}) {
      Mat shrunk = w + t * (wt - w);
      CHECK(sv_approx_error(shrunk, w) <= full + 1e-5);
    }
  }
}

TEST_CASE("sv error transitivity envelope on random triples") {
  CounterRng rng(8);
  int tested = 0;
  for (int trial = 0; trial < 12 && tested < 6; ++trial) {
    Mat b = random_doubly_stochastic(4, rng, 3);
    Mat a = b + 0.3 * (random_doubly_stochastic(4, rng, 3) - b);
    Mat c = b + 0.3 * (random_doubly_stochastic(4, rng, 3) - b);
    double e1 = sv_approx_error(a, b);
    double e2 = sv_approx_error(b, c);
    if (std::isinf(e1) || std::isinf(e2) || e2 > 4.0) continue;
    double e3 = sv_approx_error(a, c);
    CHECK(e3 <= e1 + e2 + 2 * e1 * e2 + 5e-6);
    ++tested;
  }
  CHECK(tested > 0);
}
