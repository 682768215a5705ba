#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wprg/expander.hpp"
#include "wprg/extractor.hpp"
#include "wprg/rng.hpp"
#include "wprg/sampler.hpp"

using namespace wprg;

namespace {

// independent power-iteration oracle for the top singular value of W - J
double lambda_power_iteration(const Expander& h, int iters = 3000) {
  Mat w = expander_matrix(h);
  const int d = int(w.rows());
  Mat m = w - Mat::Constant(d, d, 1.0 / d);
  CounterRng rng(99);
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.unit() - 0.5;
  double lam = 0;
  for (int it = 0; it < iters; ++it) {
    Vec u = m.transpose() * (m * v);
    double norm = u.norm();
    if (norm == 0) return 0;
    v = u / norm;
    lam = std::sqrt(norm);
  }
  return lam;
}

}  // namespace

TEST_CASE("gf2 field: every multiplier acts bijectively") {
  for (int n : {1, 2, 3, 4, 8, 12}) {
    const uint64_t size = uint64_t(1) << n;
    for (uint64_t a = 1; a < std::min<uint64_t>(size, 64); ++a) {
      std::vector<uint8_t> hit(size, 0);
      for (uint64_t x = 0; x < size; ++x) {
        uint64_t y = gf2_mul(a, x, n);
        REQUIRE(y < size);
        REQUIRE(!hit[y]);
        hit[y] = 1;
      }
    }
  }
  // larger degrees: spot-check injectivity on a window
  for (int n : {16, 20, 24}) {
    CounterRng rng(n);
    for (int t = 0; t < 20; ++t) {
      uint64_t a = 1 + rng.below((uint64_t(1) << n) - 1);
      uint64_t x1 = rng.below(uint64_t(1) << n);
      uint64_t x2 = rng.below(uint64_t(1) << n);
      if (x1 != x2) CHECK(gf2_mul(a, x1, n) != gf2_mul(a, x2, n));
    }
  }
}

TEST_CASE("extractor evaluation and regularity") {
  auto spec = ExtractorSpec::leftover_hash(10, 10, 3, 10);
  // empty output
  auto spec0 = ExtractorSpec::leftover_hash(10, 10, 0, 10);
  CHECK(extractor_eval(spec0, 123, 45) == 0);
  // fixed seed acts 2^{m}-regularly (exhaustive histogram)
  for (uint64_t y : {0ull, 1ull, 17ull, 1023ull}) {
    std::vector<int> hist(8, 0);
    for (uint64_t x = 0; x < 1024; ++x) ++hist[extractor_eval(spec, x, y)];
    for (int c : hist) CHECK(c == 1024 / 8);
  }
  CHECK_THROWS(extractor_eval(spec, uint64_t(1) << 10, 0));
}

TEST_CASE("extractor TV oracle: frozen values") {
  auto spec = ExtractorSpec::leftover_hash(8, 8, 4, 8);
  // point mass at zero: the hash of zero is always zero
  std::vector<std::pair<uint64_t, double>> point{{0, 1.0}};
  CHECK(extractor_tv(spec, point) == doctest::Approx(1.0 - 1.0 / 16).epsilon(1e-12));
  // uniform source, one output bit: measured distance is tiny
  auto spec1 = ExtractorSpec::leftover_hash(8, 8, 1, 8);
  std::vector<uint64_t> full(256);
  std::iota(full.begin(), full.end(), 0);
  CHECK(extractor_tv_flat(spec1, full) <= 0.01);
  // flat source on half the cube: within the nominal error
  auto spec2 = ExtractorSpec::leftover_hash(10, 10, 2, 9);
  std::vector<uint64_t> half(512);
  std::iota(half.begin(), half.end(), 0);
  CHECK(extractor_tv_flat(spec2, half) <= spec2.eps_ext);
  // full-entropy flat sources stay within the nominal error
  auto spec3 = ExtractorSpec::leftover_hash(12, 12, 5, 12);
  std::vector<uint64_t> cube(1 << 12);
  std::iota(cube.begin(), cube.end(), 0);
  CHECK(extractor_tv_flat(spec3, cube) <= spec3.eps_ext);
}

TEST_CASE("affine expander rotation map") {
  // single vertex: rotation only flips the label pairing
  auto [v1, l1] = mgg_rot(1, {0, 0}, 4);
  CHECK(v1.first == 0);
  CHECK(v1.second == 0);
  CHECK(l1 == 5);
  // involution and bijectivity for several sizes
  for (uint64_t m : {2, 3, 4, 8}) {
    Expander h = mgg_expander(m);
    std::vector<uint8_t> seen(m * m * 8, 0);
    for (uint64_t v = 0; v < m * m; ++v)
      for (uint64_t l = 0; l < 8; ++l) {
        auto [v2, l2] = h.rot(v, l);
        auto [v3, l3] = h.rot(v2, l2);
        CHECK(v3 == v);
        CHECK(l3 == l);
        uint64_t key = v2 * 8 + l2;
        REQUIRE(!seen[key]);
        seen[key] = 1;
      }
  }
}

TEST_CASE("measured expansion values") {
  // exact values at small sizes, frozen from the dense eigensolver
  CHECK(lambda_measure(mgg_expander(2)) == doctest::Approx(0.5).epsilon(1e-9));
  // m=8 second singular value is comfortably below 0.94
  double l8 = lambda_measure(mgg_expander(8));
  CHECK(l8 <= 0.94);
  // matches the independent power-iteration oracle
  CHECK(l8 == doctest::Approx(lambda_power_iteration(mgg_expander(8))).epsilon(1e-6));
  // complete bigraph mixes perfectly; the all-self-loops graph does not mix
  CHECK(lambda_measure(complete_expander(4)) == doctest::Approx(0.0));
  Expander loops;
  loops.vertices = 8;
  loops.label_bits = 2;
  loops.rot = [](uint64_t v, uint64_t l) { return std::make_pair(v, l); };
  CHECK(lambda_measure(loops) == doctest::Approx(1.0));
  CHECK_THROWS(lambda_measure(complete_expander(13)));
}

TEST_CASE("powering: degree, involution, measured decay") {
  Expander h = mgg_expander(4);
  Expander h3 = power_expander(h, 3);
  CHECK(h3.label_bits == 9);
  CHECK(h3.vertices == h.vertices);
  // t = 1 is the graph itself
  Expander h1 = power_expander(h, 1);
  CHECK(h1.label_bits == h.label_bits);
  // rotation stays an involution
  CounterRng rng(4);
  for (int t = 0; t < 200; ++t) {
    uint64_t v = rng.below(h3.vertices);
    uint64_t l = rng.below(h3.degree());
    auto [v2, l2] = h3.rot(v, l);
    auto [v3, l3] = h3.rot(v2, l2);
    CHECK(v3 == v);
    CHECK(l3 == l);
  }
  double base = lambda_measure(h);
  CHECK(lambda_measure(h3) <= std::pow(base, 3) + 1e-9);
  CHECK(lambda_measure(power_expander(h, 2)) <= base * base + 1e-9);
}

TEST_CASE("odd vertex counts via doubling") {
  Expander h = expander_for_bits(5, 1);
  CHECK(h.vertices == 32);
  std::vector<uint8_t> seen(h.vertices * h.degree(), 0);
  for (uint64_t v = 0; v < h.vertices; ++v)
    for (uint64_t l = 0; l < h.degree(); ++l) {
      auto [v2, l2] = h.rot(v, l);
      auto [v3, l3] = h.rot(v2, l2);
      CHECK(v3 == v);
      CHECK(l3 == l);
      uint64_t key = v2 * h.degree() + l2;
      REQUIRE(!seen[key]);
      seen[key] = 1;
    }
  CHECK(lambda_measure(h) ==
        doctest::Approx(lambda_measure(mgg_expander(4))).epsilon(1e-9));
}

TEST_CASE("sampler: perfect variant and contract") {
  auto s = design_sampler(6, 0.01, 0.01, SamplerKind::Complete);
  CHECK(s.r == 6);
  CHECK(s.p == 6);
  // constant functions never deviate
  for (uint64_t x = 0; x < 64; ++x) {
    double acc = 0;
    for (uint64_t y = 0; y < 64; ++y) acc += 1.0 * (sampler_eval(s, x, y) < 64);
    CHECK(acc == 64.0);
  }
  // the perfect sampler touches every point once per seed
  for (uint64_t x = 0; x < 64; ++x) {
    std::vector<uint8_t> seen(64, 0);
    for (uint64_t y = 0; y < 64; ++y) seen[sampler_eval(s, x, y)] = 1;
    for (uint8_t b : seen) CHECK(b == 1);
  }
  // infeasible spectral targets are reported
  CHECK_THROWS_AS(design_sampler(8, 1e-4, 1e-6, SamplerKind::ExpanderPower),
                  SamplerInfeasible);
}

TEST_CASE("sampler: half-cube indicator, exhaustive over seeds") {
  SamplerSpec s;
  s.q = 8;
  s.graph = power_expander(expander_for_bits(8, 1), 2);
  s.r = 8;
  s.p = s.graph.label_bits;
  double lam = lambda_measure(s.graph);
  s.alpha = 2.0 * lam;
  s.gamma = 0.25;
  auto f = [](uint64_t z) { return z < 128 ? 1.0 : -1.0; };
  int bad = 0;
  for (uint64_t x = 0; x < 256; ++x) {
    double acc = 0;
    for (uint64_t y = 0; y < s.graph.degree(); ++y)
      acc += f(sampler_eval(s, x, y));
    if (std::abs(acc / double(s.graph.degree())) >= s.alpha) ++bad;
  }
  CHECK(double(bad) / 256.0 <= s.gamma);
}

TEST_CASE("matrix sampler corollary: union-bound aggregation") {
  // matrix-valued deviation beyond C*alpha*w implies a per-entry deviation
  // beyond C*alpha, so the failure frequency stays below w^2 * gamma
  SamplerSpec s;
  s.q = 6;
  s.graph = power_expander(expander_for_bits(6, 1), 2);
  s.r = 6;
  s.p = s.graph.label_bits;
  double lam = lambda_measure(s.graph);
  const double alpha = 2.0 * lam, gamma = 0.25;
  const int w = 2;
  CounterRng rng(11);
  int fails = 0, trials = 50;
  for (int t = 0; t < trials; ++t) {
    // random matrix function with |f|_1 <= 1
    std::vector<Mat> fv(64);
    Mat mean = Mat::Zero(w, w);
    for (auto& m : fv) {
      m = Mat(w, w);
      for (int i = 0; i < w; ++i)
        for (int j = 0; j < w; ++j) m(i, j) = (2 * rng.unit() - 1) / w;
      mean += m;
    }
    mean /= 64.0;
    int bad = 0;
    for (uint64_t x = 0; x < 64; ++x) {
      Mat acc = Mat::Zero(w, w);
      for (uint64_t y = 0; y < s.graph.degree(); ++y)
        acc += fv[sampler_eval(s, x, y)];
      acc /= double(s.graph.degree());
      if (inf_norm(acc - mean) >= alpha * w) ++bad;
    }
    if (double(bad) / 64.0 > w * w * gamma) ++fails;
  }
  CHECK(fails == 0);
}
