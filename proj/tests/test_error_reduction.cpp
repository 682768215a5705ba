#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>

#include "wprg/rng.hpp"
#include "wprg/terms.hpp"

using namespace wprg;

namespace {

// Oracle: the block refinement polynomial R(B, L, k) assembled over the full
// (n+1)w-dimensional lower-triangular system; returns the (1, n+1) block.
Mat refinement_block_oracle(const std::vector<Mat>& a,
                            const std::map<std::pair<int, int>, Mat>& table,
                            int k_passes) {
  const int n = int(a.size());
  const int w = int(a[0].rows());
  const int dim = (n + 1) * w;
  // block-bidiagonal system oriented for row-stochastic composition: the
  // inverse of L carries the forward window products in its upper triangle
  Mat ell = Mat::Identity(dim, dim);
  for (int i = 1; i <= n; ++i)
    ell.block((i - 1) * w, i * w, w, w) = -a[i - 1];
  Mat b = Mat::Identity(dim, dim);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= n; ++j)
      b.block(i * w, j * w, w, w) = table.at({i, j});
  Mat r = Mat::Zero(dim, dim);
  Mat pow = Mat::Identity(dim, dim);
  for (int t = 0; t <= k_passes; ++t) {
    r += pow * b;
    pow = pow * (Mat::Identity(dim, dim) - b * ell);
  }
  return r.block(0, n * w, w, w);
}

struct Instance {
  std::vector<Mat> a;
  std::map<std::pair<int, int>, Mat> table;
};

Instance random_instance(int n, int w, double eps, CounterRng& rng) {
  Instance inst;
  inst.a.resize(n);
  for (auto& m : inst.a) {
    m = Mat::Zero(w, w);
    for (int i = 0; i < w; ++i) {
      double row = 0;
      for (int j = 0; j < w; ++j) {
        m(i, j) = rng.unit();
        row += m(i, j);
      }
      for (int j = 0; j < w; ++j) m(i, j) *= 0.95 / row;  // substochastic
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) {
      Mat prod = Mat::Identity(w, w);
      for (int l = i + 1; l <= j; ++l) prod = prod * inst.a[l - 1];
      if (j > i + 1) {
        // perturb within eps/(2(n+1)) in the max-row-sum norm
        Mat noise(w, w);
        for (int r = 0; r < w; ++r)
          for (int c = 0; c < w; ++c) noise(r, c) = 2 * rng.unit() - 1;
        prod += noise * (eps / (2.0 * (n + 1) * w));
      }
      inst.table[{i, j}] = prod;
    }
  return inst;
}

}  // namespace

TEST_CASE("refinement terms: degenerate degree") {
  auto ts = richardson_terms(5, 1);
  CHECK(ts.count == 1);
  auto terms = ts.materialize();
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].sign == 1);
  CHECK(terms[0].cuts.front() == 0);
  CHECK(terms[0].cuts.back() == 5);
  // the single term is the whole window
  int nonempty = 0;
  for (size_t j = 0; j + 1 < terms[0].cuts.size(); ++j)
    if (terms[0].cuts[j] != terms[0].cuts[j + 1]) ++nonempty;
  CHECK(nonempty == 1);
}

TEST_CASE("refinement term count stays within the stated bound") {
  for (int n : {2, 4, 8}) {
    for (int k : {1, 3, 5}) {
      auto ts = richardson_terms(n, k);
      CHECK(double(ts.count) <= std::pow(8.0 * n, k + 1));
      // every term has exactly k factors after padding, cuts nondecreasing
      ts.for_each([&](int sign, std::span<const int> cuts) {
        CHECK(int(cuts.size()) == k + 1);
        CHECK((sign == 1 || sign == -1));
        for (size_t j = 0; j + 1 < cuts.size(); ++j) CHECK(cuts[j] <= cuts[j + 1]);
        CHECK(cuts.back() == n);
      });
    }
  }
  CHECK(richardson_terms(2, 3).count <= std::pow(16.0, 4));
  CHECK_THROWS(richardson_terms(4, 2));
}

TEST_CASE("signed sum equals the block refinement oracle") {
  CounterRng rng(19);
  for (int n : {3, 4}) {
    for (int k : {1, 3, 5}) {
      for (int trial = 0; trial < 5; ++trial) {
        auto inst = random_instance(n, 3, 1e-1, rng);
        auto ts = richardson_terms(n, k);
        Mat sum = term_eval(ts, 3, [&](int i, int j) { return inst.table.at({i, j}); });
        Mat oracle = refinement_block_oracle(inst.a, inst.table, (k - 1) / 2);
        CHECK(inf_norm(sum - oracle) <= 1e-9);
      }
    }
  }
}

TEST_CASE("exact tables collapse the signed sum to the exact product") {
  CounterRng rng(23);
  auto inst = random_instance(6, 3, 1e-9, rng);
  // overwrite with exact products
  for (auto& [key, m] : inst.table) {
    Mat prod = Mat::Identity(3, 3);
    for (int l = key.first + 1; l <= key.second; ++l) prod = prod * inst.a[l - 1];
    m = prod;
  }
  Mat exact = Mat::Identity(3, 3);
  for (const auto& m : inst.a) exact = exact * m;
  for (int k : {1, 3}) {
    Mat sum = term_eval(richardson_terms(6, k), 3,
                        [&](int i, int j) { return inst.table.at({i, j}); });
    CHECK(inf_norm(sum - exact) <= 1e-12);
  }
}

TEST_CASE("error envelope over repeated perturbation trials") {
  CounterRng rng(29);
  int violations = 0;
  for (int n : {2, 4, 6}) {
    for (int k : {1, 3}) {
      for (double eps : {1e-1, 1e-2}) {
        for (int trial = 0; trial < 25; ++trial) {
          auto inst = random_instance(n, 3, eps, rng);
          Mat exact = Mat::Identity(3, 3);
          for (const auto& m : inst.a) exact = exact * m;
          Mat sum = term_eval(richardson_terms(n, k), 3,
                              [&](int i, int j) { return inst.table.at({i, j}); });
          if (inf_norm(sum - exact) > richardson_bound(eps, n, k)) ++violations;
        }
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("bound formulas") {
  CHECK(richardson_bound(1e-2, 4, 3) == doctest::Approx(1e-4 * 5));
  CHECK(richardson_bound(0.25, 7, 1) == doctest::Approx(0.25 * 8));
  CHECK_THROWS(richardson_bound(1.5, 4, 3));
  CHECK(weighted_bound_regular(1.0 / (60.0 * 3.0), 8, 2) ==
        doctest::Approx(0.25));
  CHECK(weighted_bound_regular(0.123, 16, 0) == 1.0);
}

TEST_CASE("dyadic terms: base cases and the three-term closed form") {
  // order 0 keeps the whole window as one factor
  auto ts0 = binary_splitting_terms(4, 0);
  CHECK(ts0.count == 1);
  auto t0 = ts0.materialize();
  CHECK(t0[0].cuts == std::vector<int>{0, 4});
  // two symbols at any positive order collapse to the unit product
  auto ts2 = binary_splitting_terms(2, 1);
  CHECK(ts2.count == 1);
  CHECK(ts2.materialize()[0].cuts == std::vector<int>{0, 1, 2});
  // n=4, k=1: exactly the three signed terms
  auto ts = binary_splitting_terms(4, 1);
  CHECK(ts.count == 3);
  auto terms = ts.materialize();
  int plus = 0, minus = 0;
  for (const auto& t : terms) (t.sign > 0 ? plus : minus)++;
  CHECK(plus == 2);
  CHECK(minus == 1);
  // factor intervals all dyadic
  for (const auto& t : terms)
    for (size_t j = 0; j + 1 < t.cuts.size(); ++j) {
      int l = t.cuts[j], r = t.cuts[j + 1];
      if (l == r) continue;
      int len = r - l;
      CHECK((len & (len - 1)) == 0);
      CHECK(l % len == 0);
    }
}

TEST_CASE("dyadic term count within the stated envelope") {
  auto ts = binary_splitting_terms(8, 2);
  CHECK(double(ts.count) <= 4.0 * std::pow(2.0 * 8, 2));
  // factor count per term is O(k log n) with a small constant
  CHECK(ts.factors <= 4 * (2 + 1) * 3);
}

TEST_CASE("dyadic signed sum equals the direct recursion exactly") {
  CounterRng rng(31);
  for (int n : {2, 4, 8}) {
    for (int k : {0, 1, 2}) {
      const int w = 3;
      std::map<std::pair<int, int>, IntMat> table;
      for (int span = 1; span <= n; span *= 2)
        for (int l = 0; l + span <= n; l += span) {
          IntMat m = IntMat::zero(w);
          for (int i = 0; i < w; ++i)
            for (int j = 0; j < w; ++j) m.at(i, j) = __int128(rng.below(7));
          table[{l, l + span}] = m;
        }
      std::map<std::tuple<int, int, int>, IntMat> memo;
      std::function<IntMat(int, int, int)> rec = [&](int l, int r, int kk) -> IntMat {
        if (r == l + 1 || kk == 0) return table.at({l, r});
        auto key = std::make_tuple(l, r, kk);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        int m = (l + r) / 2;
        IntMat acc = IntMat::zero(w);
        for (int i = 0; i <= kk; ++i)
          acc.add_scaled(rec(l, m, i).mul(rec(m, r, kk - i)), 1);
        for (int i = 0; i + 1 <= kk; ++i)
          acc.add_scaled(rec(l, m, i).mul(rec(m, r, kk - 1 - i)), -1);
        memo.emplace(key, acc);
        return acc;
      };
      IntMat direct = rec(0, n, k);
      IntMat viaterms = term_eval_exact(binary_splitting_terms(n, k), w,
                                        [&](int l, int r) { return table.at({l, r}); });
      CHECK(direct == viaterms);
    }
  }
  CHECK_THROWS(binary_splitting_terms(6, 1));
}

TEST_CASE("zero-padding to a power-of-two index space") {
  auto ts = binary_splitting_terms(4, 1);
  CHECK(ts.count == 3);
  CHECK(ts.index_bits() == 2);
  auto tsr = richardson_terms(6, 3);
  CHECK((uint64_t(1) << tsr.index_bits()) >= tsr.count);
  CHECK((uint64_t(1) << tsr.index_bits()) < 2 * tsr.count);
}

TEST_CASE("term sets serialize to the diffable text format") {
  auto ts = binary_splitting_terms(4, 1);
  std::string text = termset_to_text(ts);
  CHECK(text.find("terms binary-splitting 4 1 3") == 0);
  // one line per term plus the header
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 4);
}

TEST_CASE("streaming enumeration matches materialization") {
  auto ts = richardson_terms(5, 3);
  auto mat = ts.materialize();
  size_t idx = 0;
  ts.for_each([&](int sign, std::span<const int> cuts) {
    REQUIRE(idx < mat.size());
    CHECK(mat[idx].sign == sign);
    CHECK(std::equal(cuts.begin(), cuts.end(), mat[idx].cuts.begin()));
    ++idx;
  });
  CHECK(idx == mat.size());
  CHECK(idx == ts.count);
}
