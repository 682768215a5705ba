#include "wprg/terms.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wprg {

namespace {

// Richardson enumeration: the refinement block expands to
//   B_{0,n} + sum_{j>=1} sum_{0<r_1<...<r_j<n} prod_l Delta_{r_{l-1}, r_l}
//             * B_{r_j, n}
// with Delta_{a,b} = B_{a,b-1} B_{b-1,b} - B_{a,b}; expanding each Delta
// yields sign (-1)^{#second choices} and at most k factors per term.
void richardson_for_each(int n, int k, const TermSet::Visitor& visit) {
  const int jmax = (k - 1) / 2;
  std::vector<int> cuts(k + 1);
  auto emit = [&](int sign, const std::vector<int>& raw) {
    // pad with leading zero-length factors to exactly k factors
    int pad = k - (int(raw.size()) - 1);
    for (int i = 0; i <= pad; ++i) cuts[i] = 0;
    for (size_t i = 1; i < raw.size(); ++i) cuts[pad + i] = raw[i];
    visit(sign, std::span<const int>(cuts.data(), k + 1));
  };
  // j = 0 term
  emit(+1, {0, n});
  std::vector<int> r(jmax + 1);
  std::vector<int> raw;
  for (int j = 1; j <= jmax; ++j) {
    // iterate increasing r_1 < ... < r_j in (0, n]; the trailing window
    // B_{r_j, n} is the identity when r_j = n
    for (int i = 1; i <= j; ++i) r[i] = i;
    if (n < j) break;
    while (true) {
      // iterate t in {0,1}^j
      for (uint32_t mask = 0; mask < (1u << j); ++mask) {
        raw.clear();
        raw.push_back(0);
        int sign = 1;
        bool ok = true;
        for (int l = 1; l <= j; ++l) {
          int a = raw.back();
          int b = r[l];
          if (mask & (1u << (l - 1))) {
            raw.push_back(b);  // B_{a,b}
            sign = -sign;
          } else {
            if (b - 1 < a) { ok = false; break; }
            raw.push_back(b - 1);  // B_{a,b-1} then the single step
            raw.push_back(b);
          }
        }
        if (!ok) continue;
        raw.push_back(n);
        emit(sign, raw);
      }
      // next combination
      int i = j;
      while (i >= 1 && r[i] == n - (j - i)) --i;
      if (i < 1) break;
      ++r[i];
      for (int l = i + 1; l <= j; ++l) r[l] = r[l - 1] + 1;
    }
  }
}

// Dyadic-midpoint recursion: leaves are the given window approximations for
// whole dyadic intervals (order 0) and the exact unit steps; above that,
//   T(l, r, k) = sum_{i+j=k} T(l,m,i) x T(m,r,j)
//              - sum_{i+j=k-1} T(l,m,i) x T(m,r,j),   m = (l+r)/2.
void bs_rec(int l, int r, int k, int sign, std::vector<int>& cuts,
            const std::function<void(int)>& done) {
  if (r == l + 1 || k == 0) {
    cuts.push_back(r);
    done(sign);
    cuts.pop_back();
    return;
  }
  if (r == l + 2) {
    // both halves are exact unit steps, so every order collapses to the
    // plain two-step product
    cuts.push_back(l + 1);
    cuts.push_back(r);
    done(sign);
    cuts.pop_back();
    cuts.pop_back();
    return;
  }
  const int m = (l + r) / 2;
  for (int drop = 0; drop <= 1; ++drop) {
    const int kk = k - drop;
    const int s = drop ? -sign : sign;
    for (int i = 0; i <= kk; ++i) {
      bs_rec(l, m, i, s, cuts, [&, i, kk](int s_left) {
        bs_rec(m, r, kk - i, s_left, cuts, done);
      });
    }
  }
}

void bs_for_each(int n, int k, int factors, const TermSet::Visitor& visit) {
  std::vector<int> cuts{0};
  std::vector<int> padded(factors + 1);
  bs_rec(0, n, k, +1, cuts, [&](int sign) {
    for (size_t i = 0; i < cuts.size(); ++i) padded[i] = cuts[i];
    for (size_t i = cuts.size(); i <= size_t(factors); ++i) padded[i] = n;
    visit(sign, std::span<const int>(padded.data(), factors + 1));
  });
}

}  // namespace

void TermSet::for_each(const Visitor& v) const {
  if (flavor == TermFlavor::Richardson)
    richardson_for_each(n, k, v);
  else
    bs_for_each(n, k, factors, v);
}

std::vector<SignedTerm> TermSet::materialize() const {
  std::vector<SignedTerm> out;
  out.reserve(count);
  for_each([&](int sign, std::span<const int> cuts) {
    out.push_back({sign, std::vector<int>(cuts.begin(), cuts.end())});
  });
  return out;
}

int TermSet::index_bits() const {
  int b = 0;
  while ((uint64_t(1) << b) < count) ++b;
  return b;
}

TermSet richardson_terms(int n, int k) {
  if (n < 1) throw std::invalid_argument("richardson_terms: n must be >= 1");
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("richardson_terms: k must be odd");
  TermSet ts;
  ts.n = n;
  ts.k = k;
  ts.flavor = TermFlavor::Richardson;
  ts.factors = k;
  uint64_t c = 0;
  richardson_for_each(n, k, [&](int, std::span<const int>) { ++c; });
  ts.count = c;
  return ts;
}

TermSet binary_splitting_terms(int n, int k) {
  if (n < 1 || (n & (n - 1)) != 0)
    throw std::invalid_argument("binary_splitting_terms: n must be a power of two");
  if (k < 0) throw std::invalid_argument("binary_splitting_terms: k must be >= 0");
  TermSet ts;
  ts.n = n;
  ts.k = k;
  ts.flavor = TermFlavor::BinarySplitting;
  uint64_t c = 0;
  int widest = 1;
  std::vector<int> cuts{0};
  bs_rec(0, n, k, +1, cuts, [&](int) {
    ++c;
    widest = std::max(widest, int(cuts.size()) - 1);
  });
  ts.count = c;
  ts.factors = widest;
  return ts;
}

Mat term_eval(const TermSet& ts, int w,
              const std::function<Mat(int, int)>& B) {
  Mat acc = Mat::Zero(w, w);
  ts.for_each([&](int sign, std::span<const int> cuts) {
    Mat prod = Mat::Identity(w, w);
    for (size_t j = 0; j + 1 < cuts.size(); ++j)
      if (cuts[j] != cuts[j + 1]) prod = prod * B(cuts[j], cuts[j + 1]);
    acc += sign > 0 ? prod : Mat(-prod);
  });
  return acc;
}

IntMat IntMat::identity(int w) {
  IntMat m = zero(w);
  for (int i = 0; i < w; ++i) m.at(i, i) = 1;
  return m;
}

IntMat IntMat::zero(int w) {
  IntMat m;
  m.w = w;
  m.a.assign(size_t(w) * w, 0);
  return m;
}

IntMat IntMat::mul(const IntMat& o) const {
  IntMat out = zero(w);
  for (int i = 0; i < w; ++i)
    for (int l = 0; l < w; ++l) {
      __int128 v = at(i, l);
      if (v == 0) continue;
      for (int j = 0; j < w; ++j) out.at(i, j) += v * o.at(l, j);
    }
  return out;
}

void IntMat::add_scaled(const IntMat& o, __int128 s) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += s * o.a[i];
}

IntMat term_eval_exact(const TermSet& ts, int w,
                       const std::function<IntMat(int, int)>& B) {
  IntMat acc = IntMat::zero(w);
  ts.for_each([&](int sign, std::span<const int> cuts) {
    IntMat prod = IntMat::identity(w);
    for (size_t j = 0; j + 1 < cuts.size(); ++j)
      if (cuts[j] != cuts[j + 1]) prod = prod.mul(B(cuts[j], cuts[j + 1]));
    acc.add_scaled(prod, sign);
  });
  return acc;
}

double richardson_bound(double eps, int n, int k) {
  if (eps <= 0 || eps >= 1) throw std::invalid_argument("richardson_bound: eps in (0,1)");
  return std::pow(eps, (k + 1) / 2.0) * (n + 1);
}

double weighted_bound_regular(double eps, int n, int k) {
  return std::pow(30.0 * eps * std::log2(double(n)), k);
}

std::string termset_to_text(const TermSet& ts) {
  std::ostringstream os;
  os << "terms " << (ts.flavor == TermFlavor::Richardson ? "richardson" : "binary-splitting")
     << ' ' << ts.n << ' ' << ts.k << ' ' << ts.count << ' ' << ts.factors << '\n';
  ts.for_each([&](int sign, std::span<const int> cuts) {
    os << (sign > 0 ? '+' : '-');
    for (size_t i = 1; i < cuts.size(); ++i) os << ' ' << cuts[i];
    os << '\n';
  });
  return os.str();
}

}  // namespace wprg
