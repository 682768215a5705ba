#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wprg/matrix.hpp"

namespace wprg {

enum class TermFlavor { Richardson, BinarySplitting };

/// One signed product term: factor j spans source layers
/// [cuts[j], cuts[j+1]); an empty factor (equal cuts) is the identity.
struct SignedTerm {
  int sign = 1;
  std::vector<int> cuts;  // nondecreasing, cuts.front() == 0, cuts.back() == n
};

/// Signed breakpoint terms of an error-reduction polynomial. Terms are
/// enumerable lazily in a fixed deterministic order and can be materialized;
/// all terms carry the same padded factor count.
class TermSet {
 public:
  int n = 0;
  int k = 0;
  TermFlavor flavor = TermFlavor::Richardson;
  uint64_t count = 0;  // actual number of terms
  int factors = 0;     // uniform factor count after padding

  using Visitor = std::function<void(int sign, std::span<const int> cuts)>;
  void for_each(const Visitor& v) const;
  std::vector<SignedTerm> materialize() const;

  /// Index bits with zero-sign padding to a power of two.
  int index_bits() const;
};

/// Terms of the iterative-refinement expansion; k odd. Evaluating them over
/// a table of window approximations B(i, j) reproduces the top-right block
/// of the preconditioned refinement polynomial.
TermSet richardson_terms(int n, int k);

/// Terms of the dyadic-midpoint recursion; n a power of two. Every factor
/// interval is dyadic.
TermSet binary_splitting_terms(int n, int k);

/// Signed sum of factor products; B(l, r) supplies the window matrices and
/// is never called with l == r (identity).
Mat term_eval(const TermSet& ts, int w,
              const std::function<Mat(int, int)>& B);

/// Exact integer-matrix variant for rational-equivalence checks.
struct IntMat {
  int w = 0;
  std::vector<__int128> a;
  static IntMat identity(int w);
  static IntMat zero(int w);
  __int128& at(int i, int j) { return a[size_t(i) * w + j]; }
  const __int128& at(int i, int j) const { return a[size_t(i) * w + j]; }
  IntMat mul(const IntMat& o) const;
  void add_scaled(const IntMat& o, __int128 s);
  bool operator==(const IntMat& o) const { return w == o.w && a == o.a; }
};
IntMat term_eval_exact(const TermSet& ts, int w,
                       const std::function<IntMat(int, int)>& B);

double richardson_bound(double eps, int n, int k);
double weighted_bound_regular(double eps, int n, int k);

std::string termset_to_text(const TermSet& ts);

}  // namespace wprg
