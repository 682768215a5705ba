#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "wprg/generator.hpp"
#include "wprg/robp.hpp"
#include "wprg/terms.hpp"

namespace wprg {

struct Shape {
  int n = 0, s = 0, w = 0;
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// A (d, K, eps) reduction: index i (d bits, weight sigma(i)) maps inputs of
/// the target class to inputs of the source class, layer by layer. Every
/// reduction here is symbol-local: target symbol j expands to a chunk of
/// source symbols covering [cuts(i)[j-1], cuts(i)[j]).
class WeightedReduction {
 public:
  enum class Kind { Identity, Alphabet, Terms, Compose };

  Kind kind = Kind::Identity;
  Shape source, target;
  int index_bits = 0;        // d
  double weight_bound = 1;   // K
  double declared_eps = 0;
  uint64_t term_count = 1;   // indices with nonzero weight
  std::string descriptor;

  // Terms kind
  std::shared_ptr<const TermSet> terms;
  std::shared_ptr<const std::vector<SignedTerm>> term_list;
  std::optional<Generator> base;
  int padded_n = 0;  // source length rounded up for the term structure

  // Alphabet kind
  std::optional<ExtractorSpec> ext;

  // Compose kind: outer applies to the source class, inner to its target.
  std::shared_ptr<const WeightedReduction> outer, inner;

  double weight(uint64_t i) const;
  std::vector<int> cuts(uint64_t i) const;  // size target.n + 1, over [0, padded source]
  void expand_symbol(uint64_t i, int j, uint32_t x,
                     std::vector<uint32_t>& out) const;
  std::vector<uint32_t> reduce(uint64_t i,
                               std::span<const uint32_t> target_input) const;
};

WeightedReduction identity_reduction(Shape shape);

/// Index = the extractor source; symbol y pulls back to Ext(index, y).
/// Weight is identically 1. Refuses when the measured extractor error
/// exceeds eps_budget / (3n).
WeightedReduction alphabet_reduction(const ExtractorSpec& ext, Shape src,
                                     double eps_budget, double measured_tv);

/// Length reduction over a base generator: indices enumerate the signed
/// terms, target symbols are base seeds, segments are truncated base
/// outputs. `eps0` is the measured hypothesis already scaled to the
/// polynomial's form (window error * 2(n+1) for the refinement flavor).
WeightedReduction length_reduction(const Generator& base, Shape src, int k,
                                   double eps0,
                                   TermFlavor flavor = TermFlavor::Richardson);

/// Same structure built from the dyadic recursion; declared error is the
/// entrywise envelope (4 sqrt(tau) log n)^(k+1) with tau measured.
WeightedReduction dyadic_length_reduction(const Generator& base, Shape src,
                                          int k, double tau_measured);

WeightedReduction compose(const WeightedReduction& r1,
                          const WeightedReduction& r2);

/// Explicit target-shape program g with g(x) = f(R_i(x)) for all x.
/// Requires 2^target.s within cap.
Robp reduced_robp(const Robp& f, const WeightedReduction& red, uint64_t i,
                  uint64_t cap = uint64_t(1) << 22);

/// Caches used by the averaged-evaluation engine: per term-node window
/// grids, and per (node, index, layer) deterministic state maps used by the
/// composed-alphabet fast path.
struct AvgCache {
  std::map<const void*, std::shared_ptr<const std::vector<std::vector<Mat>>>>
      windows;
  std::map<std::tuple<const void*, uint64_t, int>,
           std::shared_ptr<const std::vector<uint8_t>>>
      state_maps;
};

/// E over target inputs of the layer-j transition of f o R_i, exact.
Mat reduction_avg_layer(const Robp& f, const WeightedReduction& red,
                        uint64_t i, int j, AvgCache& cache,
                        uint64_t cap = uint64_t(1) << 24);

/// (1/2^d) sum_i sigma(i) E[f(R_i(U))], computed exactly via averaged
/// layer matrices.
double weighted_estimate(const Robp& f, const WeightedReduction& red,
                         uint64_t cap = uint64_t(1) << 24);

/// |E f - weighted_estimate|: the reduction-soundness quantity.
double reduction_measured_error(const Robp& f, const WeightedReduction& red,
                                uint64_t cap = uint64_t(1) << 24);

}  // namespace wprg
