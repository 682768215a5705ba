#pragma once

#include <memory>
#include <string>

#include "wprg/reduction.hpp"
#include "wprg/rng.hpp"
#include "wprg/sampler.hpp"

namespace wprg {

/// Weighted generator: seed = (reduction index, tail seed); the output is
/// the reduction applied to the tail generator's output, the weight is the
/// reduction's weight.
struct Wprg {
  int seed_bits = 0;
  double weight_bound = 1;
  double declared_eps = 0;
  std::shared_ptr<const WeightedReduction> red;
  Generator tail;
  std::string descriptor;

  std::pair<std::vector<uint32_t>, double> eval(uint64_t seed) const;
};

Wprg wprg_from_reduction(const WeightedReduction& red, const Generator& tail,
                         double tail_eps_measured);

/// Exact estimator for the wprg's weighted mean. Uses the averaged-matrix
/// factorization when the tail averages to uniform; otherwise enumerates
/// tail seeds per index (guarded by cap). The value equals the exhaustive
/// weighted mean over the full seed space.
double estimate(const Robp& f, const Wprg& g, uint64_t cap = uint64_t(1) << 24);

/// Literal sum over all 2^seed_bits seeds; cross-check for small instances.
double estimate_enumerated(const Robp& f, const Wprg& g,
                           uint64_t cap = uint64_t(1) << 24);

struct McEstimate {
  double mean = 0;
  double std_error = 0;
  uint64_t samples = 0;
};

/// Monte Carlo sampling of the weighted mean; demo plumbing, not certified.
McEstimate estimate_mc(const Robp& f, const Wprg& g, uint64_t samples,
                       uint64_t rng_seed);

/// Error amplification through an averaging sampler: the seed is
/// (x, y_1..y_k, term index); chunk j of the output is the base generator
/// run on Samp(x, y_j), truncated at the term's breakpoints.
struct SamplerWprg {
  Wprg base;
  SamplerSpec samp;
  int k = 1;
  std::shared_ptr<const TermSet> terms;
  std::shared_ptr<const std::vector<SignedTerm>> term_list;
  Shape shape;
  double declared_eps = 0;
  double weight_bound = 1;
  int seed_bits = 0;  // r + k*p plus the term index bits
  int sampler_seed_bits() const { return samp.r + k * samp.p; }
};

/// Builds the amplified generator for target error `eps`. Refuses when the
/// base error hypothesis (measured <= 1/(2 w (n+1)^2)) is unmet or the
/// sampler parameters are infeasible at the requested sizes.
SamplerWprg sampler_amplified_wprg(const Wprg& base, int k, Shape shape,
                                   double eps, double measured_base_err,
                                   SamplerKind kind = SamplerKind::Complete);

double estimate(const Robp& f, const SamplerWprg& g,
                uint64_t cap = uint64_t(1) << 24);

}  // namespace wprg
