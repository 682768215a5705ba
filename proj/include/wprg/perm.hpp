#pragma once

#include "wprg/wprg.hpp"

namespace wprg {

struct PermLevelSpec {
  int k = 1;
  double lambda_target = 0.0;  // 0 selects complete mixers (exact averaging)
  int seed_cap_bits = 24;
};

struct PermSchedule {
  std::vector<PermLevelSpec> levels;
  int terminal_len = 4;
};

/// Certified sv-error of a mixer family on permutation programs of padded
/// length 2^levels: 0 for all-complete families, else 11 * lambda * log n
/// with the measured per-level lambda.
double mixer_tau_certified(const MixerFamily& fam);

/// One level of the permutation reduction built from an explicit base
/// generator (tau measured/certified by the caller).
WeightedReduction perm_level_from_generator(Shape src, int k, double eps,
                                            const Generator& base,
                                            double tau_measured);

/// One level of the permutation reduction: indices enumerate the dyadic
/// signed terms, target symbols are generator seeds. Refuses when the
/// certified/measured tau exceeds min(eps^{2/(k+1)}/(16 log^2 n),
/// 1/(64 log^2 n)).
WeightedReduction perm_one_level(Shape src, int k, double eps,
                                 const MixerFamily& fam, double tau_measured);

/// Composition of levels until the length is at most the terminal threshold.
WeightedReduction perm_chain(Shape src, double eps, const PermSchedule& sched);

/// Chain plus a tail generator over the final shape (true randomness when
/// tail_lambda_target <= 0... the complete-mixer tail).
Wprg perm_wprg(Shape src, double eps, const PermSchedule& sched);

/// Estimate for a permutation program with an arbitrary accept set: runs the
/// single-accept pipeline at target eps/w; the estimator is linear in the
/// accept mask.
double multi_accept_estimate(const Robp& f, double eps,
                             const PermSchedule& sched,
                             uint64_t cap = uint64_t(1) << 24);

}  // namespace wprg
