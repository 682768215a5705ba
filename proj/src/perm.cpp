#include "wprg/perm.hpp"

#include <cmath>
#include <stdexcept>

namespace wprg {

namespace {

int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

}  // namespace

double mixer_tau_certified(const MixerFamily& fam) {
  if (fam.all_complete) return 0.0;
  return 11.0 * fam.lambda_max() * double(fam.levels);
}

WeightedReduction perm_level_from_generator(Shape src, int k, double eps,
                                            const Generator& base,
                                            double tau_measured) {
  const int levels = ceil_log2(src.n);
  const double logn = std::max(1.0, double(levels));
  const double budget =
      std::min(std::pow(eps, 2.0 / (k + 1)) / (16.0 * logn * logn),
               1.0 / (64.0 * logn * logn));
  if (tau_measured > budget)
    throw std::invalid_argument("perm_one_level: tau " +
                                std::to_string(tau_measured) +
                                " exceeds budget " + std::to_string(budget));
  auto red = dyadic_length_reduction(base, src, k, tau_measured);
  if (red.declared_eps > eps)
    throw std::invalid_argument("perm_one_level: declared error above target");
  return red;
}

WeightedReduction perm_one_level(Shape src, int k, double eps,
                                 const MixerFamily& fam, double tau_measured) {
  if (fam.levels != ceil_log2(src.n) || fam.symbol_bits != src.s)
    throw std::invalid_argument("perm_one_level: mixer family shape mismatch");
  Generator gen = recursive_mixer_generator(std::make_shared<MixerFamily>(fam));
  return perm_level_from_generator(src, k, eps, gen, tau_measured);
}

WeightedReduction perm_chain(Shape src, double eps, const PermSchedule& sched) {
  if (sched.levels.empty()) throw std::invalid_argument("perm_chain: empty schedule");
  // first level targets eps/2; later levels target (eps/(2 K0))^2
  std::vector<double> level_eps(sched.levels.size(), eps / 2.0);
  WeightedReduction chain;
  bool have = false;
  Shape cur = src;
  for (size_t li = 0; li < sched.levels.size(); ++li) {
    if (cur.n <= sched.terminal_len) break;
    const auto& spec = sched.levels[li];
    WeightedReduction red;
    if (spec.lambda_target <= 0) {
      // exact-mixing level; the averaged windows are the true products, so
      // the base is plain randomness over the padded length
      int np = 1;
      while (np < cur.n) np *= 2;
      red = perm_level_from_generator(cur, spec.k, level_eps[li],
                                      true_randomness(np, cur.s), 0.0);
    } else {
      MixerFamily fam = make_mixer_family_auto(cur.s, ceil_log2(cur.n),
                                               spec.lambda_target,
                                               spec.seed_cap_bits);
      double tau = mixer_tau_certified(fam);
      red = perm_one_level(cur, spec.k, level_eps[li], fam, tau);
    }
    if (!have) {
      chain = red;
      have = true;
      double eprime = eps / (2.0 * chain.weight_bound);
      for (size_t t = li + 1; t < level_eps.size(); ++t)
        level_eps[t] = eprime * eprime;
    } else {
      chain = compose(chain, red);
    }
    cur = red.target;
  }
  if (!have) return identity_reduction(src);
  return chain;
}

Wprg perm_wprg(Shape src, double eps, const PermSchedule& sched) {
  auto chain = perm_chain(src, eps, sched);
  Generator tail = true_randomness(chain.target.n, chain.target.s);
  return wprg_from_reduction(chain, tail, 0.0);
}

double multi_accept_estimate(const Robp& f, double eps,
                             const PermSchedule& sched, uint64_t cap) {
  if (classify(f) != RobpClass::Permutation)
    throw std::invalid_argument("multi_accept_estimate: program must be a permutation");
  Shape shape{f.length(), f.symbol_bits(), f.width()};
  Wprg g = perm_wprg(shape, eps / double(f.width()), sched);
  return estimate(f, g, cap);
}

}  // namespace wprg
