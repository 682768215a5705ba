#include "wprg/sampler.hpp"

#include <cmath>
#include <string>

namespace wprg {

SamplerSpec design_sampler(int q, double alpha, double gamma, SamplerKind kind,
                           int p_cap) {
  if (q < 1 || alpha <= 0 || alpha >= 1 || gamma <= 0 || gamma >= 1)
    throw std::invalid_argument("design_sampler: bad parameters");
  SamplerSpec s;
  s.q = q;
  s.alpha = alpha;
  s.gamma = gamma;
  if (kind == SamplerKind::Complete) {
    s.graph = complete_expander(q);
    s.r = q;
    s.p = q;
    return s;
  }
  // need lambda^t <= alpha * sqrt(gamma) on 2^ceil_even(q) vertices
  const int vbits = q % 2 == 0 ? q : q + 1;
  Expander base = expander_for_bits(vbits, 1);
  double lam;
  if (base.vertices <= 1024) {
    lam = lambda_measure(base, 1024);
  } else {
    lam = base.lambda_nominal;
  }
  const double target = alpha * std::sqrt(gamma);
  if (lam <= 0 || target <= 0)
    throw SamplerInfeasible("design_sampler: degenerate spectral target");
  int t = std::max(1, int(std::ceil(std::log(target) / std::log(lam))));
  if (t * base.label_bits > p_cap)
    throw SamplerInfeasible(
        "design_sampler: (alpha, gamma, q) needs " +
        std::to_string(t * base.label_bits) + " sample-index bits, cap is " +
        std::to_string(p_cap));
  s.graph = t == 1 ? base : power_expander(base, t);
  s.graph.lambda_nominal = std::pow(lam, t);
  s.r = vbits;
  s.p = t * base.label_bits;
  return s;
}

uint64_t sampler_eval(const SamplerSpec& s, uint64_t x, uint64_t y) {
  if (x >= s.graph.vertices) throw std::invalid_argument("sampler_eval: x out of range");
  if (y >> s.p) throw std::invalid_argument("sampler_eval: y out of range");
  uint64_t v = s.graph.step(x, y);
  return v & ((uint64_t(1) << s.q) - 1);
}

}  // namespace wprg
