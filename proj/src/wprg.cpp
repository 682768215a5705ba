#include "wprg/wprg.hpp"

#include <cmath>
#include <stdexcept>

namespace wprg {

std::pair<std::vector<uint32_t>, double> Wprg::eval(uint64_t seed) const {
  if (seed_bits > 62)
    throw std::invalid_argument("wprg eval: seed space beyond direct evaluation");
  uint64_t tail_seed = seed & ((uint64_t(1) << tail.seed_bits) - 1);
  uint64_t i = seed >> tail.seed_bits;
  double wgt = red->weight(i);
  if (i >= red->term_count) i = 0;  // zero-weight padding indices
  auto input = red->reduce(i, tail.eval(tail_seed));
  return {std::move(input), wgt};
}

Wprg wprg_from_reduction(const WeightedReduction& red, const Generator& tail,
                         double tail_eps_measured) {
  if (tail.out_len < red.target.n || tail.symbol_bits != red.target.s)
    throw std::invalid_argument("wprg_from_reduction: tail does not cover the target shape");
  Wprg g;
  g.red = std::make_shared<const WeightedReduction>(red);
  g.tail = tail;
  g.seed_bits = red.index_bits + tail.seed_bits;
  g.weight_bound = red.weight_bound;
  g.declared_eps = red.declared_eps + red.weight_bound * tail_eps_measured;
  g.descriptor = red.descriptor + " | tail=" + tail.descriptor;
  return g;
}

double estimate(const Robp& f, const Wprg& g, uint64_t cap) {
  if (g.tail.exact_equiv && g.tail.out_len == g.red->target.n)
    return weighted_estimate(f, *g.red, cap);
  // enumerate tail seeds per index
  if (g.tail.seed_bits >= 63 || (uint64_t(1) << g.tail.seed_bits) > cap)
    throw std::invalid_argument("estimate: tail seed space above cap");
  const uint64_t tails = uint64_t(1) << g.tail.seed_bits;
  double est = 0;
  std::vector<uint32_t> target_input;
  for (uint64_t i = 0; i < g.red->term_count; ++i) {
    double wi = g.red->weight(i);
    if (wi == 0) continue;
    double acc = 0;
    for (uint64_t ts = 0; ts < tails; ++ts) {
      auto out = g.tail.eval_prefix(ts, g.red->target.n);
      acc += evaluate(f, g.red->reduce(i, out)) ? 1.0 : 0.0;
    }
    est += wi * acc / double(tails);
  }
  return est / double(uint64_t(1) << g.red->index_bits);
}

double estimate_enumerated(const Robp& f, const Wprg& g, uint64_t cap) {
  if (g.seed_bits >= 63 || (uint64_t(1) << g.seed_bits) > cap)
    throw std::invalid_argument("estimate_enumerated: seed space above cap");
  const uint64_t seeds = uint64_t(1) << g.seed_bits;
  double sum = 0;
  for (uint64_t s = 0; s < seeds; ++s) {
    auto [input, weight] = g.eval(s);
    if (weight != 0 && evaluate(f, input)) sum += weight;
  }
  return sum / double(seeds);
}

McEstimate estimate_mc(const Robp& f, const Wprg& g, uint64_t samples,
                       uint64_t rng_seed) {
  CounterRng rng(rng_seed);
  double sum = 0, sumsq = 0;
  for (uint64_t t = 0; t < samples; ++t) {
    uint64_t seed = g.seed_bits >= 64 ? rng.next()
                                      : rng.next() & ((uint64_t(1) << g.seed_bits) - 1);
    auto [input, weight] = g.eval(seed);
    double v = (weight != 0 && evaluate(f, input)) ? weight : 0.0;
    sum += v;
    sumsq += v * v;
  }
  McEstimate r;
  r.samples = samples;
  r.mean = sum / double(samples);
  double var = sumsq / double(samples) - r.mean * r.mean;
  r.std_error = std::sqrt(std::max(0.0, var) / double(samples));
  return r;
}

SamplerWprg sampler_amplified_wprg(const Wprg& base, int k, Shape shape,
                                   double eps, double measured_base_err,
                                   SamplerKind kind) {
  const int n = shape.n;
  const int w = shape.w;
  const double hyp = 1.0 / (2.0 * w * double(n + 1) * double(n + 1));
  if (measured_base_err > hyp)
    throw std::invalid_argument(
        "sampler_amplified_wprg: base error " + std::to_string(measured_base_err) +
        " exceeds the 1/(2w(n+1)^2) hypothesis");
  if (k < 1 || k % 2 == 0)
    throw std::invalid_argument("sampler_amplified_wprg: k must be odd");
  const double bigw = base.weight_bound;
  const double alpha = 1.0 / (bigw * w * w * double(n + 1) * double(n + 1));
  const double gamma =
      eps / (2.0 * std::pow(2.0 * n, k) * std::pow(bigw, k + 1) * w * w);
  SamplerWprg g;
  g.base = base;
  g.k = k;
  g.shape = shape;
  g.samp = design_sampler(base.seed_bits, alpha, gamma, kind);
  g.terms = std::make_shared<const TermSet>(richardson_terms(n, k));
  g.term_list =
      std::make_shared<const std::vector<SignedTerm>>(g.terms->materialize());
  g.declared_eps = eps;
  g.weight_bound = double(uint64_t(1) << g.terms->index_bits()) *
                   std::pow(bigw, k);
  g.seed_bits = g.samp.r + k * g.samp.p + g.terms->index_bits();
  return g;
}

double estimate(const Robp& f, const SamplerWprg& g, uint64_t cap) {
  const int w = f.width();
  const int n = f.length();
  if (n != g.shape.n || f.symbol_bits() != g.shape.s || w != g.shape.w)
    throw std::invalid_argument("estimate: instance does not match sampler wprg shape");
  if (uint64_t(g.samp.r) + uint64_t(g.samp.p) >= 40)
    throw std::invalid_argument("estimate: sampler seed space too large");
  const uint64_t xs = uint64_t(1) << g.samp.r;
  const uint64_t ys = uint64_t(1) << g.samp.p;
  if (xs * ys > cap) throw std::invalid_argument("estimate: sampler enumeration above cap");

  // cache G0 outputs per base seed
  const uint64_t zs = uint64_t(1) << g.base.seed_bits;
  std::vector<std::vector<uint32_t>> out_cache(zs);
  std::vector<double> weight_cache(zs);
  for (uint64_t z = 0; z < zs; ++z) {
    auto [o, wt] = g.base.eval(z);
    out_cache[z] = std::move(o);
    weight_cache[z] = wt;
  }

  // distinct window set of the term family
  std::vector<std::pair<int, int>> windows;
  g.terms->for_each([&](int, std::span<const int> cuts) {
    for (size_t j = 0; j + 1 < cuts.size(); ++j)
      if (cuts[j] != cuts[j + 1]) {
        auto iv = std::make_pair(cuts[j], cuts[j + 1]);
        if (std::find(windows.begin(), windows.end(), iv) == windows.end())
          windows.push_back(iv);
      }
  });

  double est = 0;
  std::map<std::pair<int, int>, Mat> bx;
  for (uint64_t x = 0; x < xs; ++x) {
    bx.clear();
    for (const auto& [a, b] : windows) {
      Mat acc = Mat::Zero(w, w);
      for (uint64_t y = 0; y < ys; ++y) {
        uint64_t z = sampler_eval(g.samp, x, y);
        const auto& out = out_cache[z];
        double wt = weight_cache[z];
        if (wt == 0) continue;
        for (int u = 0; u < w; ++u) {
          uint32_t v = uint32_t(u);
          for (int t = a + 1; t <= b; ++t) v = f.step(t, v, out[t - a - 1]);
          acc(u, v) += wt;
        }
      }
      bx.emplace(std::make_pair(a, b), acc / double(ys));
    }
    Mat sum = term_eval(*g.terms, w, [&](int a, int b) { return bx.at({a, b}); });
    double e = 0;
    for (int v = 0; v < w; ++v)
      if (f.accepts_state(v)) e += sum(f.start_state(), v);
    est += e;
  }
  return est / double(xs);
}

}  // namespace wprg
