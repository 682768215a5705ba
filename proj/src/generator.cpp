#include "wprg/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "wprg/parallel.hpp"

namespace wprg {

int MixerFamily::seed_bits() const {
  int b = symbol_bits;
  for (const auto& e : h) b += e.label_bits;
  return b;
}

double MixerFamily::lambda_max() const {
  double m = 0;
  for (double l : lambda_level) m = std::max(m, l);
  return m;
}

MixerFamily make_mixer_family(int symbol_bits, int levels,
                              const std::vector<LevelChoice>& choices) {
  if (int(choices.size()) != levels)
    throw std::invalid_argument("make_mixer_family: one choice per level");
  MixerFamily fam;
  fam.symbol_bits = symbol_bits;
  fam.levels = levels;
  int bits = symbol_bits;
  for (int t = 0; t < levels; ++t) {
    fam.vertex_bits.push_back(bits);
    Expander e;
    double lam;
    if (choices[t].complete) {
      e = xor_expander(bits);
      lam = 0.0;
    } else {
      e = expander_for_bits(bits, choices[t].power);
      fam.all_complete = false;
      // certify: measure the base when dense fits, then apply the powering
      // inequality (checked as an invariant elsewhere)
      Expander base = expander_for_bits(bits, 1);
      double base_lam = base.vertices <= 4096 ? lambda_measure(base)
                                              : base.lambda_nominal;
      lam = std::pow(base_lam, choices[t].power);
      e.lambda_nominal = lam;
    }
    fam.h.push_back(std::move(e));
    fam.lambda_level.push_back(lam);
    bits += fam.h.back().label_bits;
  }
  return fam;
}

MixerFamily make_mixer_family_auto(int symbol_bits, int levels,
                                   double lambda_target, int seed_cap_bits) {
  std::vector<LevelChoice> choices(levels);
  int bits = symbol_bits;
  for (int t = 0; t < levels; ++t) {
    LevelChoice c;
    c.complete = true;
    if (lambda_target > 0 && bits <= 24) {
      Expander base = expander_for_bits(bits, 1);
      double base_lam = base.vertices <= 4096 ? lambda_measure(base)
                                              : base.lambda_nominal;
      if (base_lam > 0 && base_lam < 1) {
        int need = std::max(1, int(std::ceil(std::log(lambda_target) /
                                             std::log(base_lam))));
        int label_bits = need * base.label_bits;
        // remaining perfect-mixing levels double the running bit count, and
        // the final count is also the total seed cost; stay within budget
        int remaining = levels - t - 1;
        long long projected = (long long)(bits + label_bits)
                              << std::min(remaining, 10);
        if (projected <= seed_cap_bits) {
          c.complete = false;
          c.power = need;
          bits += label_bits;
          choices[t] = c;
          continue;
        }
      }
    }
    bits += bits;
    choices[t] = c;
  }
  return make_mixer_family(symbol_bits, levels, choices);
}

std::vector<uint32_t> Generator::eval(uint64_t seed) const {
  if (seed_bits < 64 && (seed >> seed_bits))
    throw std::invalid_argument("generator: seed out of range");
  std::vector<uint32_t> out(out_len);
  if (mixers) {
    // unrolled recursion: walk the seed down level by level
    const MixerFamily& fam = *mixers;
    std::vector<uint64_t> stack{seed};
    std::vector<uint64_t> next;
    for (int t = fam.levels; t >= 1; --t) {
      const Expander& h = fam.h[t - 1];
      next.clear();
      for (uint64_t s : stack) {
        uint64_t label = s & (h.degree() - 1);
        uint64_t x = s >> h.label_bits;
        next.push_back(x);
        next.push_back(h.step(x, label));
      }
      stack.swap(next);
    }
    for (int i = 0; i < out_len; ++i) out[i] = uint32_t(stack[i]);
    return out;
  }
  if (nz) {
    uint64_t rest = seed;
    std::vector<uint64_t> ys(nz->n);
    for (int i = nz->n - 1; i >= 0; --i) {
      ys[i] = rest & ((uint64_t(1) << nz->ext.d_ext) - 1);
      rest >>= nz->ext.d_ext;
    }
    uint64_t x = rest;
    for (int i = 0; i < out_len; ++i)
      out[i] = uint32_t(extractor_eval(nz->ext, x, ys[i]));
    return out;
  }
  // plain randomness: the seed is the output, symbol 1 first
  uint64_t rest = seed;
  for (int i = out_len - 1; i >= 0; --i) {
    out[i] = uint32_t(rest & ((uint64_t(1) << symbol_bits) - 1));
    rest >>= symbol_bits;
  }
  return out;
}

std::vector<uint32_t> Generator::eval_prefix(uint64_t seed, int m) const {
  auto full = eval(seed);
  full.resize(m);
  return full;
}

Generator recursive_mixer_generator(std::shared_ptr<const MixerFamily> fam) {
  Generator g;
  g.seed_bits = fam->seed_bits();
  g.out_len = 1 << fam->levels;
  g.symbol_bits = fam->symbol_bits;
  g.exact_equiv = fam->all_complete;
  g.mixers = fam;
  g.descriptor = "inw(s=" + std::to_string(fam->symbol_bits) +
                 ",n=" + std::to_string(g.out_len) + ",";
  for (const auto& e : fam->h) g.descriptor += e.descriptor + ";";
  g.descriptor += ")";
  return g;
}

Generator nz_generator(const ExtractorSpec& ext, int n) {
  Generator g;
  g.seed_bits = ext.n_src + n * ext.d_ext;
  g.out_len = n;
  g.symbol_bits = ext.m_out;
  g.nz = std::make_shared<NzStructure>(NzStructure{ext, n});
  g.descriptor = "nz(nsrc=" + std::to_string(ext.n_src) +
                 ",dext=" + std::to_string(ext.d_ext) +
                 ",m=" + std::to_string(ext.m_out) + ",n=" + std::to_string(n) + ")";
  return g;
}

Generator true_randomness(int n, int symbol_bits) {
  Generator g;
  g.seed_bits = n * symbol_bits;
  g.out_len = n;
  g.symbol_bits = symbol_bits;
  g.exact_equiv = true;
  g.descriptor = "uniform(n=" + std::to_string(n) + ",s=" + std::to_string(symbol_bits) + ")";
  return g;
}

namespace {

Mat avg_by_enumeration(const Generator& g, const Robp& f, int i, int j,
                       uint64_t cap) {
  if (g.seed_bits >= 63 || (uint64_t(1) << g.seed_bits) > cap)
    throw std::invalid_argument("gen_avg_matrix: seed space above cap");
  const uint64_t seeds = uint64_t(1) << g.seed_bits;
  const int w = f.width();
  auto chunk = [&](uint64_t lo, uint64_t hi, Mat init) {
    Mat acc = Mat::Zero(w, w);
    for (uint64_t s = lo; s < hi; ++s) {
      auto out = g.eval_prefix(s, j - i);
      for (int u = 0; u < w; ++u) {
        uint32_t v = uint32_t(u);
        for (int t = i + 1; t <= j; ++t) v = f.step(t, v, out[t - i - 1]);
        acc(u, v) += 1.0;
      }
    }
    return acc;
  };
  Mat sum = chunked_reduce<Mat>(seeds, Mat::Zero(w, w), chunk,
                                [](Mat a, const Mat& b) { return a + b; });
  return sum / double(seeds);
}

// Counts of each output symbol over the seed sweep; the distribution is the
// same at every layer, so one histogram per source value suffices.
std::vector<uint32_t> nz_symbol_hist(const ExtractorSpec& ext, uint64_t x) {
  std::vector<uint32_t> hist(uint64_t(1) << ext.m_out, 0);
  const uint64_t ys = uint64_t(1) << ext.d_ext;
  for (uint64_t y = 0; y < ys; ++y) ++hist[extractor_eval(ext, x, y)];
  return hist;
}

Mat nz_layer_avg(const Robp& f, int layer, std::span<const uint32_t> hist,
                 double norm) {
  const int w = f.width();
  Mat m = Mat::Zero(w, w);
  for (uint32_t sym = 0; sym < hist.size(); ++sym) {
    if (!hist[sym]) continue;
    const double p = hist[sym] * norm;
    for (int u = 0; u < w; ++u) m(u, f.step(layer, u, sym)) += p;
  }
  return m;
}

Mat avg_nz_factored(const NzStructure& nz, const Robp& f, int i, int j) {
  // symbols are Ext(x, y_t) with independent y's: average over each y first,
  // then over the shared source x
  const int w = f.width();
  const uint64_t xs = uint64_t(1) << nz.ext.n_src;
  const double ynorm = 1.0 / double(uint64_t(1) << nz.ext.d_ext);
  auto chunk = [&](uint64_t lo, uint64_t hi, Mat) {
    Mat acc = Mat::Zero(w, w);
    for (uint64_t x = lo; x < hi; ++x) {
      auto hist = nz_symbol_hist(nz.ext, x);
      Mat prod = Mat::Identity(w, w);
      for (int t = i + 1; t <= j; ++t)
        prod = prod * nz_layer_avg(f, t, hist, ynorm);
      acc += prod;
    }
    return acc;
  };
  Mat sum = chunked_reduce<Mat>(xs, Mat::Zero(w, w), chunk,
                                [](Mat a, const Mat& b) { return a + b; });
  return sum / double(xs);
}

}  // namespace

std::vector<std::vector<Mat>> gen_avg_all_windows(const Generator& g,
                                                  const Robp& f, uint64_t cap) {
  const int n = f.length();
  const int w = f.width();
  std::vector<std::vector<Mat>> b(n + 1, std::vector<Mat>(n + 1));
  if (g.symbol_bits != f.symbol_bits())
    throw std::invalid_argument("gen_avg_all_windows: alphabet mismatch");
  if (g.out_len < n)
    throw std::invalid_argument("gen_avg_all_windows: generator too short");
  for (int i = 0; i <= n; ++i) b[i][i] = Mat::Identity(w, w);
  if (g.exact_equiv) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j <= n; ++j)
        b[i][j] = j == i + 1 ? one_step_avg(f, j) : Mat(b[i][j - 1] * one_step_avg(f, j));
    return b;
  }
  if (g.nz) {
    const uint64_t xs = uint64_t(1) << g.nz->ext.n_src;
    const double ynorm = 1.0 / double(uint64_t(1) << g.nz->ext.d_ext);
    using Grid = std::vector<std::vector<Mat>>;
    Grid zero(n + 1, std::vector<Mat>(n + 1, Mat::Zero(w, w)));
    auto chunk = [&](uint64_t lo, uint64_t hi, Grid) {
      Grid acc = zero;
      std::vector<Mat> layer(n + 1);
      for (uint64_t x = lo; x < hi; ++x) {
        auto hist = nz_symbol_hist(g.nz->ext, x);
        for (int t = 1; t <= n; ++t) layer[t] = nz_layer_avg(f, t, hist, ynorm);
        for (int i = 0; i < n; ++i) {
          Mat prod = Mat::Identity(w, w);
          for (int j = i + 1; j <= n; ++j) {
            prod = prod * layer[j];
            acc[i][j] += prod;
          }
        }
      }
      return acc;
    };
    Grid sum = chunked_reduce<Grid>(xs, zero, chunk, [&](Grid a, const Grid& c) {
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) a[i][j] += c[i][j];
      return a;
    });
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j <= n; ++j) b[i][j] = sum[i][j] / double(xs);
    return b;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j <= n; ++j) b[i][j] = gen_avg_matrix(g, f, i, j, cap);
  return b;
}

Mat gen_avg_matrix(const Generator& g, const Robp& f, int i, int j,
                   uint64_t cap) {
  if (i < 0 || i > j || j > f.length())
    throw std::invalid_argument("gen_avg_matrix: bad layer range");
  if (g.symbol_bits != f.symbol_bits())
    throw std::invalid_argument("gen_avg_matrix: alphabet mismatch");
  if (j - i > g.out_len)
    throw std::invalid_argument("gen_avg_matrix: window longer than output");
  if (i == j) return Mat::Identity(f.width(), f.width());
  if (g.exact_equiv) return exact_product(f, i, j);
  if (g.nz) return avg_nz_factored(*g.nz, f, i, j);
  return avg_by_enumeration(g, f, i, j, cap);
}

double gen_entrywise_error(const Generator& g, const Robp& f, uint64_t cap) {
  if (g.out_len < f.length())
    throw std::invalid_argument("gen_entrywise_error: generator too short");
  return entrywise_max(gen_avg_matrix(g, f, 0, f.length(), cap) -
                       exact_product(f, 0, f.length()));
}

double gen_entrywise_error_segments(const Generator& g, const Robp& f,
                                    uint64_t cap) {
  auto b = gen_avg_all_windows(g, f, cap);
  double worst = 0;
  for (int i = 0; i < f.length(); ++i)
    for (int j = i + 1; j <= f.length(); ++j)
      worst = std::max(worst, entrywise_max(b[i][j] - exact_product(f, i, j)));
  return worst;
}

double gen_infnorm_error_segments(const Generator& g, const Robp& f,
                                  uint64_t cap) {
  auto b = gen_avg_all_windows(g, f, cap);
  double worst = 0;
  for (int i = 0; i < f.length(); ++i)
    for (int j = i + 1; j <= f.length(); ++j)
      worst = std::max(worst, inf_norm(b[i][j] - exact_product(f, i, j)));
  return worst;
}

double gen_sv_error(const Generator& g, const Robp& f, uint64_t cap) {
  if (classify(f) != RobpClass::Permutation)
    throw std::invalid_argument("gen_sv_error: program must be a permutation");
  return sv_approx_error(gen_avg_matrix(g, f, 0, f.length(), cap),
                         exact_product(f, 0, f.length()));
}

double gen_sv_error_dyadic(const Generator& g, const Robp& f, uint64_t cap) {
  if (classify(f) != RobpClass::Permutation)
    throw std::invalid_argument("gen_sv_error_dyadic: program must be a permutation");
  const int n = f.length();
  if ((n & (n - 1)) != 0)
    throw std::invalid_argument("gen_sv_error_dyadic: length must be a power of two");
  double worst = 0;
  for (int span = 1; span <= n; span *= 2)
    for (int l = 0; l + span <= n; l += span)
      worst = std::max(worst,
                       sv_approx_error(gen_avg_matrix(g, f, l, l + span, cap),
                                       exact_product(f, l, l + span)));
  return worst;
}

}  // namespace wprg
