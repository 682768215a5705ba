#include "wprg/reduction.hpp"

#include <cmath>
#include <stdexcept>

#include "wprg/parallel.hpp"

namespace wprg {

std::string Shape::str() const {
  return "(n=" + std::to_string(n) + ",s=" + std::to_string(s) +
         ",w=" + std::to_string(w) + ")";
}

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

}  // namespace

double WeightedReduction::weight(uint64_t i) const {
  switch (kind) {
    case Kind::Identity:
      return 1.0;
    case Kind::Alphabet:
      return 1.0;
    case Kind::Terms: {
      if (i >= term_count) return 0.0;
      int sign = (*term_list)[i].sign;
      return double(sign) * double(uint64_t(1) << index_bits);
    }
    case Kind::Compose: {
      uint64_t i2 = i & ((uint64_t(1) << inner->index_bits) - 1);
      uint64_t i1 = i >> inner->index_bits;
      return outer->weight(i1) * inner->weight(i2);
    }
  }
  return 0.0;
}

std::vector<int> WeightedReduction::cuts(uint64_t i) const {
  switch (kind) {
    case Kind::Identity:
    case Kind::Alphabet: {
      std::vector<int> c(target.n + 1);
      for (int j = 0; j <= target.n; ++j) c[j] = j;
      return c;
    }
    case Kind::Terms:
      return (*term_list)[i].cuts;
    case Kind::Compose: {
      uint64_t i2 = i & ((uint64_t(1) << inner->index_bits) - 1);
      uint64_t i1 = i >> inner->index_bits;
      auto c1 = outer->cuts(i1);
      auto c2 = inner->cuts(i2);
      std::vector<int> c(c2.size());
      for (size_t j = 0; j < c2.size(); ++j) {
        int pos = std::min<int>(c2[j], int(c1.size()) - 1);
        c[j] = c1[pos];
      }
      return c;
    }
  }
  return {};
}

void WeightedReduction::expand_symbol(uint64_t i, int j, uint32_t x,
                                      std::vector<uint32_t>& out) const {
  switch (kind) {
    case Kind::Identity:
      out.push_back(x);
      return;
    case Kind::Alphabet:
      out.push_back(uint32_t(extractor_eval(*ext, i, x)));
      return;
    case Kind::Terms: {
      const auto& c = (*term_list)[i].cuts;
      int len = c[j] - c[j - 1];
      if (len == 0) return;
      auto chunk = base->eval_prefix(x, len);
      out.insert(out.end(), chunk.begin(), chunk.end());
      return;
    }
    case Kind::Compose: {
      uint64_t i2 = i & ((uint64_t(1) << inner->index_bits) - 1);
      uint64_t i1 = i >> inner->index_bits;
      std::vector<uint32_t> mid;
      inner->expand_symbol(i2, j, x, mid);
      auto c2 = inner->cuts(i2);
      int l0 = c2[j - 1];
      for (size_t t = 0; t < mid.size(); ++t) {
        int l = l0 + int(t) + 1;  // outer target layer index
        if (l > outer->target.n) break;
        outer->expand_symbol(i1, l, mid[t], out);
      }
      return;
    }
  }
}

std::vector<uint32_t> WeightedReduction::reduce(
    uint64_t i, std::span<const uint32_t> target_input) const {
  if (target_input.size() != size_t(target.n))
    throw std::invalid_argument("reduce: target input length mismatch");
  std::vector<uint32_t> out;
  out.reserve(source.n);
  for (int j = 1; j <= target.n; ++j) expand_symbol(i, j, target_input[j - 1], out);
  if (int(out.size()) < source.n)
    throw std::logic_error("reduce: expansion shorter than source length");
  out.resize(source.n);  // identity padding layers beyond the source are dropped
  return out;
}

WeightedReduction identity_reduction(Shape shape) {
  WeightedReduction r;
  r.kind = WeightedReduction::Kind::Identity;
  r.source = r.target = shape;
  r.index_bits = 0;
  r.weight_bound = 1;
  r.declared_eps = 0;
  r.term_count = 1;
  r.padded_n = shape.n;
  r.descriptor = "identity" + shape.str();
  return r;
}

WeightedReduction alphabet_reduction(const ExtractorSpec& ext, Shape src,
                                     double eps_budget, double measured_tv) {
  if (ext.m_out != src.s)
    throw std::invalid_argument("alphabet_reduction: extractor output must match alphabet");
  if (measured_tv > eps_budget / (3.0 * src.n))
    throw std::invalid_argument(
        "alphabet_reduction: measured extractor error " + std::to_string(measured_tv) +
        " exceeds budget " + std::to_string(eps_budget / (3.0 * src.n)));
  WeightedReduction r;
  r.kind = WeightedReduction::Kind::Alphabet;
  r.source = src;
  r.target = Shape{src.n, ext.d_ext, src.w};
  r.index_bits = ext.n_src;
  r.weight_bound = 1;
  r.declared_eps = eps_budget;
  r.term_count = uint64_t(1) << ext.n_src;
  r.ext = ext;
  r.padded_n = src.n;
  r.descriptor = "alphabet(nsrc=" + std::to_string(ext.n_src) +
                 ",d=" + std::to_string(ext.d_ext) + ")" + src.str();
  return r;
}

namespace {

WeightedReduction term_reduction(const Generator& base, Shape src,
                                 std::shared_ptr<const TermSet> ts,
                                 double declared, const std::string& label) {
  if (base.symbol_bits != src.s)
    throw std::invalid_argument("length_reduction: base alphabet mismatch");
  if (base.out_len < ts->n)
    throw std::invalid_argument("length_reduction: base output shorter than term span");
  WeightedReduction r;
  r.kind = WeightedReduction::Kind::Terms;
  r.source = src;
  r.terms = ts;
  r.term_list = std::make_shared<const std::vector<SignedTerm>>(ts->materialize());
  r.base = base;
  r.padded_n = ts->n;
  r.term_count = ts->count;
  r.index_bits = ts->index_bits();
  r.weight_bound = double(uint64_t(1) << r.index_bits);
  r.declared_eps = declared;
  r.target = Shape{ts->factors, base.seed_bits, src.w};
  r.descriptor = label + src.str() + "->" + r.target.str();
  return r;
}

}  // namespace

WeightedReduction length_reduction(const Generator& base, Shape src, int k,
                                   double eps0, TermFlavor flavor) {
  if (flavor != TermFlavor::Richardson)
    return dyadic_length_reduction(base, src, k, eps0);
  auto ts = std::make_shared<TermSet>(richardson_terms(src.n, k));
  double declared = eps0 <= 0 ? 0.0 : std::pow(eps0, (k + 1) / 2.0) * (src.n + 1);
  return term_reduction(base, src, ts, declared,
                        "length(k=" + std::to_string(k) + "," + base.descriptor + ")");
}

WeightedReduction dyadic_length_reduction(const Generator& base, Shape src,
                                          int k, double tau_measured) {
  int np = next_pow2(src.n);
  auto ts = std::make_shared<TermSet>(binary_splitting_terms(np, k));
  double declared =
      tau_measured <= 0
          ? 0.0
          : std::pow(4.0 * std::sqrt(tau_measured) * std::log2(double(np)), k + 1);
  auto r = term_reduction(base, src, ts, declared,
                          "dyadic-length(k=" + std::to_string(k) + "," +
                              base.descriptor + ")");
  return r;
}

WeightedReduction compose(const WeightedReduction& r1,
                          const WeightedReduction& r2) {
  if (!(r1.target == r2.source))
    throw std::invalid_argument("compose: shape mismatch " + r1.target.str() +
                                " vs " + r2.source.str());
  WeightedReduction r;
  r.kind = WeightedReduction::Kind::Compose;
  r.source = r1.source;
  r.target = r2.target;
  r.index_bits = r1.index_bits + r2.index_bits;
  r.weight_bound = r1.weight_bound * r2.weight_bound;
  r.declared_eps = r1.declared_eps + r1.weight_bound * r2.declared_eps;
  r.term_count = r1.term_count * r2.term_count;
  r.outer = std::make_shared<const WeightedReduction>(r1);
  r.inner = std::make_shared<const WeightedReduction>(r2);
  r.padded_n = r1.padded_n;
  r.descriptor = r1.descriptor + " o " + r2.descriptor;
  return r;
}

Robp reduced_robp(const Robp& f, const WeightedReduction& red, uint64_t i,
                  uint64_t cap) {
  if (f.length() != red.source.n || f.symbol_bits() != red.source.s ||
      f.width() != red.source.w)
    throw std::invalid_argument("reduced_robp: program does not match source shape");
  if (red.target.s >= 63 || (uint64_t(1) << red.target.s) > cap)
    throw std::invalid_argument("reduced_robp: target alphabet above cap");
  Robp fp = pad_to_length(f, red.padded_n);
  auto c = red.cuts(i);
  const uint64_t alpha = uint64_t(1) << red.target.s;
  std::vector<std::vector<uint32_t>> layers(red.target.n);
  std::vector<uint32_t> chunk;
  for (int j = 1; j <= red.target.n; ++j) {
    layers[j - 1].resize(uint64_t(red.source.w) << red.target.s);
    for (uint64_t x = 0; x < alpha; ++x) {
      chunk.clear();
      red.expand_symbol(i, j, uint32_t(x), chunk);
      for (int u = 0; u < red.source.w; ++u) {
        uint32_t v = uint32_t(u);
        for (size_t t = 0; t < chunk.size(); ++t)
          v = fp.step(c[j - 1] + int(t) + 1, v, chunk[t]);
        layers[j - 1][(uint64_t(u) << red.target.s) | x] = v;
      }
    }
  }
  return Robp(red.target.n, red.source.w, red.target.s, std::move(layers),
              f.start_state(), f.accept_mask());
}

namespace {

Mat generic_avg_layer(const Robp& fp, const WeightedReduction& red, uint64_t i,
                      int j, const std::vector<int>& c, uint64_t cap) {
  if (red.target.s >= 63 || (uint64_t(1) << red.target.s) > cap)
    throw std::invalid_argument("reduction_avg_layer: target alphabet above cap");
  const uint64_t alpha = uint64_t(1) << red.target.s;
  const int w = fp.width();
  Mat acc = Mat::Zero(w, w);
  std::vector<uint32_t> chunk;
  for (uint64_t x = 0; x < alpha; ++x) {
    chunk.clear();
    red.expand_symbol(i, j, uint32_t(x), chunk);
    for (int u = 0; u < w; ++u) {
      uint32_t v = uint32_t(u);
      for (size_t t = 0; t < chunk.size(); ++t)
        v = fp.step(c[j - 1] + int(t) + 1, v, chunk[t]);
      acc(u, v) += 1.0;
    }
  }
  return acc / double(alpha);
}

Mat avg_layer_rec(const Robp& fp, const WeightedReduction& red, uint64_t i,
                  int j, AvgCache& cache, uint64_t cap);

// Product over the inner segment of the outer reduction's averaged layers;
// valid when the inner base generator averages to the uniform distribution.
Mat compose_exact_inner(const Robp& fp, const WeightedReduction& red,
                        uint64_t i1, uint64_t i2, int j, AvgCache& cache,
                        uint64_t cap) {
  auto c2 = red.inner->cuts(i2);
  Mat acc = Mat::Identity(fp.width(), fp.width());
  for (int l = c2[j - 1] + 1; l <= c2[j] && l <= red.outer->target.n; ++l)
    acc = acc * avg_layer_rec(fp, *red.outer, i1, l, cache, cap);
  return acc;
}

// Deterministic state map of the outer reduction's layer, indexed by
// (symbol * w + state) -> state; the composed-alphabet path averages over
// pulled-back symbols with table lookups.
std::shared_ptr<const std::vector<uint8_t>> outer_state_map(
    const Robp& fp, const WeightedReduction& outer, uint64_t i1, int j,
    AvgCache& cache) {
  auto key = std::make_tuple(static_cast<const void*>(&outer), i1, j);
  if (auto it = cache.state_maps.find(key); it != cache.state_maps.end())
    return it->second;
  const int w = fp.width();
  if (outer.target.s > 20 || w > 255)
    throw std::invalid_argument("outer_state_map: table too large");
  auto c = outer.cuts(i1);
  const uint64_t alpha = uint64_t(1) << outer.target.s;
  auto table = std::make_shared<std::vector<uint8_t>>(alpha * w);
  std::vector<uint32_t> chunk;
  for (uint64_t sym = 0; sym < alpha; ++sym) {
    chunk.clear();
    outer.expand_symbol(i1, j, uint32_t(sym), chunk);
    for (int u = 0; u < w; ++u) {
      uint32_t v = uint32_t(u);
      for (size_t t = 0; t < chunk.size(); ++t)
        v = fp.step(c[j - 1] + int(t) + 1, v, chunk[t]);
      (*table)[sym * w + u] = uint8_t(v);
    }
  }
  auto shared = std::shared_ptr<const std::vector<uint8_t>>(std::move(table));
  cache.state_maps.emplace(key, shared);
  return shared;
}

Mat avg_layer_rec(const Robp& fp, const WeightedReduction& red, uint64_t i,
                  int j, AvgCache& cache, uint64_t cap) {
  switch (red.kind) {
    case WeightedReduction::Kind::Identity:
      return one_step_avg(fp, j);
    case WeightedReduction::Kind::Alphabet: {
      const uint64_t ys = uint64_t(1) << red.ext->d_ext;
      const int w = fp.width();
      Mat out = Mat::Zero(w, w);
      for (uint64_t y = 0; y < ys; ++y) {
        uint32_t sym = uint32_t(extractor_eval(*red.ext, i, y));
        for (int u = 0; u < w; ++u) out(u, fp.step(j, u, sym)) += 1.0;
      }
      return out / double(ys);
    }
    case WeightedReduction::Kind::Terms: {
      const auto& c = (*red.term_list)[i].cuts;
      int a = c[j - 1], b = c[j];
      if (a == b) return Mat::Identity(fp.width(), fp.width());
      auto wkey = static_cast<const void*>(&red);
      auto it = cache.windows.find(wkey);
      if (it == cache.windows.end()) {
        auto grid = std::make_shared<const std::vector<std::vector<Mat>>>(
            gen_avg_all_windows(*red.base, fp, cap));
        it = cache.windows.emplace(wkey, std::move(grid)).first;
      }
      return (*it->second)[a][b];
    }
    case WeightedReduction::Kind::Compose: {
      uint64_t i2 = i & ((uint64_t(1) << red.inner->index_bits) - 1);
      uint64_t i1 = i >> red.inner->index_bits;
      if (red.inner->kind == WeightedReduction::Kind::Terms &&
          red.inner->base->exact_equiv)
        return compose_exact_inner(fp, red, i1, i2, j, cache, cap);
      if (red.inner->kind == WeightedReduction::Kind::Alphabet &&
          red.outer->target.s <= 20 && fp.width() <= 255) {
        auto map = outer_state_map(fp, *red.outer, i1, j, cache);
        const int w = fp.width();
        const uint64_t ys = uint64_t(1) << red.inner->ext->d_ext;
        Mat out = Mat::Zero(w, w);
        for (uint64_t y = 0; y < ys; ++y) {
          uint64_t sym = extractor_eval(*red.inner->ext, i2, y);
          for (int u = 0; u < w; ++u) out(u, (*map)[sym * w + u]) += 1.0;
        }
        return out / double(ys);
      }
      auto c = red.cuts(i);
      return generic_avg_layer(fp, red, i, j, c, cap);
    }
  }
  return Mat();
}

}  // namespace

Mat reduction_avg_layer(const Robp& f, const WeightedReduction& red,
                        uint64_t i, int j, AvgCache& cache, uint64_t cap) {
  Robp fp = pad_to_length(f, red.padded_n);
  return avg_layer_rec(fp, red, i, j, cache, cap);
}

double weighted_estimate(const Robp& f, const WeightedReduction& red,
                         uint64_t cap) {
  if (f.length() != red.source.n || f.symbol_bits() != red.source.s ||
      f.width() != red.source.w)
    throw std::invalid_argument("weighted_estimate: program does not match source shape");
  if (red.kind == WeightedReduction::Kind::Alphabet) {
    // one extractor sweep per index, then evolve the state distribution
    const uint64_t xs = red.term_count;
    const uint64_t ys = uint64_t(1) << red.ext->d_ext;
    const int w = f.width();
    const double ynorm = 1.0 / double(ys);
    auto chunk = [&](uint64_t lo, uint64_t hi, double) {
      std::vector<uint32_t> syms(ys);
      std::vector<double> dist(w), nd(w);
      double acc = 0;
      for (uint64_t x = lo; x < hi; ++x) {
        for (uint64_t y = 0; y < ys; ++y)
          syms[y] = uint32_t(extractor_eval(*red.ext, x, y));
        std::fill(dist.begin(), dist.end(), 0.0);
        dist[f.start_state()] = 1.0;
        for (int j = 1; j <= f.length(); ++j) {
          std::fill(nd.begin(), nd.end(), 0.0);
          for (int u = 0; u < w; ++u) {
            if (dist[u] == 0.0) continue;
            const double p = dist[u] * ynorm;
            for (uint64_t y = 0; y < ys; ++y) nd[f.step(j, u, syms[y])] += p;
          }
          dist.swap(nd);
        }
        for (int v = 0; v < w; ++v)
          if (f.accepts_state(v)) acc += dist[v];
      }
      return acc;
    };
    double est = chunked_reduce<double>(xs, 0.0, chunk,
                                        [](double a, double b) { return a + b; });
    return est / double(uint64_t(1) << red.index_bits);
  }
  if (red.kind == WeightedReduction::Kind::Compose && red.outer->target.s <= 18 &&
      (uint64_t(red.source.w) << red.outer->target.s) <= cap) {
    // materialize the outer-reduced programs and recurse into the inner stage
    std::vector<Robp> progs;
    std::vector<double> wts;
    for (uint64_t i1 = 0; i1 < red.outer->term_count; ++i1) {
      double w1 = red.outer->weight(i1);
      if (w1 == 0) continue;
      progs.push_back(reduced_robp(f, *red.outer, i1, cap));
      wts.push_back(w1);
    }
    double est = 0;
    if (red.inner->kind == WeightedReduction::Kind::Alphabet) {
      // shared extractor sweep per index across all outer programs
      const auto& ext = *red.inner->ext;
      const uint64_t xs = red.inner->term_count;
      const uint64_t ys = uint64_t(1) << ext.d_ext;
      const int w = f.width();
      const double ynorm = 1.0 / double(ys);
      auto chunk = [&](uint64_t lo, uint64_t hi, double) {
        std::vector<uint32_t> syms(ys);
        std::vector<double> dist(w), nd(w);
        double acc = 0;
        for (uint64_t x = lo; x < hi; ++x) {
          for (uint64_t y = 0; y < ys; ++y)
            syms[y] = uint32_t(extractor_eval(ext, x, y));
          for (size_t pi = 0; pi < progs.size(); ++pi) {
            const Robp& g = progs[pi];
            std::fill(dist.begin(), dist.end(), 0.0);
            dist[g.start_state()] = 1.0;
            for (int j = 1; j <= g.length(); ++j) {
              std::fill(nd.begin(), nd.end(), 0.0);
              for (int u = 0; u < w; ++u) {
                if (dist[u] == 0.0) continue;
                const double p = dist[u] * ynorm;
                for (uint64_t y = 0; y < ys; ++y) nd[g.step(j, u, syms[y])] += p;
              }
              dist.swap(nd);
            }
            double e = 0;
            for (int v = 0; v < w; ++v)
              if (g.accepts_state(v)) e += dist[v];
            acc += wts[pi] * e;
          }
        }
        return acc;
      };
      est = chunked_reduce<double>(xs, 0.0, chunk,
                                   [](double a, double b) { return a + b; });
      est /= double(uint64_t(1) << red.inner->index_bits);
    } else {
      for (size_t pi = 0; pi < progs.size(); ++pi)
        est += wts[pi] * weighted_estimate(progs[pi], *red.inner, cap);
    }
    return est / double(uint64_t(1) << red.outer->index_bits);
  }
  Robp fp = pad_to_length(f, red.padded_n);
  AvgCache cache;
  const int w = f.width();
  double est = 0;
  for (uint64_t i = 0; i < red.term_count; ++i) {
    double wi = red.weight(i);
    if (wi == 0) continue;
    Vec dist = Vec::Zero(w);
    dist(f.start_state()) = 1.0;
    for (int j = 1; j <= red.target.n; ++j)
      dist = avg_layer_rec(fp, red, i, j, cache, cap).transpose() * dist;
    double e = 0;
    for (int v = 0; v < w; ++v)
      if (f.accepts_state(v)) e += dist(v);
    est += wi * e;
  }
  return est / double(uint64_t(1) << red.index_bits);
}

double reduction_measured_error(const Robp& f, const WeightedReduction& red,
                                uint64_t cap) {
  return std::abs(exact_expectation(f) - weighted_estimate(f, red, cap));
}

}  // namespace wprg
