#include "wprg/extractor.hpp"

#include <cmath>
#include <stdexcept>

namespace wprg {

namespace {

// Reduction masks (polynomial minus the leading x^n term) of irreducible
// polynomials over GF(2), degrees 1..30.
constexpr uint64_t kIrreducible[31] = {
    0,     0x1,  0x3,  0x3,   0x3,  0x5,  0x3,  0x3,  0x1b, 0x11, 0x9,
    0x5,   0x53, 0x1b, 0x443, 0x3,  0x100b, 0x9, 0x81, 0x27, 0x9, 0x5,
    0x3,   0x21, 0x87, 0x9,   0x1b, 0x27, 0x9,  0x5,  0x53};

}  // namespace

uint64_t gf2_mul(uint64_t a, uint64_t b, int n) {
  if (n < 1 || n > 30) throw std::invalid_argument("gf2_mul: degree out of range");
  // carry-less multiply, then reduce
  unsigned __int128 prod = 0;
  for (int i = 0; i < n; ++i)
    if ((b >> i) & 1) prod ^= static_cast<unsigned __int128>(a) << i;
  const uint64_t poly = kIrreducible[n];
  for (int i = 2 * n - 2; i >= n; --i)
    if ((prod >> i) & 1) {
      prod ^= static_cast<unsigned __int128>(poly) << (i - n);
      prod ^= static_cast<unsigned __int128>(1) << i;
    }
  return static_cast<uint64_t>(prod) & ((n == 64 ? ~0ULL : (uint64_t(1) << n) - 1));
}

ExtractorSpec ExtractorSpec::leftover_hash(int n_src, int d_ext, int m_out,
                                           double k_min) {
  if (n_src < 1 || n_src > 30) throw std::invalid_argument("extractor: n_src out of range");
  if (m_out < 0 || m_out > n_src) throw std::invalid_argument("extractor: m_out > n_src");
  if (d_ext < 1 || d_ext > n_src) throw std::invalid_argument("extractor: d_ext out of range");
  ExtractorSpec s;
  s.n_src = n_src;
  s.d_ext = d_ext;
  s.m_out = m_out;
  s.k_min = k_min;
  s.eps_ext = 0.5 * std::sqrt(std::pow(2.0, double(m_out) - k_min));
  return s;
}

uint64_t extractor_eval(const ExtractorSpec& spec, uint64_t x, uint64_t y) {
  if (x >> spec.n_src) throw std::invalid_argument("extractor_eval: source out of range");
  if (y >> spec.d_ext) throw std::invalid_argument("extractor_eval: seed out of range");
  if (spec.m_out == 0) return 0;
  uint64_t mult = y == 0 ? 1 : y;
  uint64_t h = gf2_mul(mult, x, spec.n_src);
  return h >> (spec.n_src - spec.m_out);
}

double extractor_tv(const ExtractorSpec& spec,
                    std::span<const std::pair<uint64_t, double>> source) {
  const uint64_t outs = uint64_t(1) << spec.m_out;
  const uint64_t seeds = uint64_t(1) << spec.d_ext;
  if (outs > (uint64_t(1) << 26))
    throw std::invalid_argument("extractor_tv: output space too large");
  std::vector<double> hist(outs, 0.0);
  const double ps = 1.0 / double(seeds);
  for (const auto& [x, px] : source)
    for (uint64_t y = 0; y < seeds; ++y)
      hist[extractor_eval(spec, x, y)] += px * ps;
  double tv = 0;
  const double u = 1.0 / double(outs);
  for (double h : hist) tv += std::abs(h - u);
  return 0.5 * tv;
}

double extractor_tv_flat(const ExtractorSpec& spec,
                         std::span<const uint64_t> support) {
  std::vector<std::pair<uint64_t, double>> src;
  src.reserve(support.size());
  const double p = 1.0 / double(support.size());
  for (uint64_t x : support) src.emplace_back(x, p);
  return extractor_tv(spec, src);
}

}  // namespace wprg
