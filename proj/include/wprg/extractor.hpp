#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace wprg {

/// Leftover-hash extractor: the seed selects a multiplier in GF(2^n_src) and
/// the output is the top m_out bits of the product. Seed 0 maps to the
/// multiplier 1 so every fixed seed acts bijectively on the source.
struct ExtractorSpec {
  int n_src = 0;   // source bits
  int d_ext = 0;   // seed bits (<= n_src; the full family has d_ext == n_src)
  int m_out = 0;   // output bits (<= n_src)
  double k_min = 0;    // nominal min-entropy requirement
  double eps_ext = 0;  // nominal error, 0.5 * sqrt(2^(m_out - k_min))

  static ExtractorSpec leftover_hash(int n_src, int d_ext, int m_out,
                                     double k_min);
};

/// GF(2^n) product with a fixed per-degree irreducible polynomial.
uint64_t gf2_mul(uint64_t a, uint64_t b, int n);

uint64_t extractor_eval(const ExtractorSpec& spec, uint64_t x, uint64_t y);

/// Exact total-variation distance of Ext(X, U_d) from uniform m_out bits,
/// for an explicit source distribution (pairs of value, probability).
double extractor_tv(const ExtractorSpec& spec,
                    std::span<const std::pair<uint64_t, double>> source);

/// TV for a flat (uniform-on-support) source.
double extractor_tv_flat(const ExtractorSpec& spec,
                         std::span<const uint64_t> support);

}  // namespace wprg
