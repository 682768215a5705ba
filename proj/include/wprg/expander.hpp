#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "wprg/matrix.hpp"

namespace wprg {

/// Regular bigraph with a two-way labeling, given by its rotation map.
/// Degree is a power of two; rot is a bijection on [vertices] x [degree].
struct Expander {
  uint64_t vertices = 1;
  int label_bits = 0;  // degree = 2^label_bits
  std::function<std::pair<uint64_t, uint64_t>(uint64_t, uint64_t)> rot;
  double lambda_nominal = 1.0;  // certified bound, 0 for complete bigraphs
  std::string descriptor;

  uint64_t degree() const { return uint64_t(1) << label_bits; }
  uint64_t step(uint64_t v, uint64_t l) const { return rot(v, l).first; }
};

/// Raw rotation of the degree-8 affine expander on Z_m x Z_m. The labels pair
/// each map with its inverse, so the rotation is an involution.
std::pair<std::pair<uint64_t, uint64_t>, uint64_t> mgg_rot(
    uint64_t m, std::pair<uint64_t, uint64_t> v, uint64_t label);

Expander mgg_expander(uint64_t m);

/// t-step powering: same vertices, degree c^t, intermediate labels threaded
/// in reverse so the rotation stays an involution; lambda bound = lambda^t.
Expander power_expander(const Expander& h, int t);

/// Complete bigraph on 2^bits vertices (degree = vertex count, lambda = 0).
Expander complete_expander(int vertex_bits);

/// Perfect mixer with a consistent labeling: step(v, l) = v xor l, incoming
/// label = outgoing label. Same spectral profile as the complete bigraph.
Expander xor_expander(int vertex_bits);

/// Reuses the outgoing label as the incoming label; valid when every fixed
/// label acts bijectively on the vertices (true for the affine maps).
Expander with_consistent_labels(const Expander& h);

/// Doubles the vertex set by pairing with a complete 2-vertex bigraph;
/// lambda unchanged, degree doubled.
Expander tensor_double(const Expander& h);

/// An expander on 2^vertex_bits vertices: the affine construction when the
/// bit count is even, its doubled variant when odd, powered `power` times.
Expander expander_for_bits(int vertex_bits, int power);

/// Dense transition matrix (guarded by a size cap on vertices * degree).
Mat expander_matrix(const Expander& h, uint64_t cap = uint64_t(1) << 24);

/// Largest singular value of W - J by dense symmetric eigensolve.
double lambda_measure(const Expander& h, uint64_t dense_cap = 4096);

}  // namespace wprg
