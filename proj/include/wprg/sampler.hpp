#pragma once

#include <cstdint>
#include <stdexcept>

#include "wprg/expander.hpp"

namespace wprg {

struct SamplerInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SamplerKind { Complete, ExpanderPower };

/// Averaging sampler realized by expander neighborhoods: x names a vertex of
/// an expander on at least 2^q vertices, y an outgoing label, and the sample
/// is the neighbor (folded to q bits). The Chebyshev mixing bound certifies
/// (alpha, gamma) via lambda <= alpha * sqrt(gamma). The complete-bigraph
/// variant is the perfect sampler (every deviation is zero).
struct SamplerSpec {
  int r = 0;  // seed bits (vertex index)
  int p = 0;  // sample-index bits (label)
  int q = 0;  // output bits
  double alpha = 0;
  double gamma = 0;
  Expander graph;
};

/// Builds a sampler for the requested (alpha, gamma); throws
/// SamplerInfeasible when no enumerable-degree graph certifies the target and
/// the complete variant is disallowed.
SamplerSpec design_sampler(int q, double alpha, double gamma,
                           SamplerKind kind = SamplerKind::Complete,
                           int p_cap = 24);

uint64_t sampler_eval(const SamplerSpec& s, uint64_t x, uint64_t y);

}  // namespace wprg
