#pragma once

#include <memory>

#include "wprg/generator.hpp"
#include "wprg/reduction.hpp"
#include "wprg/robp.hpp"
#include "wprg/terms.hpp"

namespace wprg {

/// A layered program exposed through per-layer rotation maps; layers beyond
/// `length` act as identity. This is the interface the recursive walks
/// consume, so reduced programs are never materialized.
class RotProgram {
 public:
  virtual ~RotProgram() = default;
  virtual int length() const = 0;
  virtual int width() const = 0;
  virtual int symbol_bits() const = 0;
  virtual std::pair<uint32_t, uint64_t> rot(int layer, uint32_t state,
                                            uint64_t symbol) const = 0;
};

std::shared_ptr<const RotProgram> rot_program(const Robp& f,
                                              const TwoWayLabeling& lab);

/// Labeled product of two labeled bigraphs through a labeled expander:
/// rotate in the left graph, rotate the intermediate label in the expander,
/// rotate in the right graph.
std::pair<uint32_t, uint64_t> derandomized_product_rot(
    const RotProgram& g1, int layer1, const RotProgram& g2, int layer2,
    const Expander& h, uint32_t v0, uint64_t label);

/// Pseudorandom rotation walk over layers (l, r] of `f`, padded to the next
/// power of two with identity layers. The seed is (x, e_1, ..., e_T) with x
/// in the symbol alphabet and e_t a label of the level-t mixer; only the
/// levels the segment needs are touched.
std::pair<uint32_t, uint64_t> derand_walk(const RotProgram& f,
                                          const MixerFamily& fam, int l, int r,
                                          uint32_t u, uint64_t seed);

/// Number of seed bits the walk over (l, r] consumes.
int derand_walk_seed_bits(const MixerFamily& fam, int l, int r);

/// Empirical transition matrix of the walk by enumerating (state, seed).
Mat derand_walk_matrix(const RotProgram& f, const MixerFamily& fam, int l,
                       int r, uint64_t cap = uint64_t(1) << 24);

/// Integer count matrix (counts of seeds driving u to v); rows and columns
/// sum to the seed count exactly.
IntMat derand_walk_counts(const RotProgram& f, const MixerFamily& fam, int l,
                          int r, uint64_t cap = uint64_t(1) << 24);

/// Level-p reduced program: layer t is the walk over the parent's segment
/// between consecutive breakpoints, with the parent itself reduced lazily.
std::shared_ptr<const RotProgram> reduced_regular_program(
    std::shared_ptr<const RotProgram> parent,
    std::shared_ptr<const MixerFamily> fam, std::vector<int> cuts);

struct DerandLevelSpec {
  int k = 1;
  double lambda_target = 0.0;  // 0 selects complete mixers
  int seed_cap_bits = 24;
};

struct DerandReport {
  double declared_eps = 0;
  double estimate = 0;
  int final_symbol_bits = 0;
  std::vector<uint64_t> level_terms;
  std::vector<double> level_tau;
  double index_space = 1;  // product of term counts
};

/// Signed recursive estimator: enumerates term-index tuples, walks the
/// nested rotations, and accumulates per-layer averaged matrices of the
/// deepest program. Declared error is eps_1 w + K_1 eps_2 w + ... with
/// eps_p = tau_p^{k_p}.
DerandReport regular_estimator(const Robp& f,
                               const std::vector<DerandLevelSpec>& levels,
                               uint64_t cap = uint64_t(1) << 24);

}  // namespace wprg
