#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wprg/expander.hpp"
#include "wprg/extractor.hpp"
#include "wprg/robp.hpp"

namespace wprg {

/// Mixer family for the recursive generator: level t is a graph on
/// [2^(s + sum of earlier label bits)] vertices. A level with the complete
/// bigraph mixes perfectly (lambda = 0).
struct MixerFamily {
  int symbol_bits = 0;
  int levels = 0;  // output length is 2^levels
  std::vector<Expander> h;
  std::vector<int> vertex_bits;       // per level
  std::vector<double> lambda_level;   // certified per level
  bool all_complete = true;

  int seed_bits() const;
  double lambda_max() const;
};

struct LevelChoice {
  bool complete = true;
  int power = 1;  // for the affine-expander variant
};

MixerFamily make_mixer_family(int symbol_bits, int levels,
                              const std::vector<LevelChoice>& choices);

/// Greedy family: per level uses the powered affine expander when it can
/// reach lambda_target within the seed budget, else the complete bigraph.
MixerFamily make_mixer_family_auto(int symbol_bits, int levels,
                                   double lambda_target, int seed_cap_bits);

struct NzStructure {
  ExtractorSpec ext;
  int n = 0;
};

/// Seeded symbol-sequence generator with prefix-truncation semantics:
/// the first m symbols of the output are well defined for every m <= n.
struct Generator {
  int seed_bits = 0;
  int out_len = 0;
  int symbol_bits = 0;
  std::string descriptor;
  /// When set, averaging the generator over its seed space is exactly the
  /// uniform-input average (complete mixers, plain randomness).
  bool exact_equiv = false;
  std::shared_ptr<const MixerFamily> mixers;  // recursive generators
  std::shared_ptr<const NzStructure> nz;      // extract-then-concatenate

  std::vector<uint32_t> eval(uint64_t seed) const;
  std::vector<uint32_t> eval_prefix(uint64_t seed, int m) const;
};

/// Recursive generator over the mixer family: level 0 is the identity on one
/// symbol; level t concatenates the two recursive halves, walking the right
/// seed one step through the level-t graph. Seed layout is
/// most-significant-first in recursion order (the level-t label is the low
/// label_bits of the level-t seed).
Generator recursive_mixer_generator(std::shared_ptr<const MixerFamily> fam);

/// Extract-then-concatenate generator: seed = x . y_1 ... y_n, symbol i is
/// Ext(x, y_i).
Generator nz_generator(const ExtractorSpec& ext, int n);

Generator true_randomness(int n, int symbol_bits);

/// E_seed[f^{[i,j]}(gen prefix)] computed exactly: by factoring over the
/// independent parts of the seed when the generator allows it, else by seed
/// enumeration (guarded by cap).
Mat gen_avg_matrix(const Generator& g, const Robp& f, int i, int j,
                   uint64_t cap = uint64_t(1) << 24);

/// Entrywise error of the generator-averaged end-to-end matrix vs the exact
/// product.
double gen_entrywise_error(const Generator& g, const Robp& f,
                           uint64_t cap = uint64_t(1) << 24);

/// All window averages B[i][j] = E[f^{[i,j]}(gen prefix)] at once.
std::vector<std::vector<Mat>> gen_avg_all_windows(
    const Generator& g, const Robp& f, uint64_t cap = uint64_t(1) << 24);

/// Max entrywise error over all layer windows [i, j]; this is the hypothesis
/// the signed-sum error reduction consumes.
double gen_entrywise_error_segments(const Generator& g, const Robp& f,
                                    uint64_t cap = uint64_t(1) << 24);

/// Same maximized in the max-row-sum norm (the submultiplicative norm the
/// refinement polynomial's error bound is stated in).
double gen_infnorm_error_segments(const Generator& g, const Robp& f,
                                  uint64_t cap = uint64_t(1) << 24);

/// sv-approximation error of the averaged end-to-end matrix vs exact, for
/// permutation programs.
double gen_sv_error(const Generator& g, const Robp& f,
                    uint64_t cap = uint64_t(1) << 24);

/// Max sv error over the dyadic windows of [0, n]; the hypothesis measured
/// for the dyadic signed-sum recursion.
double gen_sv_error_dyadic(const Generator& g, const Robp& f,
                           uint64_t cap = uint64_t(1) << 24);

}  // namespace wprg
