#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wprg/dyadic.hpp"
#include "wprg/matrix.hpp"

namespace wprg {

enum class RobpClass { General, Regular, Permutation };

std::string to_string(RobpClass c);
RobpClass robp_class_from_string(const std::string& s);

/// Layered read-once branching program. Layers are materialized: layer i
/// (1-based) maps (state, symbol) -> state, states are 0-based per layer.
/// Immutable after construction.
class Robp {
 public:
  Robp(int n, int w, int s, std::vector<std::vector<uint32_t>> transitions,
       uint32_t start_state, std::vector<uint8_t> accept);

  int length() const { return n_; }
  int width() const { return w_; }
  int symbol_bits() const { return s_; }
  uint64_t alphabet() const { return uint64_t(1) << s_; }
  uint32_t start_state() const { return start_; }
  const std::vector<uint8_t>& accept_mask() const { return accept_; }
  bool accepts_state(uint32_t v) const { return accept_[v] != 0; }

  /// Transition at layer i (1-based) from `state` on `symbol`.
  uint32_t step(int i, uint32_t state, uint32_t symbol) const {
    return trans_[i - 1][(uint64_t(state) << s_) | symbol];
  }
  const std::vector<uint32_t>& layer(int i) const { return trans_[i - 1]; }

  Robp with_accept(std::vector<uint8_t> accept) const;

 private:
  int n_, w_, s_;
  std::vector<std::vector<uint32_t>> trans_;
  uint32_t start_;
  std::vector<uint8_t> accept_;
};

/// Walks the program on `input` (length n, symbols < 2^s); 1 iff accepted.
bool evaluate(const Robp& f, std::span<const uint32_t> input);

/// 0/1 matrix, entry (u, v) = 1 iff `input` drives u at layer i to v at
/// layer j. Row-stochastic with one 1 per row.
Mat transition_matrix(const Robp& f, int i, int j,
                      std::span<const uint32_t> input);

/// Average of the one-step matrices of layer i over all symbols.
Mat one_step_avg(const Robp& f, int i);

/// Product of the averaged one-step matrices over layers i+1..j.
Mat exact_product(const Robp& f, int i, int j);

/// e_start^T (prod A_i) 1_accept in double arithmetic; exact at desk scale
/// because every entry is dyadic.
double exact_expectation(const Robp& f);

/// Acceptance probability by full input enumeration, as an exact dyadic
/// rational. Throws if (2^s)^n exceeds `cap` inputs.
Dyadic exact_expectation_rational(const Robp& f, uint64_t cap = uint64_t(1)
                                                               << 24);

/// Strongest class that holds: Permutation > Regular > General.
RobpClass classify(const Robp& f);

/// Per-layer incoming edge labels; rot_i(u, x) = (step(i,u,x), in_label).
struct TwoWayLabeling {
  // in_label[i-1][(u << s) | x] is the incoming label of the edge (u,x).
  std::vector<std::vector<uint32_t>> in_label;
};

/// Canonical labeling of a regular program: the incoming label of edge
/// (u --x--> v) is its rank among v's incoming edges ordered by (u, x).
TwoWayLabeling assign_two_way_labeling(const Robp& f);

/// For permutation programs: incoming label = outgoing symbol.
TwoWayLabeling consistent_labeling(const Robp& f);

bool valid_two_way_labeling(const Robp& f, const TwoWayLabeling& lab);

std::pair<uint32_t, uint32_t> rotation_step(const Robp& f,
                                            const TwoWayLabeling& lab, int i,
                                            uint32_t u, uint32_t x);

/// Relabels each layer of a binary regular program along its bigraph cycles
/// so every per-symbol map becomes a bijection. The edge multiset per layer
/// is unchanged, so the acceptance probability is preserved exactly.
/// When `faithful_visit_check` is set, the "already visited" test re-walks
/// earlier cycles instead of consulting a visited set; both paths produce
/// identical output.
Robp regular_to_permutation_binary(const Robp& f,
                                   bool faithful_visit_check = false);

/// Sum over edges (u, v) of |acc(v) - acc(u)| where acc is the acceptance
/// probability from a node under uniform inputs.
double robp_weight(const Robp& f);

/// Appends identity layers (with any symbol) until the length is n_new.
Robp pad_to_length(const Robp& f, int n_new);

// --- instance generation -------------------------------------------------

class CounterRng;
Robp random_permutation_robp(int n, int w, int s, CounterRng& rng);
Robp random_regular_robp(int n, int w, int s, CounterRng& rng);
Robp random_general_robp(int n, int w, int s, CounterRng& rng);
/// Random accept set (each state independently with probability 1/2),
/// re-drawn if empty or full when proper=true.
std::vector<uint8_t> random_accept(int w, CounterRng& rng, bool proper = true);

// --- text format -----------------------------------------------------------

std::string robp_to_string(const Robp& f, const TwoWayLabeling* lab = nullptr);
Robp robp_from_string(const std::string& text,
                      std::optional<TwoWayLabeling>* lab_out = nullptr);

}  // namespace wprg
