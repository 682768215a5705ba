#include "wprg/robp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wprg/rng.hpp"

namespace wprg {

std::string to_string(RobpClass c) {
  switch (c) {
    case RobpClass::General: return "general";
    case RobpClass::Regular: return "regular";
    case RobpClass::Permutation: return "permutation";
  }
  return "general";
}

RobpClass robp_class_from_string(const std::string& s) {
  if (s == "permutation") return RobpClass::Permutation;
  if (s == "regular") return RobpClass::Regular;
  if (s == "general") return RobpClass::General;
  throw std::invalid_argument("unknown robp class: " + s);
}

Robp::Robp(int n, int w, int s, std::vector<std::vector<uint32_t>> transitions,
           uint32_t start_state, std::vector<uint8_t> accept)
    : n_(n), w_(w), s_(s), trans_(std::move(transitions)), start_(start_state),
      accept_(std::move(accept)) {
  if (n_ < 1 || w_ < 1 || s_ < 1) throw std::invalid_argument("robp: n, w, s must be >= 1");
  if (s_ > 26 || (uint64_t(w_) << s_) > (uint64_t(1) << 28))
    throw std::invalid_argument("robp: layer table too large");
  if (trans_.size() != size_t(n_)) throw std::invalid_argument("robp: layer count mismatch");
  const uint64_t row = uint64_t(w_) << s_;
  for (const auto& layer : trans_) {
    if (layer.size() != row) throw std::invalid_argument("robp: layer size mismatch");
    for (uint32_t t : layer)
      if (t >= uint32_t(w_)) throw std::invalid_argument("robp: target state out of range");
  }
  if (start_ >= uint32_t(w_)) throw std::invalid_argument("robp: start state out of range");
  if (accept_.size() != size_t(w_)) throw std::invalid_argument("robp: accept mask size mismatch");
}

Robp Robp::with_accept(std::vector<uint8_t> accept) const {
  return Robp(n_, w_, s_, trans_, start_, std::move(accept));
}

bool evaluate(const Robp& f, std::span<const uint32_t> input) {
  if (input.size() != size_t(f.length()))
    throw std::invalid_argument("evaluate: input length mismatch");
  uint32_t v = f.start_state();
  for (int i = 1; i <= f.length(); ++i) {
    uint32_t x = input[i - 1];
    if (x >= f.alphabet()) throw std::invalid_argument("evaluate: symbol out of range");
    v = f.step(i, v, x);
  }
  return f.accepts_state(v);
}

Mat transition_matrix(const Robp& f, int i, int j,
                      std::span<const uint32_t> input) {
  if (i < 0 || i >= j || j > f.length())
    throw std::invalid_argument("transition_matrix: bad layer range");
  if (input.size() != size_t(j - i))
    throw std::invalid_argument("transition_matrix: input length mismatch");
  Mat m = Mat::Zero(f.width(), f.width());
  for (int u = 0; u < f.width(); ++u) {
    uint32_t v = uint32_t(u);
    for (int t = i + 1; t <= j; ++t) {
      uint32_t x = input[t - i - 1];
      if (x >= f.alphabet())
        throw std::invalid_argument("transition_matrix: symbol out of range");
      v = f.step(t, v, x);
    }
    m(u, v) = 1.0;
  }
  return m;
}

Mat one_step_avg(const Robp& f, int i) {
  Mat m = Mat::Zero(f.width(), f.width());
  const double p = 1.0 / double(f.alphabet());
  for (int u = 0; u < f.width(); ++u)
    for (uint64_t x = 0; x < f.alphabet(); ++x) m(u, f.step(i, u, uint32_t(x))) += p;
  return m;
}

Mat exact_product(const Robp& f, int i, int j) {
  if (i < 0 || i > j || j > f.length())
    throw std::invalid_argument("exact_product: bad layer range");
  Mat acc = Mat::Identity(f.width(), f.width());
  for (int t = i + 1; t <= j; ++t) acc = acc * one_step_avg(f, t);
  return acc;
}

double exact_expectation(const Robp& f) {
  Vec dist = Vec::Zero(f.width());
  dist(f.start_state()) = 1.0;
  for (int i = 1; i <= f.length(); ++i) {
    Vec next = Vec::Zero(f.width());
    const double p = 1.0 / double(f.alphabet());
    for (int u = 0; u < f.width(); ++u) {
      if (dist(u) == 0.0) continue;
      for (uint64_t x = 0; x < f.alphabet(); ++x)
        next(f.step(i, u, uint32_t(x))) += dist(u) * p;
    }
    dist = next;
  }
  double e = 0;
  for (int v = 0; v < f.width(); ++v)
    if (f.accepts_state(v)) e += dist(v);
  return e;
}

Dyadic exact_expectation_rational(const Robp& f, uint64_t cap) {
  const int bits = f.length() * f.symbol_bits();
  if (bits >= 63 || (uint64_t(1) << bits) > cap)
    throw std::invalid_argument("exact_expectation_rational: enumeration cap exceeded");
  const uint64_t total = uint64_t(1) << bits;
  const uint64_t mask = f.alphabet() - 1;
  unsigned long long count = 0;
  for (uint64_t inp = 0; inp < total; ++inp) {
    uint32_t v = f.start_state();
    uint64_t rest = inp;
    for (int i = 1; i <= f.length(); ++i) {
      v = f.step(i, v, uint32_t(rest & mask));
      rest >>= f.symbol_bits();
    }
    count += f.accepts_state(v) ? 1 : 0;
  }
  return Dyadic::from_count(count, bits);
}

RobpClass classify(const Robp& f) {
  bool permutation = true;
  bool regular = true;
  std::vector<uint32_t> indeg(f.width());
  std::vector<uint8_t> hit(f.width());
  for (int i = 1; i <= f.length() && (permutation || regular); ++i) {
    std::fill(indeg.begin(), indeg.end(), 0);
    for (uint64_t x = 0; x < f.alphabet() && permutation; ++x) {
      std::fill(hit.begin(), hit.end(), 0);
      for (int u = 0; u < f.width(); ++u) {
        uint32_t v = f.step(i, u, uint32_t(x));
        if (hit[v]) {
          permutation = false;
          break;
        }
        hit[v] = 1;
      }
    }
    for (int u = 0; u < f.width(); ++u)
      for (uint64_t x = 0; x < f.alphabet(); ++x) ++indeg[f.step(i, u, uint32_t(x))];
    for (int v = 0; v < f.width(); ++v)
      if (indeg[v] != f.alphabet()) {
        regular = false;
        break;
      }
  }
  if (permutation) return RobpClass::Permutation;
  if (regular) return RobpClass::Regular;
  return RobpClass::General;
}

TwoWayLabeling assign_two_way_labeling(const Robp& f) {
  if (classify(f) == RobpClass::General)
    throw std::invalid_argument("assign_two_way_labeling: program is not regular");
  TwoWayLabeling lab;
  lab.in_label.resize(f.length());
  std::vector<uint32_t> next_rank(f.width());
  for (int i = 1; i <= f.length(); ++i) {
    lab.in_label[i - 1].assign(uint64_t(f.width()) << f.symbol_bits(), 0);
    std::fill(next_rank.begin(), next_rank.end(), 0);
    // (u, x) in lexicographic order is the canonical incoming-edge order.
    for (int u = 0; u < f.width(); ++u)
      for (uint64_t x = 0; x < f.alphabet(); ++x) {
        uint32_t v = f.step(i, u, uint32_t(x));
        lab.in_label[i - 1][(uint64_t(u) << f.symbol_bits()) | x] = next_rank[v]++;
      }
  }
  return lab;
}

TwoWayLabeling consistent_labeling(const Robp& f) {
  if (classify(f) != RobpClass::Permutation)
    throw std::invalid_argument("consistent_labeling: program is not a permutation");
  TwoWayLabeling lab;
  lab.in_label.resize(f.length());
  for (int i = 1; i <= f.length(); ++i) {
    lab.in_label[i - 1].resize(uint64_t(f.width()) << f.symbol_bits());
    for (int u = 0; u < f.width(); ++u)
      for (uint64_t x = 0; x < f.alphabet(); ++x)
        lab.in_label[i - 1][(uint64_t(u) << f.symbol_bits()) | x] = uint32_t(x);
  }
  return lab;
}

bool valid_two_way_labeling(const Robp& f, const TwoWayLabeling& lab) {
  if (lab.in_label.size() != size_t(f.length())) return false;
  std::vector<uint8_t> seen;
  for (int i = 1; i <= f.length(); ++i) {
    if (lab.in_label[i - 1].size() != (uint64_t(f.width()) << f.symbol_bits()))
      return false;
    seen.assign(uint64_t(f.width()) << f.symbol_bits(), 0);
    for (int u = 0; u < f.width(); ++u)
      for (uint64_t x = 0; x < f.alphabet(); ++x) {
        uint32_t v = f.step(i, u, uint32_t(x));
        uint32_t l = lab.in_label[i - 1][(uint64_t(u) << f.symbol_bits()) | x];
        if (l >= f.alphabet()) return false;
        uint64_t key = (uint64_t(v) << f.symbol_bits()) | l;
        if (seen[key]) return false;
        seen[key] = 1;
      }
  }
  return true;
}

std::pair<uint32_t, uint32_t> rotation_step(const Robp& f,
                                            const TwoWayLabeling& lab, int i,
                                            uint32_t u, uint32_t x) {
  if (i < 1 || i > f.length() || u >= uint32_t(f.width()) || x >= f.alphabet())
    throw std::invalid_argument("rotation_step: bad layer/state/symbol");
  return {f.step(i, u, x), lab.in_label[i - 1][(uint64_t(u) << f.symbol_bits()) | x]};
}

namespace {

// One layer of a binary regular program as an explicit edge list: per source
// node the two outgoing edges with mutable labels. Edge identity is
// (source, slot); targets never change.
struct BinaryLayer {
  std::vector<std::array<uint32_t, 2>> target;  // [u][slot]
  std::vector<std::array<uint32_t, 2>> label;   // [u][slot]
  // per target: two incoming (source, slot) pairs
  std::vector<std::array<std::pair<uint32_t, uint32_t>, 2>> in_edges;
};

BinaryLayer make_layer(const Robp& f, int i) {
  BinaryLayer L;
  const int w = f.width();
  L.target.resize(w);
  L.label.resize(w);
  L.in_edges.resize(w);
  std::vector<int> in_count(w, 0);
  for (int u = 0; u < w; ++u)
    for (uint32_t slot = 0; slot < 2; ++slot) {
      uint32_t v = f.step(i, u, slot);
      L.target[u][slot] = v;
      L.label[u][slot] = slot;
      L.in_edges[v][in_count[v]++] = {uint32_t(u), slot};
    }
  return L;
}

// Walks the structural cycle through source node v0, applying the relabeling
// rule, and reports the source nodes on the cycle. The walk alternates
// source-side and target-side nodes; at each arrival the node's other
// adjacent edge is flipped if its label matches the arrival label.
std::vector<uint32_t> cycle_walk(BinaryLayer& L, uint32_t v0, bool relabel) {
  std::vector<uint32_t> sources;
  sources.push_back(v0);
  // leave v0 through its slot with label 0 (slot 0 initially carries label 0,
  // but respect current labels in case of earlier flips on this cycle).
  uint32_t slot0 = L.label[v0][0] == 0 ? 0 : 1;
  uint32_t cur_u = v0, cur_slot = slot0;
  while (true) {
    // traverse edge (cur_u, cur_slot) to its target
    uint32_t t = L.target[cur_u][cur_slot];
    uint32_t arrive = L.label[cur_u][cur_slot];
    // other incoming edge of t
    bool via_first = (L.in_edges[t][0].first == cur_u && L.in_edges[t][0].second == cur_slot);
    auto [nu, nslot] = via_first ? L.in_edges[t][1] : L.in_edges[t][0];
    if (relabel && L.label[nu][nslot] == arrive) L.label[nu][nslot] ^= 1u;
    // traverse backwards along (nu, nslot) to the source side
    uint32_t back_label = L.label[nu][nslot];
    if (nu == v0) break;
    sources.push_back(nu);
    // other outgoing edge of nu
    uint32_t other = nslot ^ 1u;
    if (relabel && L.label[nu][other] == back_label) L.label[nu][other] ^= 1u;
    cur_u = nu;
    cur_slot = other;
  }
  return sources;
}

}  // namespace

Robp regular_to_permutation_binary(const Robp& f, bool faithful_visit_check) {
  if (f.symbol_bits() != 1)
    throw std::invalid_argument("regular_to_permutation_binary: alphabet must be binary");
  RobpClass c = classify(f);
  if (c == RobpClass::General)
    throw std::invalid_argument("regular_to_permutation_binary: program is not regular");

  std::vector<std::vector<uint32_t>> out_layers;
  out_layers.reserve(f.length());
  for (int i = 1; i <= f.length(); ++i) {
    BinaryLayer L = make_layer(f, i);
    std::vector<uint8_t> visited(f.width(), 0);
    for (uint32_t v = 0; v < uint32_t(f.width()); ++v) {
      bool seen;
      if (faithful_visit_check) {
        // re-walk the cycle of every earlier node instead of using a set
        seen = false;
        for (uint32_t v2 = 0; v2 < v && !seen; ++v2) {
          BinaryLayer probe = make_layer(f, i);
          for (uint32_t src : cycle_walk(probe, v2, false))
            if (src == v) {
              seen = true;
              break;
            }
        }
      } else {
        seen = visited[v] != 0;
      }
      if (seen) continue;
      for (uint32_t s : cycle_walk(L, v, true)) visited[s] = 1;
    }
    // write the relabeled layer back as (state, symbol) -> target
    std::vector<uint32_t> table(uint64_t(f.width()) << 1);
    for (int u = 0; u < f.width(); ++u)
      for (uint32_t slot = 0; slot < 2; ++slot)
        table[(uint64_t(u) << 1) | L.label[u][slot]] = L.target[u][slot];
    out_layers.push_back(std::move(table));
  }
  return Robp(f.length(), f.width(), 1, std::move(out_layers), f.start_state(),
              f.accept_mask());
}

double robp_weight(const Robp& f) {
  // acceptance probability from each node, by backward induction
  std::vector<std::vector<double>> q(f.length() + 1,
                                     std::vector<double>(f.width(), 0.0));
  for (int v = 0; v < f.width(); ++v) q[f.length()][v] = f.accepts_state(v) ? 1.0 : 0.0;
  const double p = 1.0 / double(f.alphabet());
  for (int i = f.length(); i >= 1; --i)
    for (int u = 0; u < f.width(); ++u) {
      double acc = 0;
      for (uint64_t x = 0; x < f.alphabet(); ++x) acc += q[i][f.step(i, u, uint32_t(x))];
      q[i - 1][u] = acc * p;
    }
  double weight = 0;
  for (int i = 1; i <= f.length(); ++i)
    for (int u = 0; u < f.width(); ++u)
      for (uint64_t x = 0; x < f.alphabet(); ++x)
        weight += std::abs(q[i][f.step(i, u, uint32_t(x))] - q[i - 1][u]);
  return weight;
}

Robp pad_to_length(const Robp& f, int n_new) {
  if (n_new < f.length()) throw std::invalid_argument("pad_to_length: cannot shrink");
  if (n_new == f.length()) return f;
  std::vector<std::vector<uint32_t>> layers;
  layers.reserve(n_new);
  for (int i = 1; i <= f.length(); ++i) layers.push_back(f.layer(i));
  std::vector<uint32_t> ident(uint64_t(f.width()) << f.symbol_bits());
  for (int u = 0; u < f.width(); ++u)
    for (uint64_t x = 0; x < f.alphabet(); ++x)
      ident[(uint64_t(u) << f.symbol_bits()) | x] = uint32_t(u);
  for (int i = f.length(); i < n_new; ++i) layers.push_back(ident);
  return Robp(n_new, f.width(), f.symbol_bits(), std::move(layers),
              f.start_state(), f.accept_mask());
}

namespace {

std::vector<uint32_t> random_permutation(int w, CounterRng& rng) {
  std::vector<uint32_t> p(w);
  std::iota(p.begin(), p.end(), 0);
  for (int i = w - 1; i > 0; --i)
    std::swap(p[i], p[rng.below(uint64_t(i) + 1)]);
  return p;
}

}  // namespace

Robp random_permutation_robp(int n, int w, int s, CounterRng& rng) {
  std::vector<std::vector<uint32_t>> layers(n);
  for (int i = 0; i < n; ++i) {
    layers[i].resize(uint64_t(w) << s);
    for (uint64_t x = 0; x < (uint64_t(1) << s); ++x) {
      auto p = random_permutation(w, rng);
      for (int u = 0; u < w; ++u) layers[i][(uint64_t(u) << s) | x] = p[u];
    }
  }
  return Robp(n, w, s, std::move(layers), 0, random_accept(w, rng));
}

Robp random_regular_robp(int n, int w, int s, CounterRng& rng) {
  std::vector<std::vector<uint32_t>> layers(n);
  for (int i = 0; i < n; ++i) {
    layers[i].resize(uint64_t(w) << s);
    // union of 2^s random perfect matchings...
    std::vector<std::vector<uint32_t>> matchings;
    for (uint64_t x = 0; x < (uint64_t(1) << s); ++x)
      matchings.push_back(random_permutation(w, rng));
    // ...then shuffle each vertex's outgoing labels
    for (int u = 0; u < w; ++u) {
      std::vector<uint32_t> labels(uint64_t(1) << s);
      std::iota(labels.begin(), labels.end(), 0);
      for (int j = int(labels.size()) - 1; j > 0; --j)
        std::swap(labels[j], labels[rng.below(uint64_t(j) + 1)]);
      for (uint64_t x = 0; x < (uint64_t(1) << s); ++x)
        layers[i][(uint64_t(u) << s) | labels[x]] = matchings[x][u];
    }
  }
  return Robp(n, w, s, std::move(layers), 0, random_accept(w, rng));
}

Robp random_general_robp(int n, int w, int s, CounterRng& rng) {
  std::vector<std::vector<uint32_t>> layers(n);
  for (int i = 0; i < n; ++i) {
    layers[i].resize(uint64_t(w) << s);
    for (auto& t : layers[i]) t = uint32_t(rng.below(uint64_t(w)));
  }
  return Robp(n, w, s, std::move(layers), 0, random_accept(w, rng));
}

std::vector<uint8_t> random_accept(int w, CounterRng& rng, bool proper) {
  std::vector<uint8_t> a(w);
  for (int tries = 0; tries < 64; ++tries) {
    int ones = 0;
    for (int v = 0; v < w; ++v) {
      a[v] = uint8_t(rng.next() & 1);
      ones += a[v];
    }
    if (!proper || (ones > 0 && ones < w)) return a;
  }
  a.assign(w, 0);
  a[0] = 1;
  return a;
}

std::string robp_to_string(const Robp& f, const TwoWayLabeling* lab) {
  std::ostringstream os;
  os << "robp " << f.length() << ' ' << f.width() << ' ' << f.symbol_bits()
     << ' ' << to_string(classify(f)) << '\n';
  os << "start " << f.start_state() << '\n';
  int acount = 0;
  for (int v = 0; v < f.width(); ++v) acount += f.accepts_state(v) ? 1 : 0;
  os << "accept " << acount;
  for (int v = 0; v < f.width(); ++v)
    if (f.accepts_state(v)) os << ' ' << v;
  os << '\n';
  for (int i = 1; i <= f.length(); ++i) {
    os << "layer " << i << '\n';
    for (int u = 0; u < f.width(); ++u) {
      for (uint64_t x = 0; x < f.alphabet(); ++x)
        os << (x ? " " : "") << f.step(i, u, uint32_t(x));
      os << '\n';
    }
  }
  if (lab) {
    for (int i = 1; i <= f.length(); ++i) {
      os << "rot " << i << '\n';
      for (int u = 0; u < f.width(); ++u) {
        for (uint64_t x = 0; x < f.alphabet(); ++x)
          os << (x ? " " : "")
             << lab->in_label[i - 1][(uint64_t(u) << f.symbol_bits()) | x];
        os << '\n';
      }
    }
  }
  return os.str();
}

Robp robp_from_string(const std::string& text,
                      std::optional<TwoWayLabeling>* lab_out) {
  std::istringstream is(text);
  std::string tok;
  if (!(is >> tok) || tok != "robp") throw std::invalid_argument("robp text: bad header");
  int n, w, s;
  std::string cls;
  if (!(is >> n >> w >> s >> cls)) throw std::invalid_argument("robp text: bad header fields");
  robp_class_from_string(cls);  // validated, not stored
  uint32_t start = 0;
  std::vector<uint8_t> accept(w, 0);
  std::vector<std::vector<uint32_t>> layers(n);
  std::optional<TwoWayLabeling> lab;
  while (is >> tok) {
    if (tok == "start") {
      is >> start;
    } else if (tok == "accept") {
      int count;
      is >> count;
      for (int j = 0; j < count; ++j) {
        int v;
        is >> v;
        accept.at(v) = 1;
      }
    } else if (tok == "layer") {
      int i;
      is >> i;
      auto& L = layers.at(i - 1);
      L.resize(uint64_t(w) << s);
      for (auto& t : L) is >> t;
    } else if (tok == "rot") {
      if (!lab) {
        lab.emplace();
        lab->in_label.resize(n);
      }
      int i;
      is >> i;
      auto& L = lab->in_label.at(i - 1);
      L.resize(uint64_t(w) << s);
      for (auto& t : L) is >> t;
    } else {
      throw std::invalid_argument("robp text: unknown record " + tok);
    }
  }
  if (lab_out) *lab_out = lab;
  return Robp(n, w, s, std::move(layers), start, std::move(accept));
}

}  // namespace wprg
