#include "wprg/derand.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace wprg {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p *= 2;
  return p;
}

int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

class BaseRot final : public RotProgram {
 public:
  BaseRot(Robp f, TwoWayLabeling lab) : f_(std::move(f)), lab_(std::move(lab)) {}
  int length() const override { return f_.length(); }
  int width() const override { return f_.width(); }
  int symbol_bits() const override { return f_.symbol_bits(); }
  std::pair<uint32_t, uint64_t> rot(int layer, uint32_t state,
                                    uint64_t symbol) const override {
    if (layer > f_.length()) return {state, symbol};
    auto [v, l] = rotation_step(f_, lab_, layer, state, uint32_t(symbol));
    return {v, uint64_t(l)};
  }

 private:
  Robp f_;
  TwoWayLabeling lab_;
};

class WalkRot final : public RotProgram {
 public:
  WalkRot(std::shared_ptr<const RotProgram> parent,
          std::shared_ptr<const MixerFamily> fam, std::vector<int> cuts)
      : parent_(std::move(parent)), fam_(std::move(fam)), cuts_(std::move(cuts)) {}
  int length() const override { return int(cuts_.size()) - 1; }
  int width() const override { return parent_->width(); }
  int symbol_bits() const override { return fam_->seed_bits(); }
  std::pair<uint32_t, uint64_t> rot(int layer, uint32_t state,
                                    uint64_t symbol) const override {
    if (layer > length() || cuts_[layer - 1] == cuts_[layer])
      return {state, symbol};  // padded empty segment
    return derand_walk(*parent_, *fam_, cuts_[layer - 1], cuts_[layer], state,
                       symbol);
  }

 private:
  std::shared_ptr<const RotProgram> parent_;
  std::shared_ptr<const MixerFamily> fam_;
  std::vector<int> cuts_;
};

}  // namespace

std::shared_ptr<const RotProgram> rot_program(const Robp& f,
                                              const TwoWayLabeling& lab) {
  return std::make_shared<BaseRot>(f, lab);
}

std::pair<uint32_t, uint64_t> derandomized_product_rot(
    const RotProgram& g1, int layer1, const RotProgram& g2, int layer2,
    const Expander& h, uint32_t v0, uint64_t label) {
  const int d_bits = g1.symbol_bits();
  const uint64_t d_mask = (uint64_t(1) << d_bits) - 1;
  uint64_t i0 = label & d_mask;
  uint64_t j0 = label >> d_bits;
  auto [v1, i1] = g1.rot(layer1, v0, i0);
  auto [i2, j1] = h.rot(i1, j0);
  auto [v2, i3] = g2.rot(layer2, v1, i2);
  return {v2, i3 | (j1 << d_bits)};
}

int derand_walk_seed_bits(const MixerFamily& fam, int l, int r) {
  const int t_seg = ceil_log2(r - l);
  int bits = fam.symbol_bits;
  for (int t = 1; t <= t_seg; ++t) bits += fam.h[t - 1].label_bits;
  return bits;
}

std::pair<uint32_t, uint64_t> derand_walk(const RotProgram& f,
                                          const MixerFamily& fam, int l, int r,
                                          uint32_t u, uint64_t seed) {
  if (l < 0 || l >= r) throw std::invalid_argument("derand_walk: bad range");
  const int len = r - l;
  const int n_pad = next_pow2(len);
  const int t_seg = ceil_log2(len);
  if (t_seg > fam.levels)
    throw std::invalid_argument("derand_walk: mixer family too shallow");
  const uint64_t x_mask = (uint64_t(1) << fam.symbol_bits) - 1;
  uint32_t v = u;
  for (int i = 1; i <= n_pad; ++i) {
    if (i <= len) {
      uint64_t x = seed & x_mask;
      auto [v2, x2] = f.rot(l + i, v, x);
      v = v2;
      seed = (seed & ~x_mask) | x2;
    }
    if (i < n_pad) {
      int t = 1;
      while ((i & ((1 << t) - 1)) == 0) ++t;  // smallest t with i not a multiple of 2^t
      const int vb = fam.vertex_bits[t - 1];
      const int cb = fam.h[t - 1].label_bits;
      const uint64_t vmask = (uint64_t(1) << vb) - 1;
      const uint64_t cmask = (uint64_t(1) << cb) - 1;
      uint64_t vert = seed & vmask;
      uint64_t lab = (seed >> vb) & cmask;
      auto [vert2, lab2] = fam.h[t - 1].rot(vert, lab);
      seed = (seed & ~((vmask | (cmask << vb)))) | vert2 | (lab2 << vb);
    }
  }
  return {v, seed};
}

IntMat derand_walk_counts(const RotProgram& f, const MixerFamily& fam, int l,
                          int r, uint64_t cap) {
  const int bits = derand_walk_seed_bits(fam, l, r);
  if (bits >= 63 || (uint64_t(1) << bits) > cap)
    throw std::invalid_argument("derand_walk_counts: seed space above cap");
  const uint64_t seeds = uint64_t(1) << bits;
  const int w = f.width();
  IntMat counts = IntMat::zero(w);
  for (int u = 0; u < w; ++u)
    for (uint64_t s = 0; s < seeds; ++s)
      counts.at(u, derand_walk(f, fam, l, r, uint32_t(u), s).first) += 1;
  return counts;
}

Mat derand_walk_matrix(const RotProgram& f, const MixerFamily& fam, int l,
                       int r, uint64_t cap) {
  const int bits = derand_walk_seed_bits(fam, l, r);
  IntMat counts = derand_walk_counts(f, fam, l, r, cap);
  const int w = f.width();
  Mat m(w, w);
  const double p = 1.0 / double(uint64_t(1) << bits);
  for (int u = 0; u < w; ++u)
    for (int v = 0; v < w; ++v) m(u, v) = double(int64_t(counts.at(u, v))) * p;
  return m;
}

std::shared_ptr<const RotProgram> reduced_regular_program(
    std::shared_ptr<const RotProgram> parent,
    std::shared_ptr<const MixerFamily> fam, std::vector<int> cuts) {
  return std::make_shared<WalkRot>(std::move(parent), std::move(fam),
                                   std::move(cuts));
}

namespace {

struct LevelData {
  std::shared_ptr<const MixerFamily> fam;
  std::shared_ptr<const std::vector<SignedTerm>> terms;
  double tau = 0;
  double k_exp = 0;
};

void estimator_rec(const Robp& f, const std::vector<LevelData>& levels,
                   size_t p, std::shared_ptr<const RotProgram> parent,
                   double sign, double& est, uint64_t cap) {
  const auto& ld = levels[p];
  if (p + 1 == levels.size()) {
    std::map<std::pair<int, int>, Mat> cache;
    std::function<Mat(int, int)> window = [&](int a, int b) {
      auto key = std::make_pair(a, b);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
      Mat m;
      if (ld.fam->all_complete && b - a > 1) {
        // perfect mixing factorizes the window into single-layer walks
        m = window(a, a + 1);
        for (int l = a + 1; l < b; ++l) m = m * window(l, l + 1);
      } else {
        m = derand_walk_matrix(*parent, *ld.fam, a, b, cap);
      }
      cache.emplace(key, m);
      return m;
    };
    const int w = f.width();
    for (const auto& term : *ld.terms) {
      Vec dist = Vec::Zero(w);
      dist(f.start_state()) = 1.0;
      for (size_t t = 0; t + 1 < term.cuts.size(); ++t)
        if (term.cuts[t] != term.cuts[t + 1])
          dist = window(term.cuts[t], term.cuts[t + 1]).transpose() * dist;
      double e = 0;
      for (int v = 0; v < w; ++v)
        if (f.accepts_state(v)) e += dist(v);
      est += sign * double(term.sign) * e;
    }
    return;
  }
  for (const auto& term : *ld.terms) {
    auto child = reduced_regular_program(parent, ld.fam, term.cuts);
    estimator_rec(f, levels, p + 1, child, sign * double(term.sign), est, cap);
  }
}

}  // namespace

DerandReport regular_estimator(const Robp& f,
                               const std::vector<DerandLevelSpec>& specs,
                               uint64_t cap) {
  if (specs.empty()) throw std::invalid_argument("regular_estimator: empty schedule");
  if (classify(f) == RobpClass::General)
    throw std::invalid_argument("regular_estimator: program must be regular");
  TwoWayLabeling lab = assign_two_way_labeling(f);
  auto base = rot_program(f, lab);

  DerandReport report;
  std::vector<LevelData> levels;
  int cur_n = f.length();
  int cur_s = f.symbol_bits();
  double weight_prefix = 1.0;
  for (const auto& spec : specs) {
    const int n_pad = next_pow2(cur_n);
    const int depth = ceil_log2(n_pad);
    LevelData ld;
    ld.fam = std::make_shared<const MixerFamily>(make_mixer_family_auto(
        cur_s, depth, spec.lambda_target, spec.seed_cap_bits));
    const double beta =
        ld.fam->all_complete ? 0.0 : 11.0 * ld.fam->lambda_max() * depth;
    ld.tau = beta * 10.0 * std::max(1, depth);
    ld.k_exp = spec.k;
    TermSet ts = binary_splitting_terms(n_pad, spec.k);
    ld.terms = std::make_shared<const std::vector<SignedTerm>>(ts.materialize());
    report.level_terms.push_back(ts.count);
    report.level_tau.push_back(ld.tau);
    report.declared_eps +=
        weight_prefix * std::pow(ld.tau, double(spec.k)) * f.width();
    weight_prefix *= double(ts.count);
    report.index_space *= double(ts.count);
    levels.push_back(std::move(ld));
    cur_n = ts.factors;
    cur_s = levels.back().fam->seed_bits();
  }
  report.final_symbol_bits = cur_s;
  double est = 0;
  estimator_rec(f, levels, 0, base, 1.0, est, cap);
  report.estimate = est;
  return report;
}

}  // namespace wprg
