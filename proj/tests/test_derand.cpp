#include <doctest.h>

#include <cmath>

#include "wprg/derand.hpp"
#include "wprg/generator.hpp"
#include "wprg/perm.hpp"
#include "wprg/rng.hpp"

using namespace wprg;

TEST_CASE("labeled product: perfect mixing reproduces the true product") {
  CounterRng rng(1);
  Robp f = random_regular_robp(2, 4, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  Expander h = complete_expander(1);  // on the 2-symbol label space
  const int w = 4;
  Mat counts = Mat::Zero(w, w);
  for (uint32_t v0 = 0; v0 < 4; ++v0)
    for (uint64_t l = 0; l < 4; ++l) {
      auto [v2, l2] = derandomized_product_rot(*prog, 1, *prog, 2, h, v0, l);
      counts(v0, v2) += 1.0;
      (void)l2;
    }
  CHECK(entrywise_max(counts / 4.0 - exact_product(f, 0, 2)) <= 1e-12);
}

TEST_CASE("labeled product rotation is a bijection") {
  CounterRng rng(2);
  Robp f = random_regular_robp(2, 5, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  Expander h = expander_for_bits(1, 1);
  std::vector<uint8_t> seen(5 * 4, 0);
  for (uint32_t v0 = 0; v0 < 5; ++v0)
    for (uint64_t l = 0; l < 4; ++l) {
      auto [v2, l2] = derandomized_product_rot(*prog, 1, *prog, 2, h, v0, l);
      uint64_t key = v2 * 4 + l2;
      REQUIRE(!seen[key]);
      seen[key] = 1;
    }
}

TEST_CASE("walk base case: unit segment touches no mixer labels") {
  CounterRng rng(3);
  Robp f = random_regular_robp(4, 4, 2, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  auto fam = make_mixer_family(2, 2, {{false, 1}, {false, 1}});
  for (uint32_t u = 0; u < 4; ++u)
    for (uint64_t seed = 0; seed < (uint64_t(1) << fam.seed_bits()); ++seed) {
      auto [v, s2] = derand_walk(*prog, fam, 2, 3, u, seed);
      auto [v2, x2] = rotation_step(f, lab, 3, u, uint32_t(seed & 3));
      CHECK(v == v2);
      CHECK(s2 == ((seed & ~uint64_t(3)) | x2));
    }
}

TEST_CASE("walk bijectivity and half-composition structure") {
  CounterRng rng(4);
  Robp f = random_regular_robp(4, 4, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  auto fam = make_mixer_family(1, 2, {{false, 1}, {false, 2}});
  const int bits = derand_walk_seed_bits(fam, 0, 4);
  std::vector<uint8_t> seen(uint64_t(4) << bits, 0);
  for (uint32_t u = 0; u < 4; ++u)
    for (uint64_t s = 0; s < (uint64_t(1) << bits); ++s) {
      auto [v, s2] = derand_walk(*prog, fam, 0, 4, u, s);
      uint64_t key = (uint64_t(v) << bits) | s2;
      REQUIRE(!seen[key]);
      seen[key] = 1;
    }
  // composing the two half walks through the top mixer reproduces the walk
  const int vb = fam.vertex_bits[1];
  const int cb = fam.h[1].label_bits;
  for (uint32_t u = 0; u < 4; ++u)
    for (uint64_t s = 0; s < (uint64_t(1) << bits); ++s) {
      auto [vmid, smid] = derand_walk(*prog, fam, 0, 2, u, s);
      uint64_t vert = smid & ((uint64_t(1) << vb) - 1);
      uint64_t lab2 = (smid >> vb) & ((uint64_t(1) << cb) - 1);
      auto [vert2, lab3] = fam.h[1].rot(vert, lab2);
      uint64_t smix = (smid & ~((((uint64_t(1) << vb) - 1) |
                                 (((uint64_t(1) << cb) - 1) << vb)))) |
                      vert2 | (lab3 << vb);
      auto [vend, send] = derand_walk(*prog, fam, 2, 4, vmid, smix);
      auto [vfull, sfull] = derand_walk(*prog, fam, 0, 4, u, s);
      CHECK(vend == vfull);
      CHECK(send == sfull);
    }
}

TEST_CASE("walk matrices: stochasticity in exact counts and the sv bound") {
  CounterRng rng(5);
  Robp f = random_regular_robp(8, 4, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  auto fam = make_mixer_family(1, 3, {{false, 2}, {false, 2}, {false, 2}});
  double lam = fam.lambda_max();
  for (int span = 1; span <= 8; span *= 2)
    for (int l = 0; l + span <= 8; l += span) {
      IntMat counts = derand_walk_counts(*prog, fam, l, l + span);
      const uint64_t seeds = uint64_t(1)
                             << derand_walk_seed_bits(fam, l, l + span);
      for (int u = 0; u < 4; ++u) {
        __int128 row = 0, col = 0;
        for (int v = 0; v < 4; ++v) {
          row += counts.at(u, v);
          col += counts.at(v, u);
        }
        CHECK(row == __int128(seeds));
        CHECK(col == __int128(seeds));
      }
      if (span >= 2) {
        Mat wt = derand_walk_matrix(*prog, fam, l, l + span);
        double sv = sv_approx_error(wt, exact_product(f, l, l + span));
        CHECK(sv <= 11.0 * lam * std::log2(double(span)) + 1e-9);
      }
    }
}

TEST_CASE("perfect mixers give exact walk matrices") {
  CounterRng rng(6);
  Robp f = random_regular_robp(8, 5, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto prog = rot_program(f, lab);
  auto fam = make_mixer_family_auto(1, 3, 0.0, 24);
  Mat wt = derand_walk_matrix(*prog, fam, 0, 8);
  CHECK(entrywise_max(wt - exact_product(f, 0, 8)) == 0.0);
}

TEST_CASE("walk equals the recursive generator at the recursion base") {
  // one level of mixing: the walk reads (x, H[x, e]) exactly like the
  // generator; deeper levels thread incoming labels and form a different
  // (equally valid) approximator
  CounterRng rng(7);
  Robp f = random_permutation_robp(2, 4, 2, rng);
  auto lab = consistent_labeling(f);
  auto prog = rot_program(f, lab);
  MixerFamily fam;
  fam.symbol_bits = 2;
  fam.levels = 1;
  fam.vertex_bits = {2};
  fam.h = {with_consistent_labels(expander_for_bits(2, 1))};
  fam.lambda_level = {lambda_measure(fam.h[0])};
  fam.all_complete = false;
  Generator g = recursive_mixer_generator(std::make_shared<MixerFamily>(fam));
  Mat via_walk = derand_walk_matrix(*prog, fam, 0, 2);
  Mat via_gen = gen_avg_matrix(g, f, 0, 2);
  CHECK(entrywise_max(via_walk - via_gen) == 0.0);
}

TEST_CASE("walk and generator are both exact under perfect mixing") {
  CounterRng rng(77);
  Robp f = random_permutation_robp(8, 4, 1, rng);
  auto lab = consistent_labeling(f);
  auto prog = rot_program(f, lab);
  auto fam = make_mixer_family_auto(1, 3, 0.0, 24);
  Generator g = recursive_mixer_generator(std::make_shared<MixerFamily>(fam));
  Mat exact = exact_product(f, 0, 8);
  CHECK(entrywise_max(derand_walk_matrix(*prog, fam, 0, 8) - exact) == 0.0);
  CHECK(entrywise_max(gen_avg_matrix(g, f, 0, 8) - exact) == 0.0);
}

TEST_CASE("reduced programs keep valid labelings at every layer") {
  CounterRng rng(8);
  Robp f = random_regular_robp(8, 4, 1, rng);
  auto lab = assign_two_way_labeling(f);
  auto base = rot_program(f, lab);
  auto fam = std::make_shared<MixerFamily>(
      make_mixer_family(1, 3, {{false, 1}, {false, 1}, {false, 1}}));
  TermSet ts = binary_splitting_terms(8, 1);
  auto terms = ts.materialize();
  auto child = reduced_regular_program(base, fam, terms[1].cuts);
  const int sb = child->symbol_bits();
  REQUIRE(sb <= 12);
  for (int layer = 1; layer <= child->length(); ++layer) {
    std::vector<uint8_t> seen(uint64_t(child->width()) << sb, 0);
    for (uint32_t u = 0; u < uint32_t(child->width()); ++u)
      for (uint64_t x = 0; x < (uint64_t(1) << sb); ++x) {
        auto [v, x2] = child->rot(layer, u, x);
        uint64_t key = (uint64_t(v) << sb) | x2;
        REQUIRE(!seen[key]);
        seen[key] = 1;
      }
  }
}

TEST_CASE("recursive estimator: exact with perfect mixers") {
  CounterRng root(9);
  for (int t = 0; t < 6; ++t) {
    CounterRng rng = root.fork(t);
    Robp f = random_regular_robp(8, 4, 1, rng);
    auto rep = regular_estimator(f, {{1, 0.0, 24}});
    CHECK(rep.declared_eps == 0.0);
    CHECK(rep.estimate == exact_expectation(f));
  }
}

TEST_CASE("recursive estimator: declared bound with spectral mixers") {
  CounterRng root(10);
  for (int t = 0; t < 3; ++t) {
    CounterRng rng = root.fork(t);
    Robp f = random_regular_robp(8, 4, 2, rng);
    DerandLevelSpec spec{1, 0.3, 22};
    auto rep = regular_estimator(f, {spec});
    CHECK(std::abs(rep.estimate - exact_expectation(f)) <=
          rep.declared_eps + 1e-12);
  }
}

TEST_CASE("two-level estimator matches the single-level value structure") {
  CounterRng rng(11);
  Robp f = random_regular_robp(8, 3, 1, rng);
  auto one = regular_estimator(f, {{1, 0.0, 24}});
  auto two = regular_estimator(f, {{1, 0.0, 24}, {1, 0.0, 24}});
  CHECK(one.estimate == exact_expectation(f));
  CHECK(two.estimate == exact_expectation(f));
  CHECK(two.level_terms.size() == 2);
}

TEST_CASE("binary route: transform plus permutation pipeline agrees") {
  CounterRng root(12);
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}, {1, 0.0, 24}};
  for (int t = 0; t < 5; ++t) {
    CounterRng rng = root.fork(t);
    Robp f = random_regular_robp(8, 4, 1, rng);
    auto rep = regular_estimator(f, {{1, 0.0, 24}});
    Robp p = regular_to_permutation_binary(f);
    double viaperm = multi_accept_estimate(p, 0.125, sched);
    // both routes are exact here, so they agree exactly
    CHECK(rep.estimate == viaperm);
    CHECK(rep.estimate == exact_expectation(f));
  }
}
