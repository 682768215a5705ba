#include <doctest.h>

#include <cmath>

#include "wprg/perm.hpp"
#include "wprg/rng.hpp"

using namespace wprg;

namespace {

Robp single_accept_perm(int n, int w, int s, CounterRng& rng) {
  Robp f = random_permutation_robp(n, w, s, rng);
  std::vector<uint8_t> acc(w, 0);
  acc[rng.below(uint64_t(w))] = 1;
  return f.with_accept(acc);
}

}  // namespace

TEST_CASE("one level: tau budget enforcement") {
  Shape shape{8, 1, 4};
  auto fam = make_mixer_family_auto(1, 3, 0.0, 24);
  CHECK(mixer_tau_certified(fam) == 0.0);
  // exact mixers satisfy any budget
  auto red = perm_one_level(shape, 1, 0.25, fam, 0.0);
  CHECK(red.declared_eps == 0.0);
  // a spectral family whose certified tau exceeds 1/(64 log^2 n) refuses
  auto noisy = make_mixer_family(1, 3, {{false, 1}, {false, 1}, {true, 1}});
  double tau = mixer_tau_certified(noisy);
  CHECK(tau > 1.0 / (64.0 * 9.0));
  CHECK_THROWS(perm_one_level(shape, 1, 0.25, noisy, tau));
}

TEST_CASE("one level: reduced programs are single-accept permutations") {
  CounterRng rng(11);
  Robp f = single_accept_perm(8, 5, 1, rng);
  Shape shape{8, 1, 5};
  auto fam = make_mixer_family_auto(1, 3, 0.0, 24);
  auto red = perm_one_level(shape, 1, 0.25, fam, 0.0);
  for (uint64_t i = 0; i < red.term_count; ++i) {
    Robp g = reduced_robp(f, red, i);
    CHECK(classify(g) == RobpClass::Permutation);
    int acc = 0;
    for (int v = 0; v < g.width(); ++v) acc += g.accepts_state(v);
    CHECK(acc == 1);
  }
  // exact mixers make the level exact: measured error is zero
  CHECK(reduction_measured_error(f, red) == 0.0);
}

TEST_CASE("chain composition and alphabet accounting") {
  Shape shape{16, 1, 4};
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}, {1, 0.0, 24}};
  sched.terminal_len = 4;
  auto chain = perm_chain(shape, 0.125, sched);
  // level 1 reduces 16 symbols to the term factor count; a second level runs
  // only when the intermediate length is above the threshold
  CHECK(chain.target.n <= 8);
  CHECK(chain.source == shape);
  // alphabet growth: the target alphabet is the final tail symbol width,
  // which for exact mixers equals the padded length times the symbol width
  CounterRng rng(12);
  Robp f = single_accept_perm(16, 4, 1, rng);
  CHECK(reduction_measured_error(f, chain) <= chain.declared_eps + 1e-12);
  CHECK(chain.declared_eps == 0.0);
}

TEST_CASE("one-level schedule equals the single level") {
  Shape shape{8, 1, 4};
  PermSchedule one;
  one.levels = {{1, 0.0, 24}};
  one.terminal_len = 4;
  auto chain = perm_chain(shape, 0.25, one);
  auto fam = make_mixer_family_auto(1, 3, 0.0, 24);
  auto lone = perm_one_level(shape, 1, 0.125, fam, 0.0);
  CHECK(chain.target.n == lone.target.n);
  CHECK(chain.target.s == lone.target.s);
  CHECK(chain.term_count == lone.term_count);
}

TEST_CASE("full pipeline: estimates within declared error, exactly here") {
  CounterRng root(13);
  Shape shape{16, 1, 6};
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}, {1, 0.0, 24}};
  sched.terminal_len = 4;
  for (int t = 0; t < 8; ++t) {
    CounterRng rng = root.fork(t);
    Robp f = single_accept_perm(16, 3 + int(rng.below(4)), 1, rng);
    Wprg g = perm_wprg(Shape{16, 1, f.width()}, 0.125, sched);
    double est = estimate(f, g);
    CHECK(std::abs(est - exact_expectation(f)) <= g.declared_eps + 1e-12);
    CHECK(est == exact_expectation(f));  // exact mixers, exact dyadic values
  }
}

TEST_CASE("the generator is oblivious to the program width") {
  // identical (n, s) but different widths: the wprg seeds and outputs agree
  Shape a{8, 1, 3}, b{8, 1, 7};
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}};
  Wprg ga = perm_wprg(a, 0.25, sched);
  Wprg gb = perm_wprg(b, 0.25, sched);
  CHECK(ga.seed_bits == gb.seed_bits);
  CounterRng rng(14);
  for (int t = 0; t < 100; ++t) {
    uint64_t seed = rng.below(uint64_t(1) << ga.seed_bits);
    auto [outa, wa] = ga.eval(seed);
    auto [outb, wb] = gb.eval(seed);
    CHECK(outa == outb);
    CHECK(wa == wb);
  }
}

TEST_CASE("weight bound is the product of level bounds") {
  Shape shape{16, 1, 4};
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}, {1, 0.0, 24}};
  sched.terminal_len = 2;
  auto chain = perm_chain(shape, 0.125, sched);
  if (chain.kind == WeightedReduction::Kind::Compose) {
    CHECK(chain.weight_bound ==
          chain.outer->weight_bound * chain.inner->weight_bound);
    CHECK(chain.index_bits == chain.outer->index_bits + chain.inner->index_bits);
  }
  Wprg g = perm_wprg(shape, 0.125, sched);
  CHECK(g.weight_bound == chain.weight_bound);
}

TEST_CASE("multi-accept estimation") {
  PermSchedule sched;
  sched.levels = {{1, 0.0, 24}, {1, 0.0, 24}};
  CounterRng root(15);
  // accept everything: estimate is exactly one
  Robp all = random_permutation_robp(16, 4, 1, root);
  Robp all1 = all.with_accept(std::vector<uint8_t>(4, 1));
  CHECK(multi_accept_estimate(all1, 0.125, sched) == 1.0);
  // accept nothing: exactly zero
  Robp none = all.with_accept(std::vector<uint8_t>(4, 0));
  CHECK(multi_accept_estimate(none, 0.125, sched) == 0.0);
  // random accept sets stay within the declared error (exactly, here)
  for (int t = 0; t < 6; ++t) {
    CounterRng rng = root.fork(t);
    Robp f = random_permutation_robp(16, 5, 1, rng);
    double est = multi_accept_estimate(f, 0.125, sched);
    CHECK(std::abs(est - exact_expectation(f)) <= 0.125 + 1e-12);
    CHECK(est == exact_expectation(f));
  }
}
