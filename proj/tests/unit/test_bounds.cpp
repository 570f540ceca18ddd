#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "pesp/bounds.hpp"
#include "pesp/errors.hpp"

using namespace pesp;

TEST_CASE("probe cost is modular") {
  Instance inst = fixture::small(1, 1, 4, 1);
  inst.customers[0].probe_cost = 5.0;
  inst.customers[1].probe_cost = 7.0;
  CHECK(alpha(inst, IndexSet{}) == 0.0);
  CHECK(alpha(inst, IndexSet{0, 1}) == 12.0);
  CounterRng rng(3, {1});
  for (int t = 0; t < 50; ++t) {
    const IndexSet s(rng() & 0xF);
    const IndexSet u = IndexSet(rng() & 0xF).minus(s);
    CHECK(alpha(inst, s) + alpha(inst, u) == doctest::Approx(alpha(inst, s | u)));
  }
}

TEST_CASE("exact F matches a brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto inst = fixture::small(2, 2, 4, seed);
    for (std::uint64_t m = 0; m < 16; ++m) {
      CHECK(f_exact(inst, IndexSet(m)).mean == doctest::Approx(oracle::brute_force_f(inst, m)).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact F at the extremes") {
  const auto inst = fixture::small(2, 2, 4, 9);
  // Empty set: the plain two-stage optimum over the full support.
  CHECK(f_exact(inst, IndexSet{}).mean ==
        doctest::Approx(solve_two_stage(inst, enumerate_conditional_support(inst, Observation{IndexSet{}, {}})).value));
  // Full set: one single-scenario problem per outcome.
  double pi = 0.0;
  for (const auto& s : enumerate_conditional_support(inst, Observation{IndexSet{}, {}})) {
    pi += s.weight * solve_two_stage(inst, fixture::single(s.demand)).value;
  }
  CHECK(f_exact(inst, IndexSet::full(4)).mean == doctest::Approx(pi));
}

TEST_CASE("F is monotone in the probe set") {
  const auto inst = fixture::small(2, 2, 3, 5);
  CHECK(f_exact(inst, IndexSet{1}).mean >= f_exact(inst, IndexSet{}).mean - 1e-9);
  CHECK(f_exact(inst, IndexSet{1}).mean <= f_exact(inst, IndexSet{1, 2}).mean + 1e-9);
  for (std::uint64_t s = 0; s < 8; ++s) {
    for (std::uint64_t t = 0; t < 8; ++t) {
      if ((s & ~t) == 0) CHECK(f_exact(inst, IndexSet(s)).mean <= f_exact(inst, IndexSet(t)).mean + 1e-6);
    }
  }
}

TEST_CASE("exact F refuses what it cannot enumerate") {
  const auto cont = generate_instance(1, 1, 3, DistributionKind::MixedTriangular, 1);
  CHECK_THROWS_AS(f_exact(cont, IndexSet{0}), InfiniteSupport);
  const auto big = fixture::small(1, 1, 24, 1);
  CHECK_THROWS_AS(f_exact(big, IndexSet{}), SizeLimitExceeded);
}

TEST_CASE("single-element node bounds") {
  const auto inst = fixture::small(2, 2, 4, 3);
  ExactEvaluator eval(inst);
  const double pi = f_exact(inst, IndexSet::full(4)).mean;
  const auto root = node_bounds_single(inst, ProbeState::root(ProbeMode::SingleElement), eval);
  CHECK(root.upper.mean == doctest::Approx(pi));
  CHECK(root.lower.mean == doctest::Approx(pi - alpha(inst, IndexSet::full(4))));

  ProbeState leaf = ProbeState::root(ProbeMode::SingleElement);
  leaf.excluded = IndexSet{0, 2};
  leaf.required = IndexSet{1, 3};
  const auto b = node_bounds_single(inst, leaf, eval);
  CHECK(leaf.is_leaf(4));
  CHECK(b.lower.mean == b.upper.mean);
  CHECK(b.upper.mean == doctest::Approx(f_exact(inst, IndexSet{1, 3}).mean - alpha(inst, IndexSet{1, 3})));

  Instance free = inst;
  for (auto& c : free.customers) c.probe_cost = 0.0;
  ExactEvaluator free_eval(free);
  ProbeState mid = ProbeState::root(ProbeMode::SingleElement);
  mid.excluded = IndexSet{2};
  mid.required = IndexSet{0};
  const auto z = node_bounds_single(free, mid, free_eval);
  CHECK(z.lower.mean == z.upper.mean);
}

TEST_CASE("multi-element node bounds") {
  Instance inst = fixture::small(2, 2, 4, 3);
  inst.customers[0].probe_cost = 5.0;
  inst.customers[1].probe_cost = 7.0;
  ExactEvaluator eval(inst);
  const auto root = node_bounds_multi(inst, ProbeState::root(ProbeMode::MultiElement), eval);
  CHECK(root.upper.mean == doctest::Approx(f_exact(inst, IndexSet::full(4)).mean));

  ProbeState pair = ProbeState::root(ProbeMode::MultiElement);
  pair.groups = {IndexSet{0, 1}};
  CHECK(pair.cost_floor(inst) == 5.0);

  ProbeState one = ProbeState::root(ProbeMode::MultiElement);
  one.groups = {IndexSet{2}};
  ProbeState same = ProbeState::root(ProbeMode::SingleElement);
  same.required = IndexSet{2};
  CHECK(node_bounds_multi(inst, one, eval).upper.mean == node_bounds_single(inst, same, eval).upper.mean);
}

TEST_CASE("probe state validation, admission and encoding") {
  ProbeState s = ProbeState::root(ProbeMode::SingleElement);
  s.excluded = IndexSet{1};
  s.required = IndexSet{1};
  CHECK_THROWS_AS(s.validate(3), InvalidArgument);
  ProbeState m = ProbeState::root(ProbeMode::MultiElement);
  m.excluded = IndexSet{0};
  m.groups = {IndexSet{1, 2}, IndexSet{3}};
  CHECK_NOTHROW(m.validate(5));
  CHECK(m.admits(IndexSet{1, 3}));
  CHECK(m.admits(IndexSet{2, 3, 4}));
  CHECK_FALSE(m.admits(IndexSet{1}));
  CHECK_FALSE(m.admits(IndexSet{0, 1, 3}));
  CHECK(m.encode() == "x=0;r=;g=1;2|3");
  CHECK(m.free_items(5) == IndexSet{4});
  m.groups.push_back(IndexSet{2});
  CHECK_THROWS_AS(m.validate(5), InvalidArgument);
}

TEST_CASE("covariance statistic of a value that equals one coordinate") {
  BranchingStats stats(2);
  const std::vector<std::vector<double>> d{{1.0, 4.0}, {3.0, 4.0}, {5.0, 0.0}, {7.0, 2.0}};
  for (const auto& x : d) stats.add(1.0, x, x[0]);
  FEvaluation f;
  stats.fill(IndexSet{0, 1}, f);
  // Weighted (population) moments.
  const double m0 = 4.0;
  const double m1 = 2.5;
  double var0 = 0.0;
  double cov10 = 0.0;
  for (const auto& x : d) {
    var0 += (x[0] - m0) * (x[0] - m0) / 4.0;
    cov10 += (x[1] - m1) * (x[0] - m0) / 4.0;
  }
  CHECK(f.covariance[0] == doctest::Approx(var0));
  CHECK(f.covariance[1] == doctest::Approx(cov10));
  CHECK(f.difference[1] == doctest::Approx((1.0 + 3.0 + 7.0) / 3.0 - 5.0));
  // Coordinate 0 is never zero, so there is no low side to compare against.
  CHECK(std::isnan(f.difference[0]));

  FEvaluation outside;
  stats.fill(IndexSet{1}, outside);
  CHECK(std::isnan(outside.covariance[0]));
}
