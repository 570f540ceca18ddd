#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pesp/bounds.hpp"
#include "pesp/sampling.hpp"
#include "pesp/stats.hpp"

using namespace pesp;

namespace {

std::vector<Scenario> joint(const Instance& inst, int n, std::uint64_t seed, SamplingMode mode = SamplingMode::LatinHypercube) {
  CounterRng rng(seed, {1});
  return sample_joint(inst, n, mode, rng);
}

double perfect_information(const Instance& inst, const std::vector<Scenario>& sample) {
  double total = 0.0;
  for (const auto& s : sample) total += solve_two_stage(inst, fixture::single(s.demand)).value;
  return total / static_cast<double>(sample.size());
}

InternalSpec small_spec() {
  InternalSpec spec;
  spec.outer = 20;
  spec.batches = 10;
  spec.inner = 10;
  spec.enum_batches = 5;
  return spec;
}

}  // namespace

TEST_CASE("SAA with nothing probed solves the whole sample") {
  const auto inst = fixture::small(2, 2, 5, 1);
  const auto sample = joint(inst, 30, 1);
  CHECK(saa_f(inst, IndexSet{}, sample, nullptr).mean == doctest::Approx(solve_two_stage(inst, sample).value));
}

TEST_CASE("SAA with everything probed is perfect information on the sample") {
  const auto inst = generate_instance(2, 2, 4, DistributionKind::MixedTriangular, 2);
  const auto sample = joint(inst, 25, 2);
  const double pi = perfect_information(inst, sample);
  CHECK(saa_f(inst, IndexSet::full(4), sample, nullptr).mean == doctest::Approx(pi).epsilon(1e-12));
  // Any continuous coordinate already splits the sample into singletons,
  // and equal partitions give bit-identical values.
  const double full = saa_f(inst, IndexSet::full(4), sample, nullptr).mean;
  CHECK(saa_f(inst, IndexSet{2}, sample, nullptr).mean == full);
  CHECK(saa_f(inst, IndexSet{0, 3}, sample, nullptr).mean == full);
}

TEST_CASE("SAA memo does not change values") {
  const auto inst = fixture::small(2, 2, 6, 3);
  const auto sample = joint(inst, 40, 3);
  SolveMemo memo(100);
  WorkCounters c;
  for (std::uint64_t m : {0ULL, 1ULL, 5ULL, 1ULL, 63ULL, 5ULL}) {
    CHECK(saa_f(inst, IndexSet(m), sample, &memo, {}, &c).mean == saa_f(inst, IndexSet(m), sample, nullptr).mean);
  }
  CHECK(c.memo_hits.load() > 0);
}

TEST_CASE("replication summary arithmetic") {
  const auto inst = fixture::small(1, 1, 3, 4);
  const auto solve = [&](const std::vector<Scenario>& s, std::uint64_t, WorkCounters& c) {
    return ReplicationOutcome{saa_f(inst, IndexSet{0}, s, nullptr, {}, &c).mean, false};
  };
  const auto a = saa_replicate(inst, 20, 8, SamplingMode::LatinHypercube, solve, 9);
  const auto b = saa_replicate(inst, 20, 8, SamplingMode::LatinHypercube, solve, 9, 3);
  CHECK(a.values == b.values);
  REQUIRE(a.values.size() == 8);
  CHECK(a.mean == doctest::Approx(mean(a.values)));
  CHECK(a.stddev == doctest::Approx(sample_stddev(a.values)));
  CHECK(a.ci_upper == doctest::Approx(a.mean + student_t_critical(7, 0.05) * a.stddev / std::sqrt(8.0)));
  std::ostringstream csv;
  a.write_csv(csv);
  CHECK(csv.str().rfind("replication,v,N,seed,work_units,budget_limited\n", 0) == 0);

  const auto fixed = fixture::degenerate(1, 1, 3, 4);
  const auto solve_fixed = [&](const std::vector<Scenario>& s, std::uint64_t, WorkCounters&) {
    return ReplicationOutcome{saa_f(fixed, IndexSet{}, s, nullptr).mean, false};
  };
  const auto d = saa_replicate(fixed, 10, 5, SamplingMode::MonteCarlo, solve_fixed, 1);
  CHECK(d.stddev == 0.0);
  CHECK(d.ci_upper == d.mean);
}

TEST_CASE("internal estimates on a deterministic instance are exact") {
  const auto inst = fixture::degenerate(2, 2, 5, 6);
  const double f = solve_two_stage(inst, joint(inst, 1, 1)).value;
  for (std::uint64_t m : {0ULL, 3ULL, 31ULL}) {
    const auto e = internal_ub(inst, IndexSet(m), small_spec(), {}, 4);
    CHECK(e.mean == doctest::Approx(f));
    CHECK(e.std_error == 0.0);
    const auto lb = stat_lb(inst, IndexSet(m), {5, 20, 10}, {}, 4);
    CHECK(lb.estimate.mean == doctest::Approx(f));
    CHECK(lb.estimate.std_error == 0.0);
  }
}

TEST_CASE("internal estimate with full conditioning and one inner scenario") {
  const auto inst = generate_instance(2, 2, 4, DistributionKind::MixedTriangular, 3);
  InternalSpec spec = small_spec();
  spec.inner = 1;
  const auto e = internal_ub(inst, IndexSet::full(4), spec, {}, 8);
  // Each outer point is solved alone, so the estimate is a PI sample mean.
  CHECK(e.mean > 0.0);
  CHECK(e.batches == spec.batches);
  CHECK(std::isfinite(e.std_error));
}

TEST_CASE("enumerated internal estimate") {
  const auto inst = fixture::small(2, 2, 4, 5);
  const auto none = internal_ub_enumerated(inst, IndexSet{}, 6, 10, {}, 3);
  CHECK(none.batches == 6);
  // With nothing probed there is a single outcome; compare with a direct batch mean.
  const auto two = internal_ub_enumerated(inst, IndexSet{0, 1}, 6, 10, {}, 3);
  CHECK(two.mean >= f_exact(inst, IndexSet{0, 1}).mean - 4.0 * two.std_error - 1e-9);
  InternalSpec spec = small_spec();
  CHECK(use_enumeration(inst, IndexSet{0, 1}, spec));
  spec.enumerate_max_probes = 1;
  CHECK_FALSE(use_enumeration(inst, IndexSet{0, 1}, spec));
  CHECK_FALSE(use_enumeration(generate_instance(1, 1, 2, DistributionKind::MixedTriangular, 1), IndexSet{0}, small_spec()));
}

TEST_CASE("global statistical bound") {
  const LeafBound one{0.0, {10.0, 1.0, 30, EstimateMode::Statistical}};
  CHECK(global_stat_ub(std::vector<LeafBound>{one}) == doctest::Approx(10.0 + 1.6448536).epsilon(1e-5));
  const LeafBound z{0.0, {0.0, 1.0, 30, EstimateMode::Statistical}};
  CHECK(global_stat_ub(std::vector<LeafBound>{z, z}) == doctest::Approx(normal_quantile(std::sqrt(0.95))).epsilon(1e-5));
  CHECK(normal_quantile(std::sqrt(0.95)) == doctest::Approx(1.9545).epsilon(1e-4));
  const std::vector<LeafBound> points{{-3.0, BoundEstimate::exact(10.0)}, {2.0, BoundEstimate::exact(9.0)}};
  CHECK(global_stat_ub(points) == doctest::Approx(11.0));
  // Never below the best point mass even when noisy leaves are far lower.
  const std::vector<LeafBound> mixed{{0.0, BoundEstimate::exact(50.0)}, {0.0, {0.0, 1.0, 30, EstimateMode::Statistical}}};
  CHECK(global_stat_ub(mixed) == doctest::Approx(50.0));
}

TEST_CASE("statistical lower bound is below the internal upper estimate") {
  const auto inst = fixture::small(2, 2, 5, 11);
  const IndexSet s{1, 3};
  const auto lb = stat_lb(inst, s, {20, 200, 30}, {}, 5);
  InternalSpec spec = small_spec();
  spec.outer = 60;
  spec.batches = 20;
  spec.inner = 30;
  spec.enum_batches = 10;
  const auto ub = internal_ub(inst, s, spec, {}, 5);
  CHECK(lb.estimate.mean <= ub.mean + 3.0 * std::hypot(lb.estimate.std_error, ub.std_error));
  CHECK(lb.values.size() == 20);
  CHECK(lb.ci_lower == doctest::Approx(lb.estimate.mean - student_t_critical(19, 0.05) * lb.estimate.std_error));
}

TEST_CASE("sampled evaluators are reproducible across worker counts") {
  const auto inst = generate_instance(2, 2, 5, DistributionKind::MixedTriangular, 12);
  const auto a = internal_ub(inst, IndexSet{0, 2}, small_spec(), {}, 77, nullptr, 1);
  const auto b = internal_ub(inst, IndexSet{0, 2}, small_spec(), {}, 77, nullptr, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  const auto la = stat_lb(inst, IndexSet{1}, {6, 30, 10}, {}, 3, nullptr, 1);
  const auto lb = stat_lb(inst, IndexSet{1}, {6, 30, 10}, {}, 3, nullptr, 4);
  CHECK(la.values == lb.values);
}
