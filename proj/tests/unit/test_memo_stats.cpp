#include <cmath>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "pesp/memo.hpp"
#include "pesp/mip_model.hpp"
#include "pesp/stats.hpp"

using namespace pesp;

namespace {

TwoStageResult result(double v) {
  TwoStageResult r;
  r.value = v;
  return r;
}

MemoKey key(std::vector<std::size_t> idx, std::size_t n) { return MemoKey::from_sorted(idx, n); }

}  // namespace

TEST_CASE("memo hit returns the stored result") {
  SolveMemo memo(4);
  WorkCounters c;
  int solves = 0;
  auto solve = [&] {
    ++solves;
    return result(1.25);
  };
  const auto first = memo.lookup_or_solve(key({1, 2}, 10), solve, &c);
  const auto second = memo.lookup_or_solve(key({1, 2}, 10), solve, &c);
  CHECK_FALSE(first.second);
  CHECK(second.second);
  CHECK(second.first.value == first.first.value);
  CHECK(solves == 1);
  CHECK(c.memo_lookups.load() == 2);
  CHECK(c.memo_hits.load() == 1);
}

TEST_CASE("memo evicts the least recently used entry") {
  SolveMemo memo(1);
  auto solve = [] { return result(0.0); };
  memo.lookup_or_solve(key({0}, 3), solve);
  memo.lookup_or_solve(key({1}, 3), solve);
  memo.lookup_or_solve(key({2}, 3), solve);
  CHECK(memo.size() == 1);
  CHECK_FALSE(memo.lookup_or_solve(key({0}, 3), solve).second);

  SolveMemo two(2);
  two.lookup_or_solve(key({0}, 3), solve);
  two.lookup_or_solve(key({1}, 3), solve);
  two.lookup_or_solve(key({0}, 3), solve);  // refresh 0
  two.lookup_or_solve(key({2}, 3), solve);  // evicts 1
  CHECK(two.lookup_or_solve(key({0}, 3), solve).second);
  CHECK_FALSE(two.lookup_or_solve(key({1}, 3), solve).second);
}

TEST_CASE("zero capacity disables caching") {
  SolveMemo memo(0);
  WorkCounters c;
  int solves = 0;
  auto solve = [&] {
    ++solves;
    return result(0.0);
  };
  memo.lookup_or_solve(key({0}, 3), solve, &c);
  memo.lookup_or_solve(key({0}, 3), solve, &c);
  CHECK(solves == 2);
  CHECK(c.memo_hits.load() == 0);
}

TEST_CASE("memo keys distinguish subsets and sample sizes") {
  CHECK(key({0, 5}, 10) == key({0, 5}, 10));
  CHECK_FALSE(key({0, 5}, 10) == key({0, 6}, 10));
  CHECK(key({3, 70, 99}, 100) == key({3, 70, 99}, 100));
  CHECK_FALSE(key({3, 70, 99}, 100) == key({3, 71, 99}, 100));
  CHECK_FALSE(key({3, 70}, 100) == key({3, 70, 99}, 100));
}

TEST_CASE("memo is safe under concurrent access") {
  SolveMemo memo(64);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&memo] {
      for (std::size_t k = 0; k < 200; ++k) {
        const auto r = memo.lookup_or_solve(MemoKey::from_sorted(std::vector<std::size_t>{k % 50}, 50),
                                            [k] { return result(static_cast<double>(k % 50)); });
        CHECK(r.first.value == static_cast<double>(k % 50));
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(memo.lookups() == 800);
}

TEST_CASE("normal and t quantiles") {
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536).epsilon(1e-7));
  CHECK(normal_cdf(normal_quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(student_t_critical(29, 0.05) == doctest::Approx(1.699127).epsilon(1e-6));
  CHECK(student_t_critical(24, 0.025) == doctest::Approx(2.063899).epsilon(1e-6));
  CHECK(student_t_critical(100000, 0.05) == doctest::Approx(1.6448536).epsilon(1e-4));
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(mean(v) == 2.5);
  CHECK(sample_stddev(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(sample_stddev(std::vector<double>{7.0}) == 0.0);
}

TEST_CASE("MPS output is deterministic and negates a maximization objective") {
  MipModel m;
  m.name = "T";
  const int x = m.add_binary("x", 3.0);
  const int f = m.add_continuous("f", 2.0);
  m.add_row({"r", {{x, -4.0}, {f, 1.0}}, RowSense::LessEqual, 0.0});
  std::ostringstream a;
  std::ostringstream b;
  write_mps(m, a);
  write_mps(m, b);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("MARKER") != std::string::npos);
  CHECK(a.str().find("-3") != std::string::npos);
  CHECK(m.objective_value({1.0, 4.0}) == 11.0);
  CHECK(m.max_violation({1.0, 5.0}) == doctest::Approx(1.0));
}
