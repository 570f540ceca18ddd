#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "pesp/bnb.hpp"
#include "pesp/errors.hpp"
#include "pesp/mipgen.hpp"

using namespace pesp;

namespace {

Instance two_outcomes(double nominal) {
  Instance inst;
  inst.name = "pair";
  inst.revenue_rate = 2.0;
  inst.facilities = {fixture::facility(0, {{10.0, 3.0}})};
  inst.customers = {fixture::bernoulli_customer(0, {1.0}, 0.5, 0.5, nominal)};
  inst.validate();
  return inst;
}

std::string mps_text(const NaMip& mip) {
  std::ostringstream out;
  write_mps(mip.model, out);
  return out.str();
}

}  // namespace

TEST_CASE("first-stage ranges") {
  const auto inst = fixture::small(3, 2, 4, 1);
  const auto r = first_stage_ranges(inst);
  CHECK(r.size() == 3u * 2u + 3u * 4u);
  for (double v : r) CHECK(v == 1.0);
  CHECK(first_stage_ranges(Instance{}).empty());
}

TEST_CASE("pair separation") {
  CHECK(pair_epsilon({0, 5, 2}, {0, 0, 2}) == 5.0);
  CHECK(pair_epsilon({1, 5}, {4, 4}) == 1.0);
  CHECK(pair_epsilon({3, 3}, {3, 3}) == 0.0);
}

TEST_CASE("two outcomes five apart") {
  const auto inst = two_outcomes(5.0);
  const auto mip = build_na_mip(inst);
  REQUIRE(mip.outcomes.size() == 2);
  CHECK(mip.pairs == 1);
  const std::size_t p = first_stage_ranges(inst).size();
  CHECK(p == 2);
  CHECK(mip.linking_rows == 2 * p);
  CHECK(mip.min_epsilon == 5.0);
  CHECK(mip.min_big_m == doctest::Approx(0.2));
  CHECK(mip.max_big_m == doctest::Approx(0.2));
  int linking = 0;
  for (const auto& row : mip.model.rows()) {
    if (row.name.rfind("na_", 0) != 0) continue;
    ++linking;
    // +-(copy_h - copy_g) - M * 5 * x <= 0, so probing frees the pair exactly by the range.
    REQUIRE(row.coeffs.size() == 3);
    CHECK(row.coeffs[2].first == mip.probe_vars[0]);
    CHECK(row.coeffs[2].second == doctest::Approx(-1.0));
    CHECK(row.rhs == 0.0);
  }
  CHECK(linking == 4);
  const auto meta = mip.metadata(inst);
  CHECK(meta["pairs"] == 1);
  CHECK(meta["big_m"]["min"].get<double>() == doctest::Approx(0.2));
  CHECK(meta["variables"].size() == mip.model.variables().size());
}

TEST_CASE("every pair of distinct outcomes has a positive separation") {
  const auto inst = fixture::small(2, 1, 4, 2);
  const auto mip = build_na_mip(inst);
  CHECK(mip.outcomes.size() == 16);
  CHECK(mip.pairs == 120);
  CHECK(mip.min_epsilon > 0.0);
  CHECK(std::isfinite(mip.max_big_m));
  CHECK(mip.linking_rows == 2 * first_stage_ranges(inst).size() * mip.pairs);
}

TEST_CASE("limits and unsupported demand") {
  const auto inst = fixture::small(2, 1, 6, 3);
  NaMipOptions tight;
  tight.max_outcomes = 16;
  CHECK_THROWS_AS(build_na_mip(inst, tight), SupportTooLarge);
  NaMipOptions few_rows;
  few_rows.max_linking_rows = 100;
  CHECK_THROWS_AS(build_na_mip(inst, few_rows), SupportTooLarge);
  CHECK_THROWS_AS(build_na_mip(generate_instance(1, 1, 2, DistributionKind::MixedTriangular, 1)), ContinuousUnsupported);
}

TEST_CASE("the MPS text is a pure function of the instance") {
  const auto inst = fixture::small(2, 2, 3, 4);
  const auto a = mps_text(build_na_mip(inst));
  const auto b = mps_text(build_na_mip(instance_from_json(to_json(inst))));
  CHECK(a == b);
  CHECK(a.find("ROWS") != std::string::npos);
}

TEST_CASE("fixing the probe set recovers the net value of that set") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const int n = seed == 3 ? 3 : 2;
    const auto inst = fixture::small(2, 1, n, seed);
    const auto mip = build_na_mip(inst);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      std::map<int, double> fixed;
      for (int j = 0; j < n; ++j) fixed[mip.probe_vars[static_cast<std::size_t>(j)]] = (m >> j) & 1U ? 1.0 : 0.0;
      const auto value = oracle::fixed_binary_mip_optimum(mip.model, fixed);
      REQUIRE(value.has_value());
      CAPTURE(seed);
      CAPTURE(m);
      CHECK(*value == doctest::Approx(oracle::brute_force_f(inst, m) - alpha(inst, IndexSet(m))).epsilon(1e-9));
    }
  }
}

#ifdef PESP_TEST_SOLVER_CMD
TEST_CASE("an external solver reaches the search optimum on the full model") {
  const auto dir = std::filesystem::temp_directory_path() / "pesp_na_mip_test";
  std::filesystem::create_directories(dir);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto inst = fixture::small(2, 1, 3 + static_cast<int>(seed % 2), seed);
    const auto mps = (dir / "model.mps").string();
    const auto sol = (dir / "model.sol").string();
    write_mps(build_na_mip(inst).model, mps);
    std::string cmd = PESP_TEST_SOLVER_CMD;
    cmd.replace(cmd.find("{mps}"), 5, mps);
    cmd.replace(cmd.find("{sol}"), 5, sol);
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream in(sol);
    std::string key;
    double objective = 0.0;
    in >> key >> objective;
    REQUIRE(key == "objective");
    ExactEvaluator eval(inst);
    WorkCounters c;
    const double z = run_bnb(inst, eval, {}, c).incumbent_value;
    // The MPS file minimizes the negated objective.
    CHECK(-objective == doctest::Approx(z).epsilon(1e-6));
  }
  std::filesystem::remove_all(dir);
}
#endif
