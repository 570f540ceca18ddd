#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pesp/index_set.hpp"
#include "pesp/instance.hpp"
#include "pesp/rng.hpp"

namespace pesp {

/// One realization of the demand vector. Under the identity information model
/// the same vector is both the probed signal and the recourse uncertainty.
struct Scenario {
  std::vector<double> demand;
  double weight = 1.0;
};

enum class SamplingMode { MonteCarlo, LatinHypercube };

std::string to_string(SamplingMode m);
/// "mc" or "lhs".
SamplingMode parse_sampling_mode(const std::string& s);

/// Sample-size bundle shared by the estimators.
struct SampleSpec {
  int outer = 300;      // N1, or N for a joint SAA sample
  int inner = 100;      // N2
  int selection = 100;  // N3
  int batches = 30;     // L or M, or the batch count of the outer sample
  SamplingMode mode = SamplingMode::LatinHypercube;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Values of the probed coordinates. `values` has one entry per customer;
/// entries outside `probed` are ignored.
struct Observation {
  IndexSet probed;
  std::vector<double> values;
};

/// A point of the projected support with its probability.
struct ProjectedOutcome {
  Observation observation;
  double probability = 0.0;
};

inline constexpr std::size_t kEnumerationCap = std::size_t{1} << 22;

/// Unit-interval draws: MC gives i.i.d. uniforms; LHS gives, per coordinate,
/// exactly one draw in each of the `count` equiprobable strata, with the
/// strata independently permuted across coordinates. Row-major count x dims.
std::vector<double> unit_design(std::size_t count, std::size_t dims, SamplingMode mode,
                                CounterRng& rng);

std::vector<Scenario> sample_joint(const Instance& inst, int count, SamplingMode mode,
                                   CounterRng& rng);
std::vector<Scenario> sample_joint(const Instance& inst, const SampleSpec& spec);

/// Scenarios with the probed coordinates fixed to the observation and the
/// others drawn from their marginals (customers are independent).
std::vector<Scenario> sample_conditional(const Instance& inst, const Observation& obs, int count,
                                         SamplingMode mode, CounterRng& rng);
std::vector<Scenario> sample_conditional(const Instance& inst, const Observation& obs,
                                         const SampleSpec& spec);

std::vector<ProjectedOutcome> enumerate_support_projection(const Instance& inst, IndexSet s);

/// All outcomes consistent with `obs`, weighted by conditional probability.
std::vector<Scenario> enumerate_conditional_support(const Instance& inst, const Observation& obs,
                                                    std::size_t cap = kEnumerationCap);

/// Observation carrying the `s` coordinates of a scenario.
Observation observe(const Scenario& scenario, IndexSet s);

/// Throws ObservationOutOfSupport if an observed value is impossible.
void check_observation(const Instance& inst, const Observation& obs);

}  // namespace pesp
