#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pesp/bounds.hpp"
#include "pesp/demand_sampling.hpp"
#include "pesp/memo.hpp"
#include "pesp/two_stage.hpp"
#include "pesp/work.hpp"

namespace pesp {

// ---------------------------------------------------------------- external

/// F_N(S) on a fixed sample: sample points are grouped by their S-projection,
/// each group's two-stage program is solved (through `memo` when given) and
/// the group values are averaged with weights |group| / N.
FEvaluation saa_evaluate(const Instance& inst, IndexSet s, std::span<const Scenario> sample,
                         SolveMemo* memo, const SolverConfig& config = {},
                         WorkCounters* counters = nullptr, int workers = 1);

inline BoundEstimate saa_f(const Instance& inst, IndexSet s, std::span<const Scenario> sample,
                           SolveMemo* memo, const SolverConfig& config = {},
                           WorkCounters* counters = nullptr) {
  return saa_evaluate(inst, s, sample, memo, config, counters).value;
}

/// F evaluator over one fixed joint sample. Owns its memo, since memo keys
/// are index sets of this particular sample.
class SaaEvaluator final : public FEvaluator {
 public:
  SaaEvaluator(const Instance& inst, std::vector<Scenario> sample, SolverConfig config = {},
               std::size_t memo_capacity = SolveMemo::kDefaultCapacity, WorkCounters* counters = nullptr,
               int workers = 1)
      : inst_(inst), sample_(std::move(sample)), config_(std::move(config)), memo_(memo_capacity),
        counters_(counters), workers_(workers) {}

  FEvaluation evaluate(IndexSet s) override {
    return saa_evaluate(inst_, s, sample_, &memo_, config_, counters_, workers_);
  }
  bool statistical() const override { return false; }
  std::string name() const override { return "external_sample"; }
  const SolveMemo& memo() const { return memo_; }
  const std::vector<Scenario>& sample() const { return sample_; }

 private:
  const Instance& inst_;
  std::vector<Scenario> sample_;
  SolverConfig config_;
  SolveMemo memo_;
  WorkCounters* counters_;
  int workers_;
};

/// v_N for one sampled problem, and whether the solver stopped on its budget
/// (in which case `value` is the search's upper bound at that point).
struct ReplicationOutcome {
  double value = 0.0;
  bool budget_limited = false;
};

using SampledProblemSolver = std::function<ReplicationOutcome(
    const std::vector<Scenario>& sample, std::uint64_t replication, WorkCounters& counters)>;

struct ReplicationSummary {
  std::vector<double> values;
  std::vector<std::uint64_t> work_units;
  std::vector<bool> budget_limited;
  int sample_size = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double mean = 0.0;
  double stddev = 0.0;    // sample standard deviation of the values
  double ci_upper = 0.0;  // mean + t_{L-1, alpha} stddev / sqrt(L)

  /// Recomputes mean, stddev and ci_upper from `values`.
  void summarize();
  /// Columns: replication,v,N,seed,work_units,budget_limited.
  void write_csv(std::ostream& out) const;
};

/// L independent batches of N joint draws (stream (seed, replication)), each
/// solved by `solve`; replications run on up to `workers` threads.
ReplicationSummary saa_replicate(const Instance& inst, int sample_size, int replications,
                                 SamplingMode mode, const SampledProblemSolver& solve,
                                 std::uint64_t seed, int workers = 1, double alpha = 0.05);

// ---------------------------------------------------------------- internal

struct InternalSpec {
  int outer = 300;    // N1, split evenly into `batches`
  int batches = 30;
  int inner = 100;    // N2
  int enum_batches = 30;  // M for the enumerated variant
  /// The projected support is enumerated when every probed item has finite
  /// support, |S| <= enumerate_max_probes and 2^|S| <= enumerate_max_outcomes.
  int enumerate_max_probes = 8;
  std::size_t enumerate_max_outcomes = 256;
  SamplingMode mode = SamplingMode::LatinHypercube;

  void validate() const;
};

/// Nested-sampling estimate of F(S) with an upward bias: LHS batches of
/// outer points, a conditional sample per point, one two-stage solve per
/// point. std_error is the standard deviation of the batch means over sqrt(B).
FEvaluation internal_ub_evaluate(const Instance& inst, IndexSet s, const InternalSpec& spec,
                                 const SolverConfig& config, std::uint64_t seed,
                                 WorkCounters* counters = nullptr, int workers = 1);

/// Enumerates the outcomes of the probed items and runs M conditional
/// batches per outcome: mean = sum_k p_k mean_k,
/// std_error = sqrt(sum_k p_k^2 var_k / M).
FEvaluation internal_ub_enumerated_evaluate(const Instance& inst, IndexSet s, int batches, int inner,
                                            SamplingMode mode, const SolverConfig& config,
                                            std::uint64_t seed, WorkCounters* counters = nullptr,
                                            int workers = 1);

inline BoundEstimate internal_ub(const Instance& inst, IndexSet s, const InternalSpec& spec,
                                 const SolverConfig& config, std::uint64_t seed,
                                 WorkCounters* counters = nullptr, int workers = 1) {
  return internal_ub_evaluate(inst, s, spec, config, seed, counters, workers).value;
}

inline BoundEstimate internal_ub_enumerated(const Instance& inst, IndexSet s, int batches, int inner,
                                            const SolverConfig& config, std::uint64_t seed,
                                            WorkCounters* counters = nullptr, int workers = 1) {
  return internal_ub_enumerated_evaluate(inst, s, batches, inner, SamplingMode::LatinHypercube, config,
                                         seed, counters, workers)
      .value;
}

/// True when `spec` sends S to the enumerated variant.
bool use_enumeration(const Instance& inst, IndexSet s, const InternalSpec& spec);

/// Chooses between the enumerated and the sampled estimator per S. Each S
/// draws from its own stream derived from (seed, S).
class InternalEvaluator final : public FEvaluator {
 public:
  InternalEvaluator(const Instance& inst, InternalSpec spec, SolverConfig config, std::uint64_t seed,
                    WorkCounters* counters = nullptr, int workers = 1)
      : inst_(inst), spec_(spec), config_(std::move(config)), seed_(seed), counters_(counters),
        workers_(workers) {
    spec_.validate();
  }
  FEvaluation evaluate(IndexSet s) override;
  bool statistical() const override { return true; }
  std::string name() const override { return "internal_sample"; }

 private:
  const Instance& inst_;
  InternalSpec spec_;
  SolverConfig config_;
  std::uint64_t seed_;
  WorkCounters* counters_;
  int workers_;
};

/// A search leaf's upper bound: offset + an approximately normal estimate.
struct LeafBound {
  double offset = 0.0;
  BoundEstimate estimate;
};

/// Smallest u with prod_P Phi((u - offset_P - mean_P) / s_P) >= 1 - alpha,
/// treating s_P = 0 as a point mass. Found by bisection.
double global_stat_ub(std::span<const LeafBound> leaves, double alpha = 0.05);

// ------------------------------------------------------------ lower bounds

struct LowerBoundSpec {
  int outer = 25;        // N1 i.i.d. outer draws
  int inner = 2000;      // N2 evaluation scenarios per draw
  int selection = 100;   // N3 scenarios for choosing the first-stage solution
  double alpha = 0.05;
  SamplingMode inner_mode = SamplingMode::LatinHypercube;
  /// Node cap for the selection solves. Any first-stage solution yields a
  /// valid bound, so a capped solve returns its incumbent.
  std::uint64_t selection_node_cap = 200'000;

  void validate() const;
};

struct StatLowerBound {
  BoundEstimate estimate;   // of F(S), Statistical
  double ci_lower = 0.0;    // mean - t_{N1-1, alpha} std_error
  std::vector<double> values;  // per outer draw
};

/// Statistical lower bound on F(S): for each outer draw choose a first-stage
/// solution on a conditional sample of size N3, then price it on an
/// independent conditional sample of size N2 with the closed-form recourse.
StatLowerBound stat_lb(const Instance& inst, IndexSet s, const LowerBoundSpec& spec,
                       const SolverConfig& config, std::uint64_t seed, WorkCounters* counters = nullptr,
                       int workers = 1);

}  // namespace pesp
