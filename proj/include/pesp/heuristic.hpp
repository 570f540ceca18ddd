#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pesp/demand_sampling.hpp"
#include "pesp/recourse.hpp"
#include "pesp/sampling.hpp"
#include "pesp/work.hpp"

namespace pesp {

/// 1-D K-means: Lloyd iterations from quantile starting centers, at most 100
/// rounds. Returns clusters of indices into `values`, ordered by center;
/// empty clusters are dropped, so there may be fewer than k. When k is at
/// least the number of distinct values each distinct value is its own cluster.
std::vector<std::vector<std::size_t>> kmeans_1d(const std::vector<double>& values, int k);

struct HeuristicSpec {
  int outer = 20;      // observation draws per iterate
  int inner = 20;      // joint conditional scenarios per draw, shared by all candidates
  int selection = 50;  // scenarios for choosing each reusable solution
  int clusters = 4;
  /// Average clusters by their share of the inner sample instead of equally.
  bool weighted_clusters = false;
  SamplingMode mode = SamplingMode::LatinHypercube;
  std::uint64_t selection_node_cap = 200'000;

  void validate() const;
};

/// Everything sampled and solved at one greedy iterate. `q` holds the
/// recourse of every reusable solution against every scenario:
/// q[(draw * outer + solution) * inner + scenario].
struct IterateCache {
  IndexSet set;
  std::vector<FirstStageSolution> solutions;
  std::vector<double> first_stage_cost;
  std::vector<std::vector<Scenario>> scenarios;  // per draw
  std::vector<double> q;
  int outer = 0;
  int inner = 0;

  double recourse(std::size_t draw, std::size_t solution, std::size_t scenario) const {
    return q[(draw * static_cast<std::size_t>(outer) + solution) * static_cast<std::size_t>(inner) + scenario];
  }
};

IterateCache build_iterate_cache(const Instance& inst, IndexSet s, const HeuristicSpec& spec, std::uint64_t seed,
                                 int iterate, const SolverConfig& config = {}, WorkCounters* counters = nullptr,
                                 int workers = 1);

/// F(S) estimated by the best reusable solution per draw.
double approx_f(const IterateCache& cache);

/// F(S + j) estimated by pretending item j separates the draw's scenarios into
/// the K-means clusters of their demand_j values. Reads the cache only.
double approx_f_plus(const Instance& inst, const IterateCache& cache, int j, const HeuristicSpec& spec);

struct PoolEntry {
  IndexSet set;
  double approx_f = 0.0;
  double approx_net = 0.0;  // approx_f - alpha(set)
  double seconds = 0.0;     // since the start of the run
  std::uint64_t solves = 0;
  std::uint64_t recourse_evals = 0;
};

/// Greedy iterates from the empty set to all items; entry t has t items.
struct CandidatePool {
  std::vector<PoolEntry> entries;

  /// Columns: iterate,set,approx_f,approx_net,seconds,solves,recourse_evals.
  void write_csv(std::ostream& out) const;
};

CandidatePool greedy_run(const Instance& inst, const HeuristicSpec& spec, std::uint64_t seed,
                         const SolverConfig& config = {}, WorkCounters* counters = nullptr, int workers = 1);

struct FinalCandidate {
  IndexSet set;
  double approx_net = 0.0;
  StatLowerBound bound;     // of F(set)
  double net_mean = 0.0;    // bound mean - alpha(set)
  double net_std_error = 0.0;
  double net_ci_lower = 0.0;
};

/// Re-evaluates the `top` distinct pool sets with the best approximate net
/// value using stat_lb, best lower-bound mean first.
std::vector<FinalCandidate> finalize_candidates(const Instance& inst, const CandidatePool& pool, int top,
                                                const LowerBoundSpec& spec, std::uint64_t seed,
                                                const SolverConfig& config = {}, WorkCounters* counters = nullptr,
                                                int workers = 1);

/// Columns: rank,set,approx_net,f_mean,f_std_error,net_mean,net_std_error,net_ci_lower.
void write_final_csv(std::ostream& out, const std::vector<FinalCandidate>& finals);

}  // namespace pesp
