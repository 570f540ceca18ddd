#include "pesp/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "pesp/bounds.hpp"
#include "pesp/errors.hpp"
#include "pesp/parallel.hpp"
#include "pesp/rng.hpp"
#include "pesp/two_stage.hpp"

namespace pesp {

namespace {

constexpr std::uint64_t kDrawStream = 0x6E0;
constexpr std::uint64_t kJointStream = 0x6E1;
constexpr std::uint64_t kSelectStream = 0x6E5;
constexpr std::uint64_t kFinalStream = 0xF1A;
constexpr int kMaxLloydRounds = 100;

}  // namespace

std::vector<std::vector<std::size_t>> kmeans_1d(const std::vector<double>& values, int k) {
  if (values.empty()) throw InvalidArgument("k-means needs at least one value");
  if (k < 1) throw InvalidArgument("k-means needs k >= 1");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const std::size_t n = order.size();

  std::vector<double> centers;
  std::vector<double> distinct;
  for (std::size_t r : order) {
    if (distinct.empty() || values[r] != distinct.back()) distinct.push_back(values[r]);
  }
  if (distinct.size() <= static_cast<std::size_t>(k)) {
    centers = distinct;
  } else {
    for (int l = 0; l < k; ++l) {
      const auto rank = static_cast<std::size_t>((l + 0.5) * static_cast<double>(n) / k);
      const double c = values[order[std::min(rank, n - 1)]];
      if (centers.empty() || c != centers.back()) centers.push_back(c);
    }
  }

  // Labels along the sorted order; nearest center, lower one on ties.
  std::vector<std::size_t> label(n, 0);
  for (int round = 0; round < kMaxLloydRounds; ++round) {
    bool changed = round == 0;
    std::size_t c = 0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = values[order[r]];
      while (c + 1 < centers.size() && std::abs(centers[c + 1] - v) < std::abs(centers[c] - v)) ++c;
      if (label[r] != c) {
        label[r] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(centers.size(), 0.0);
    std::vector<std::size_t> count(centers.size(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      sum[label[r]] += values[order[r]];
      ++count[label[r]];
    }
    std::vector<double> next;
    std::vector<std::size_t> remap(centers.size(), 0);
    for (std::size_t l = 0; l < centers.size(); ++l) {
      if (count[l] == 0) continue;
      remap[l] = next.size();
      next.push_back(sum[l] / static_cast<double>(count[l]));
    }
    for (auto& l : label) l = remap[l];
    centers = std::move(next);
  }

  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t r = 0; r < n; ++r) {
    if (r == 0 || label[r] != label[r - 1]) clusters.emplace_back();
    clusters.back().push_back(order[r]);
  }
  return clusters;
}

void HeuristicSpec::validate() const {
  if (outer < 1 || inner < 1 || selection < 1) throw InvalidArgument("heuristic sample sizes must be >= 1");
  if (clusters < 1) throw InvalidArgument("heuristic needs at least one cluster");
}

IterateCache build_iterate_cache(const Instance& inst, IndexSet s, const HeuristicSpec& spec, std::uint64_t seed,
                                 int iterate, const SolverConfig& config, WorkCounters* counters, int workers) {
  spec.validate();
  SolverConfig select = config;
  select.incumbent_on_cap = true;
  select.node_cap = std::min(config.node_cap, spec.selection_node_cap);
  const auto n1 = static_cast<std::size_t>(spec.outer);
  const auto n2 = static_cast<std::size_t>(spec.inner);
  const auto t = static_cast<std::uint64_t>(iterate);

  IterateCache cache;
  cache.set = s;
  cache.outer = spec.outer;
  cache.inner = spec.inner;
  cache.solutions.resize(n1);
  cache.first_stage_cost.resize(n1);
  cache.scenarios.resize(n1);
  parallel_for(n1, workers, [&](std::size_t k) {
    CounterRng draw_rng(seed, {kDrawStream, t, k});
    const Observation obs = observe(sample_joint(inst, 1, SamplingMode::MonteCarlo, draw_rng).front(), s);
    CounterRng select_rng(seed, {kSelectStream, t, k});
    const auto selection = sample_conditional(inst, obs, spec.selection, spec.mode, select_rng);
    cache.solutions[k] = solve_two_stage(inst, selection, select, counters).solution;
    cache.first_stage_cost[k] = first_stage_cost(inst, cache.solutions[k]);
    CounterRng joint_rng(seed, {kJointStream, t, k});
    cache.scenarios[k] = sample_conditional(inst, obs, spec.inner, spec.mode, joint_rng);
  });

  cache.q.resize(n1 * n1 * n2);
  parallel_for(n1, workers, [&](std::size_t k) {
    for (std::size_t y = 0; y < n1; ++y) {
      for (std::size_t i = 0; i < n2; ++i) {
        cache.q[(k * n1 + y) * n2 + i] = recourse_value(inst, cache.solutions[y], cache.scenarios[k][i]);
      }
    }
  });
  if (counters != nullptr) counters->add_recourse(n1 * n1 * n2);
  return cache;
}

namespace {

// max over reusable solutions of -cost + mean recourse on `members` of draw k.
double best_on(const IterateCache& cache, std::size_t k, const std::vector<std::size_t>& members) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < cache.solutions.size(); ++y) {
    double sum = 0.0;
    for (std::size_t i : members) sum += cache.recourse(k, y, i);
    best = std::max(best, sum / static_cast<double>(members.size()) - cache.first_stage_cost[y]);
  }
  return best;
}

}  // namespace

double approx_f(const IterateCache& cache) {
  std::vector<std::size_t> all(static_cast<std::size_t>(cache.inner));
  std::iota(all.begin(), all.end(), 0);
  double total = 0.0;
  for (std::size_t k = 0; k < cache.solutions.size(); ++k) total += best_on(cache, k, all);
  return total / static_cast<double>(cache.solutions.size());
}

double approx_f_plus(const Instance& inst, const IterateCache& cache, int j, const HeuristicSpec& spec) {
  if (j < 0 || j >= inst.n_customers()) throw InvalidArgument("item out of range");
  const auto jj = static_cast<std::size_t>(j);
  double total = 0.0;
  for (std::size_t k = 0; k < cache.solutions.size(); ++k) {
    std::vector<double> values;
    values.reserve(cache.scenarios[k].size());
    for (const auto& sc : cache.scenarios[k]) values.push_back(sc.demand[jj]);
    const auto clusters = kmeans_1d(values, spec.clusters);
    double draw = 0.0;
    for (const auto& members : clusters) {
      const double share = spec.weighted_clusters
                               ? static_cast<double>(members.size()) / static_cast<double>(values.size())
                               : 1.0 / static_cast<double>(clusters.size());
      draw += share * best_on(cache, k, members);
    }
    total += draw;
  }
  return total / static_cast<double>(cache.solutions.size());
}

void CandidatePool::write_csv(std::ostream& out) const {
  out << "iterate,set,approx_f,approx_net,seconds,solves,recourse_evals\n";
  out.precision(15);
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const auto& e = entries[t];
    out << t << ',' << e.set.encode() << ',' << e.approx_f << ',' << e.approx_net << ',' << e.seconds << ','
        << e.solves << ',' << e.recourse_evals << '\n';
  }
}

CandidatePool greedy_run(const Instance& inst, const HeuristicSpec& spec, std::uint64_t seed,
                         const SolverConfig& config, WorkCounters* counters, int workers) {
  spec.validate();
  WorkCounters local;
  WorkCounters& work = counters != nullptr ? *counters : local;
  const int n = inst.n_customers();
  Stopwatch clock;
  CandidatePool pool;
  auto record = [&](IndexSet s, double f) {
    pool.entries.push_back({s, f, f - alpha(inst, s), clock.seconds(), work.subproblem_solves.load(),
                            work.recourse_evals.load()});
  };

  IndexSet s;
  if (n == 0) {
    record(s, approx_f(build_iterate_cache(inst, s, spec, seed, 0, config, &work, workers)));
    return pool;
  }
  for (int t = 0; t < n; ++t) {
    const IterateCache cache = build_iterate_cache(inst, s, spec, seed, t, config, &work, workers);
    record(s, approx_f(cache));
    const auto rest = IndexSet::full(n).minus(s).items();
    std::vector<double> plus(rest.size());
    parallel_for(rest.size(), workers, [&](std::size_t r) { plus[r] = approx_f_plus(inst, cache, rest[r], spec); });
    std::size_t best = 0;
    double best_z = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < rest.size(); ++r) {
      IndexSet with = s;
      with.insert(rest[r]);
      const double z = plus[r] - alpha(inst, with);
      if (z > best_z) {
        best_z = z;
        best = r;
      }
    }
    s.insert(rest[best]);
    // The full set is never the current set of an iterate, so it keeps the
    // estimate it was chosen with.
    if (t + 1 == n) record(s, plus[best]);
  }
  return pool;
}

std::vector<FinalCandidate> finalize_candidates(const Instance& inst, const CandidatePool& pool, int top,
                                                const LowerBoundSpec& spec, std::uint64_t seed,
                                                const SolverConfig& config, WorkCounters* counters, int workers) {
  if (pool.entries.empty()) throw InvalidArgument("candidate pool is empty");
  if (top < 1) throw InvalidArgument("need at least one candidate to finalize");
  std::vector<const PoolEntry*> ranked;
  for (const auto& e : pool.entries) ranked.push_back(&e);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const PoolEntry* a, const PoolEntry* b) { return a->approx_net > b->approx_net; });

  std::vector<FinalCandidate> out;
  std::set<std::uint64_t> seen;
  for (const PoolEntry* e : ranked) {
    if (static_cast<int>(out.size()) == top) break;
    if (!seen.insert(e->set.mask()).second) continue;
    FinalCandidate c;
    c.set = e->set;
    c.approx_net = e->approx_net;
    c.bound = stat_lb(inst, e->set, spec, config, derive_stream(seed, {kFinalStream, e->set.mask()}), counters,
                      workers);
    const double cost = alpha(inst, e->set);
    c.net_mean = c.bound.estimate.mean - cost;
    c.net_std_error = c.bound.estimate.std_error;
    c.net_ci_lower = c.bound.ci_lower - cost;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FinalCandidate& a, const FinalCandidate& b) { return a.net_mean > b.net_mean; });
  return out;
}

void write_final_csv(std::ostream& out, const std::vector<FinalCandidate>& finals) {
  out << "rank,set,approx_net,f_mean,f_std_error,net_mean,net_std_error,net_ci_lower\n";
  out.precision(15);
  for (std::size_t r = 0; r < finals.size(); ++r) {
    const auto& c = finals[r];
    out << r << ',' << c.set.encode() << ',' << c.approx_net << ',' << c.bound.estimate.mean << ','
        << c.bound.estimate.std_error << ',' << c.net_mean << ',' << c.net_std_error << ',' << c.net_ci_lower << '\n';
  }
}

}  // namespace pesp
