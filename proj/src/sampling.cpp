#include "pesp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "pesp/errors.hpp"
#include "pesp/parallel.hpp"
#include "pesp/recourse.hpp"
#include "pesp/stats.hpp"

namespace pesp {

namespace {

// Stream ids separating the estimators' draws under one seed.
constexpr std::uint64_t kSaaStream = 0x5AA;
constexpr std::uint64_t kOuterStream = 0x0B7;
constexpr std::uint64_t kInnerStream = 0x1AA;
constexpr std::uint64_t kEnumStream = 0xE4E;
constexpr std::uint64_t kLowerOuter = 0x10B;
constexpr std::uint64_t kLowerSelect = 0x15E;
constexpr std::uint64_t kLowerPrice = 0x1BC;

std::vector<Scenario> with_equal_weights(std::vector<Scenario> scenarios) {
  const double w = 1.0 / static_cast<double>(scenarios.size());
  for (auto& s : scenarios) s.weight = w;
  return scenarios;
}

}  // namespace

FEvaluation saa_evaluate(const Instance& inst, IndexSet s, std::span<const Scenario> sample,
                         SolveMemo* memo, const SolverConfig& config, WorkCounters* counters,
                         int workers) {
  if (sample.empty()) throw InvalidArgument("SAA needs a nonempty sample");
  const auto probed = s.items();
  std::map<std::vector<double>, std::vector<std::size_t>> classes;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    std::vector<double> key;
    key.reserve(probed.size());
    for (int j : probed) key.push_back(sample[k].demand[static_cast<std::size_t>(j)]);
    classes[std::move(key)].push_back(k);
  }
  std::vector<const std::vector<std::size_t>*> groups;
  groups.reserve(classes.size());
  for (const auto& [key, members] : classes) groups.push_back(&members);
  // Sum in order of each group's first sample point, so partitions that
  // coincide give bit-identical values whatever the probe set.
  std::sort(groups.begin(), groups.end(), [](const auto* a, const auto* b) { return a->front() < b->front(); });

  std::vector<double> values(groups.size());
  parallel_for(groups.size(), workers, [&](std::size_t g) {
    const auto& members = *groups[g];
    auto solve = [&] {
      std::vector<Scenario> scenarios;
      scenarios.reserve(members.size());
      for (std::size_t k : members) scenarios.push_back(sample[k]);
      return solve_two_stage(inst, with_equal_weights(std::move(scenarios)), config, counters);
    };
    if (memo != nullptr) {
      values[g] = memo->lookup_or_solve(MemoKey::from_sorted(members, sample.size()), solve, counters).first.value;
    } else {
      values[g] = solve().value;
    }
  });

  FEvaluation out;
  out.set = s;
  BranchingStats stats(inst.n_customers());
  const double n = static_cast<double>(sample.size());
  double f = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double w = static_cast<double>(groups[g]->size()) / n;
    f += w * values[g];
    stats.add(w, sample[groups[g]->front()].demand, values[g]);
  }
  out.value = BoundEstimate::exact(f);
  stats.fill(s, out);
  if (counters != nullptr) counters->f_evals.fetch_add(1, std::memory_order_relaxed);
  return out;
}

void ReplicationSummary::summarize() {
  mean = pesp::mean(values);
  stddev = sample_stddev(values);
  const auto l = static_cast<int>(values.size());
  ci_upper = l >= 2 ? mean + student_t_critical(l - 1, alpha) * stddev / std::sqrt(static_cast<double>(l)) : mean;
}

void ReplicationSummary::write_csv(std::ostream& out) const {
  out << "replication,v,N,seed,work_units,budget_limited\n";
  out.precision(17);
  for (std::size_t l = 0; l < values.size(); ++l) {
    out << l << ',' << values[l] << ',' << sample_size << ',' << seed << ',' << work_units[l] << ','
        << (budget_limited[l] ? 1 : 0) << '\n';
  }
}

ReplicationSummary saa_replicate(const Instance& inst, int sample_size, int replications,
                                 SamplingMode mode, const SampledProblemSolver& solve,
                                 std::uint64_t seed, int workers, double alpha) {
  if (replications < 2) throw InvalidArgument("replication estimates need L >= 2");
  if (sample_size < 1) throw InvalidArgument("sample size must be >= 1");
  const auto l = static_cast<std::size_t>(replications);
  ReplicationSummary summary;
  summary.values.resize(l);
  summary.work_units.resize(l);
  summary.budget_limited.assign(l, false);
  summary.sample_size = sample_size;
  summary.seed = seed;
  summary.alpha = alpha;
  std::vector<char> limited(l, 0);
  parallel_for(l, workers, [&](std::size_t r) {
    CounterRng rng(seed, {kSaaStream, r});
    const auto sample = sample_joint(inst, sample_size, mode, rng);
    WorkCounters counters;
    const ReplicationOutcome outcome = solve(sample, r, counters);
    summary.values[r] = outcome.value;
    summary.work_units[r] = counters.work_units();
    limited[r] = outcome.budget_limited ? 1 : 0;
  });
  for (std::size_t r = 0; r < l; ++r) summary.budget_limited[r] = limited[r] != 0;
  summary.summarize();
  return summary;
}

void InternalSpec::validate() const {
  if (batches < 2 || enum_batches < 2) throw InvalidArgument("internal sampling needs at least two batches");
  if (outer < batches || outer % batches != 0) {
    throw InvalidArgument("outer sample size must be a positive multiple of the batch count");
  }
  if (inner < 1) throw InvalidArgument("conditional sample size must be >= 1");
}

FEvaluation internal_ub_evaluate(const Instance& inst, IndexSet s, const InternalSpec& spec,
                                 const SolverConfig& config, std::uint64_t seed, WorkCounters* counters,
                                 int workers) {
  spec.validate();
  const auto batches = static_cast<std::size_t>(spec.batches);
  const auto per_batch = static_cast<std::size_t>(spec.outer / spec.batches);
  std::vector<Scenario> outer;
  outer.reserve(batches * per_batch);
  for (std::size_t b = 0; b < batches; ++b) {
    CounterRng rng(seed, {kOuterStream, b});
    for (auto& p : sample_joint(inst, static_cast<int>(per_batch), spec.mode, rng)) outer.push_back(std::move(p));
  }
  std::vector<double> values(outer.size());
  parallel_for(outer.size(), workers, [&](std::size_t k) {
    CounterRng rng(seed, {kInnerStream, k});
    const auto inner = sample_conditional(inst, observe(outer[k], s), spec.inner, spec.mode, rng);
    values[k] = solve_two_stage(inst, inner, config, counters).value;
  });

  std::vector<double> batch_means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    batch_means[b] = mean(std::span<const double>(values).subspan(b * per_batch, per_batch));
  }
  FEvaluation out;
  out.set = s;
  out.value = {mean(values), sample_stddev(batch_means) / std::sqrt(static_cast<double>(batches)),
               spec.batches, EstimateMode::Statistical};
  BranchingStats stats(inst.n_customers());
  for (std::size_t k = 0; k < outer.size(); ++k) stats.add(1.0, observe(outer[k], s).values, values[k]);
  stats.fill(s, out);
  if (counters != nullptr) counters->f_evals.fetch_add(1, std::memory_order_relaxed);
  return out;
}

FEvaluation internal_ub_enumerated_evaluate(const Instance& inst, IndexSet s, int batches, int inner,
                                            SamplingMode mode, const SolverConfig& config,
                                            std::uint64_t seed, WorkCounters* counters, int workers) {
  if (batches < 2) throw InvalidArgument("enumerated estimate needs at least two batches");
  if (inner < 1) throw InvalidArgument("conditional sample size must be >= 1");
  const auto outcomes = enumerate_support_projection(inst, s);
  const auto m = static_cast<std::size_t>(batches);
  std::vector<double> values(outcomes.size() * m);
  parallel_for(values.size(), workers, [&](std::size_t t) {
    const std::size_t k = t / m;
    const std::size_t i = t % m;
    CounterRng rng(seed, {kEnumStream, k, i});
    const auto scenarios = sample_conditional(inst, outcomes[k].observation, inner, mode, rng);
    values[t] = solve_two_stage(inst, scenarios, config, counters).value;
  });

  FEvaluation out;
  out.set = s;
  BranchingStats stats(inst.n_customers());
  double mu = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto row = std::span<const double>(values).subspan(k * m, m);
    const double p = outcomes[k].probability;
    const double mk = mean(row);
    const double sk = sample_stddev(row);
    mu += p * mk;
    var += p * p * sk * sk;
    stats.add(p, outcomes[k].observation.values, mk);
  }
  out.value = {mu, std::sqrt(var / static_cast<double>(m)), batches, EstimateMode::Statistical};
  stats.fill(s, out);
  if (counters != nullptr) counters->f_evals.fetch_add(1, std::memory_order_relaxed);
  return out;
}

bool use_enumeration(const Instance& inst, IndexSet s, const InternalSpec& spec) {
  if (s.size() > spec.enumerate_max_probes || s.size() >= 63) return false;
  if ((std::size_t{1} << s.size()) > spec.enumerate_max_outcomes) return false;
  for (int j : s.items()) {
    if (!inst.customers[static_cast<std::size_t>(j)].demand.is_bernoulli()) return false;
  }
  return true;
}

FEvaluation InternalEvaluator::evaluate(IndexSet s) {
  const std::uint64_t stream = derive_stream(seed_, {s.mask()});
  if (use_enumeration(inst_, s, spec_)) {
    return internal_ub_enumerated_evaluate(inst_, s, spec_.enum_batches, spec_.inner, spec_.mode, config_,
                                           stream, counters_, workers_);
  }
  return internal_ub_evaluate(inst_, s, spec_, config_, stream, counters_, workers_);
}

double global_stat_ub(std::span<const LeafBound> leaves, double alpha) {
  if (leaves.empty()) throw InvalidArgument("global bound needs at least one leaf");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double point_mass = -std::numeric_limits<double>::infinity();
  double spread = 0.0;
  for (const auto& leaf : leaves) {
    const double centre = leaf.offset + leaf.estimate.mean;
    if (leaf.estimate.std_error < 0.0) throw InvalidArgument("standard errors must be nonnegative");
    lo = std::min(lo, centre);
    hi = std::max(hi, centre);
    spread = std::max(spread, leaf.estimate.std_error);
    if (leaf.estimate.std_error == 0.0) point_mass = std::max(point_mass, centre);
  }
  const double target = std::log1p(-alpha);
  // log of prod_P P(U_P <= u); -inf below any point mass.
  auto log_coverage = [&](double u) {
    double total = 0.0;
    for (const auto& leaf : leaves) {
      const double centre = leaf.offset + leaf.estimate.mean;
      if (leaf.estimate.std_error == 0.0) {
        if (u < centre) return -std::numeric_limits<double>::infinity();
        continue;
      }
      total += std::log(normal_cdf((u - centre) / leaf.estimate.std_error));
    }
    return total;
  };
  if (spread == 0.0) return point_mass;
  lo = std::max(lo - 10.0 * spread, point_mass);
  hi = hi + 10.0 * spread;
  if (log_coverage(lo) >= target) return lo;
  double width = hi - lo;
  while (log_coverage(hi) < target) {
    width *= 2.0;
    hi = lo + width;
  }
  const double tol = 1e-6 * std::max({1.0, std::abs(hi), spread});
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (log_coverage(mid) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void LowerBoundSpec::validate() const {
  if (outer < 2) throw InvalidArgument("lower bound needs at least two outer draws");
  if (inner < 1 || selection < 1) throw InvalidArgument("conditional sample sizes must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
}

StatLowerBound stat_lb(const Instance& inst, IndexSet s, const LowerBoundSpec& spec,
                       const SolverConfig& config, std::uint64_t seed, WorkCounters* counters, int workers) {
  spec.validate();
  SolverConfig select = config;
  select.incumbent_on_cap = true;
  select.node_cap = std::min(config.node_cap, spec.selection_node_cap);
  const auto n1 = static_cast<std::size_t>(spec.outer);
  StatLowerBound out;
  out.values.resize(n1);
  parallel_for(n1, workers, [&](std::size_t k) {
    CounterRng outer_rng(seed, {kLowerOuter, k});
    const auto draw = sample_joint(inst, 1, SamplingMode::MonteCarlo, outer_rng);
    const Observation obs = observe(draw.front(), s);
    CounterRng select_rng(seed, {kLowerSelect, k});
    const auto selection = sample_conditional(inst, obs, spec.selection, spec.inner_mode, select_rng);
    const FirstStageSolution chosen = solve_two_stage(inst, selection, select, counters).solution;
    CounterRng price_rng(seed, {kLowerPrice, k});
    const auto pricing = sample_conditional(inst, obs, spec.inner, spec.inner_mode, price_rng);
    out.values[k] = expected_value(inst, chosen, pricing);
    if (counters != nullptr) counters->add_recourse(pricing.size());
  });
  const double m = mean(out.values);
  const double se = sample_stddev(out.values) / std::sqrt(static_cast<double>(n1));
  out.estimate = {m, se, spec.outer, EstimateMode::Statistical};
  out.ci_lower = m - student_t_critical(spec.outer - 1, spec.alpha) * se;
  return out;
}

}  // namespace pesp
