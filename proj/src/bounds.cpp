#include "pesp/bounds.hpp"

#include <cmath>
#include <limits>

#include "pesp/demand_sampling.hpp"
#include "pesp/errors.hpp"
#include "pesp/parallel.hpp"

namespace pesp {

double alpha(const Instance& inst, IndexSet s) {
  double total = 0.0;
  for (int j : s.items()) total += inst.customers[static_cast<std::size_t>(j)].probe_cost;
  return total;
}

void ProbeState::validate(int n) const {
  const IndexSet all = IndexSet::full(n);
  if (!excluded.subset_of(all) || !required.subset_of(all)) {
    throw InvalidArgument("probe restriction index out of range");
  }
  if (excluded.intersects(required)) throw InvalidArgument("an item cannot be both excluded and required");
  if (mode == ProbeMode::SingleElement && !groups.empty()) {
    throw InvalidArgument("single-element nodes carry no groups");
  }
  if (mode == ProbeMode::MultiElement && !required.empty()) {
    throw InvalidArgument("multi-element nodes express requirements as groups");
  }
  IndexSet seen = excluded | required;
  for (IndexSet g : groups) {
    if (g.empty()) throw InvalidArgument("groups must be nonempty");
    if (!g.subset_of(all)) throw InvalidArgument("group index out of range");
    if (g.intersects(seen)) throw InvalidArgument("groups must be disjoint from each other and the excluded set");
    seen = seen | g;
  }
}

IndexSet ProbeState::free_items(int n) const {
  IndexSet used = excluded | required;
  for (IndexSet g : groups) used = used | g;
  return IndexSet::full(n).minus(used);
}

bool ProbeState::is_leaf(int n) const {
  if (!free_items(n).empty()) return false;
  for (IndexSet g : groups) {
    if (g.size() > 1) return false;
  }
  return true;
}

double ProbeState::cost_floor(const Instance& inst) const {
  if (mode == ProbeMode::SingleElement) return alpha(inst, required);
  double total = 0.0;
  for (IndexSet g : groups) {
    double cheapest = std::numeric_limits<double>::infinity();
    for (int j : g.items()) cheapest = std::min(cheapest, inst.customers[static_cast<std::size_t>(j)].probe_cost);
    total += cheapest;
  }
  return total;
}

bool ProbeState::admits(IndexSet s) const {
  if (s.intersects(excluded) || !required.subset_of(s)) return false;
  for (IndexSet g : groups) {
    if (!g.intersects(s)) return false;
  }
  return true;
}

std::string ProbeState::encode() const {
  std::string g;
  for (IndexSet group : groups) {
    if (!g.empty()) g += '|';
    g += group.encode();
  }
  return "x=" + excluded.encode() + ";r=" + required.encode() + ";g=" + g;
}

void BranchingStats::add(double weight, const std::vector<double>& demand, double value) {
  weights_.push_back(weight);
  demands_.push_back(demand);
  values_.push_back(value);
}

void BranchingStats::fill(IndexSet set, FEvaluation& out) const {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.difference.assign(static_cast<std::size_t>(n_), nan);
  out.covariance.assign(static_cast<std::size_t>(n_), nan);
  double total = 0.0;
  double f = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) {
    total += weights_[k];
    f += weights_[k] * values_[k];
  }
  if (total <= 0.0) return;
  f /= total;
  for (int j : set.items()) {
    const auto jj = static_cast<std::size_t>(j);
    double m = 0.0;
    double high_w = 0.0;
    double high_v = 0.0;
    double low_w = 0.0;
    double low_v = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      const double d = demands_[k][jj];
      m += weights_[k] * d;
      if (d > 0.0) {
        high_w += weights_[k];
        high_v += weights_[k] * values_[k];
      } else {
        low_w += weights_[k];
        low_v += weights_[k] * values_[k];
      }
    }
    m /= total;
    double cov = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) cov += weights_[k] * (demands_[k][jj] - m) * (values_[k] - f);
    out.covariance[jj] = cov / total;
    if (high_w > 0.0 && low_w > 0.0) out.difference[jj] = high_v / high_w - low_v / low_w;
  }
}

namespace {

FEvaluation exact_evaluation(const Instance& inst, IndexSet s, const SolverConfig& config,
                             WorkCounters* counters, int workers) {
  const auto outcomes = enumerate_support_projection(inst, s);
  // Refuse before solving anything when the conditional supports are too big.
  for (int j : IndexSet::full(inst.n_customers()).minus(s).items()) {
    if (!inst.customers[static_cast<std::size_t>(j)].demand.is_bernoulli()) {
      throw InfiniteSupport("exact evaluation needs finite-support demand");
    }
  }
  const int free_items = inst.n_customers() - s.size();
  if (free_items >= 63 || (std::size_t{1} << free_items) > kEnumerationCap) {
    throw SizeLimitExceeded("conditional support too large for exact evaluation");
  }
  std::vector<double> values(outcomes.size());
  parallel_for(outcomes.size(), workers, [&](std::size_t k) {
    const auto scenarios = enumerate_conditional_support(inst, outcomes[k].observation);
    values[k] = solve_two_stage(inst, scenarios, config, counters).value;
  });
  FEvaluation out;
  out.set = s;
  BranchingStats stats(inst.n_customers());
  double f = 0.0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    f += outcomes[k].probability * values[k];
    stats.add(outcomes[k].probability, outcomes[k].observation.values, values[k]);
  }
  out.value = BoundEstimate::exact(f);
  stats.fill(s, out);
  if (counters != nullptr) counters->f_evals.fetch_add(1, std::memory_order_relaxed);
  return out;
}

}  // namespace

BoundEstimate f_exact(const Instance& inst, IndexSet s, const SolverConfig& config, WorkCounters* counters) {
  return exact_evaluation(inst, s, config, counters, 1).value;
}

FEvaluation ExactEvaluator::evaluate(IndexSet s) {
  return exact_evaluation(inst_, s, config_, counters_, workers_);
}

NodeBounds node_bounds(const Instance& inst, const ProbeState& state, const BoundEstimate& f_observable) {
  const IndexSet largest = state.observable(inst.n_customers());
  return {f_observable.shifted(-alpha(inst, largest)), f_observable.shifted(-state.cost_floor(inst))};
}

NodeBounds node_bounds_single(const Instance& inst, const ProbeState& state, FEvaluator& f_eval) {
  if (state.mode != ProbeMode::SingleElement) throw InvalidArgument("expected a single-element node");
  state.validate(inst.n_customers());
  return node_bounds(inst, state, f_eval.evaluate(state.observable(inst.n_customers())).value);
}

NodeBounds node_bounds_multi(const Instance& inst, const ProbeState& state, FEvaluator& f_eval) {
  if (state.mode != ProbeMode::MultiElement) throw InvalidArgument("expected a multi-element node");
  state.validate(inst.n_customers());
  return node_bounds(inst, state, f_eval.evaluate(state.observable(inst.n_customers())).value);
}

}  // namespace pesp
