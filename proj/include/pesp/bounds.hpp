#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pesp/index_set.hpp"
#include "pesp/instance.hpp"
#include "pesp/two_stage.hpp"
#include "pesp/work.hpp"

namespace pesp {

enum class EstimateMode { Exact, Statistical };

/// A value of F(S)-type with its uncertainty. Exact estimates carry a zero
/// standard error.
struct BoundEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int batches = 1;
  EstimateMode mode = EstimateMode::Exact;

  static BoundEstimate exact(double value) { return {value, 0.0, 1, EstimateMode::Exact}; }
  BoundEstimate shifted(double delta) const {
    BoundEstimate out = *this;
    out.mean += delta;
    return out;
  }
};

/// Total probe cost of `s` (costs are modular).
double alpha(const Instance& inst, IndexSet s);

enum class ProbeMode { SingleElement, MultiElement };

/// Restrictions on the probe set at a search node. `excluded` items are never
/// probed. Single-element nodes list `required` items that are always probed;
/// multi-element nodes list disjoint groups from each of which at least one
/// item is probed.
struct ProbeState {
  ProbeMode mode = ProbeMode::SingleElement;
  IndexSet excluded;
  IndexSet required;
  std::vector<IndexSet> groups;

  static ProbeState root(ProbeMode mode) { return ProbeState{mode, {}, {}, {}}; }

  /// Throws InvalidArgument on overlapping or out-of-range restrictions.
  void validate(int n) const;
  /// The largest admissible probe set, [n] minus the excluded items.
  IndexSet observable(int n) const { return IndexSet::full(n).minus(excluded); }
  /// Items not yet constrained by any restriction.
  IndexSet free_items(int n) const;
  /// True when exactly one probe set is admissible.
  bool is_leaf(int n) const;
  /// Lower bound on the probe cost of every admissible set.
  double cost_floor(const Instance& inst) const;
  /// True when `s` satisfies every restriction.
  bool admits(IndexSet s) const;
  /// "x=<excluded>;r=<required>;g=<a;b|c>"
  std::string encode() const;
};

/// Result of one F evaluation, with the per-item statistics used to score
/// branching candidates. Statistics are indexed by customer and are NaN for
/// items outside the evaluated set or when a side of the split is empty.
struct FEvaluation {
  IndexSet set;
  BoundEstimate value;
  /// E[R | demand_j > 0] - E[R | demand_j = 0] over the evaluated outcomes.
  std::vector<double> difference;
  /// Covariance between demand_j and R over the evaluated outcomes.
  std::vector<double> covariance;
};

/// Weighted outcomes (observed demand vector, conditional value) collected
/// during an F evaluation, reduced to the branching statistics.
class BranchingStats {
 public:
  explicit BranchingStats(int n) : n_(n) {}
  void add(double weight, const std::vector<double>& demand, double value);
  void fill(IndexSet set, FEvaluation& out) const;

 private:
  int n_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> demands_;
  std::vector<double> values_;
};

/// Strategy for computing or estimating F(S); the search is agnostic to which.
class FEvaluator {
 public:
  virtual ~FEvaluator() = default;
  virtual FEvaluation evaluate(IndexSet s) = 0;
  /// Statistical evaluators forbid fathoming by bound.
  virtual bool statistical() const = 0;
  virtual std::string name() const = 0;
};

/// Exact F(S) by enumerating the projected support and solving each
/// conditional two-stage program. Bernoulli demand only.
BoundEstimate f_exact(const Instance& inst, IndexSet s, const SolverConfig& config = {},
                      WorkCounters* counters = nullptr);

class ExactEvaluator final : public FEvaluator {
 public:
  ExactEvaluator(const Instance& inst, SolverConfig config = {}, WorkCounters* counters = nullptr,
                 int workers = 1)
      : inst_(inst), config_(std::move(config)), counters_(counters), workers_(workers) {}
  FEvaluation evaluate(IndexSet s) override;
  bool statistical() const override { return false; }
  std::string name() const override { return "exact"; }

 private:
  const Instance& inst_;
  SolverConfig config_;
  WorkCounters* counters_;
  int workers_;
};

struct NodeBounds {
  BoundEstimate lower;  // value of the largest admissible probe set
  BoundEstimate upper;
};

/// Node bounds from one F value at the largest admissible set:
/// lower = F - alpha(largest set), upper = F - cost_floor.
NodeBounds node_bounds(const Instance& inst, const ProbeState& state, const BoundEstimate& f_observable);
NodeBounds node_bounds_single(const Instance& inst, const ProbeState& state, FEvaluator& f_eval);
NodeBounds node_bounds_multi(const Instance& inst, const ProbeState& state, FEvaluator& f_eval);

}  // namespace pesp
