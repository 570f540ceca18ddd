#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pesp/bounds.hpp"
#include "pesp/sampling.hpp"
#include "pesp/work.hpp"

namespace pesp {

/// Random picks a uniformly random free item and branches single-element.
enum class Branching { Random, Single, Multi };
/// Which per-item statistic of the F evaluation estimates the bound drop of
/// the excluding child. Auto uses Difference on all-Bernoulli instances and
/// Covariance otherwise.
enum class ScoreRule { Auto, Difference, Covariance };
enum class SearchStatus { Optimal, BudgetExhausted, TreeExhausted };

std::string to_string(Branching b);
Branching parse_branching(const std::string& s);
std::string to_string(ScoreRule r);
ScoreRule parse_score_rule(const std::string& s);
std::string to_string(SearchStatus s);

/// (v - min) / (max - min); an all-equal vector maps to all zeros.
std::vector<double> min_max_normalize(const std::vector<double>& v);

struct CandidateScores {
  std::vector<int> items;
  std::vector<double> plus;   // alpha(required) - alpha(required + j)
  std::vector<double> minus;  // estimated F drop when j joins the excluded set
  std::vector<double> psi;    // normalized plus + normalized minus
  int best = -1;              // argmax psi, lowest index on ties
};

CandidateScores score_candidates(const Instance& inst, IndexSet candidates, IndexSet required,
                                 const FEvaluation& f, ScoreRule rule);

/// Sorts `group` by score (descending, index ascending on ties) and returns
/// the items at odd ranks counting from one; `psi` is indexed by item.
IndexSet partition_group(IndexSet group, const std::vector<double>& psi);

/// (probed child, excluded child).
std::pair<ProbeState, ProbeState> branch_single(const ProbeState& node, int j);
/// The three children of the trichotomy on group `t` split by `k`.
std::array<ProbeState, 3> branch_multi(const ProbeState& node, IndexSet t, IndexSet k);
/// For nodes with unconstrained items: (probe none of them, probe at least one).
std::pair<ProbeState, ProbeState> split_free(const ProbeState& node, int n);

struct BnbOptions {
  Branching branching = Branching::Single;
  ScoreRule score = ScoreRule::Auto;
  WorkBudget budget;
  std::uint64_t seed = 0;  // random branching only
  double fathom_tolerance = 1e-9;
  /// Statistical searches order nodes by mean + priority_z * std_error.
  double priority_z = 2.0;
  /// Confidence of the global statistical bound.
  double alpha = 0.05;
};

struct NodeRecord {
  std::uint64_t id = 0;
  std::int64_t parent = -1;
  int depth = 0;
  std::string state;
  BoundEstimate upper;
  BoundEstimate lower;
  double incumbent = 0.0;
  double global_upper = 0.0;  // exact modes: max of incumbent and open bounds
  std::uint64_t work_units = 0;
  std::uint64_t f_evals = 0;
  double seconds = 0.0;
};

/// A full-probe solution seen during the search: the node's largest
/// admissible set and its estimated net value F - alpha.
struct SearchCandidate {
  IndexSet set;
  BoundEstimate net_value;
};

struct SearchReport {
  SearchStatus status = SearchStatus::Optimal;
  bool statistical = false;
  IndexSet incumbent;
  double incumbent_value = 0.0;
  /// Exact modes: incumbent when optimal, otherwise the largest open bound.
  /// Statistical mode: the global bound over the final leaves.
  double upper_bound = 0.0;
  std::uint64_t nodes = 0;
  std::uint64_t f_evals = 0;
  double seconds = 0.0;
  std::string stop_reason;
  std::vector<NodeRecord> log;
  std::vector<SearchCandidate> candidates;  // distinct sets, best estimate first
  std::vector<LeafBound> leaves;            // statistical mode

  /// Columns: node,parent,depth,state,ub,ub_se,lb,incumbent,global_ub,work_units,f_evals,seconds.
  void write_log_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// Best-bound search over probe sets. Exact evaluators fathom nodes whose
/// upper bound does not beat the incumbent by more than the tolerance and
/// stop with a proven optimum. Statistical evaluators never fathom and run
/// until the budget is spent or every leaf is terminal.
SearchReport run_bnb(const Instance& inst, FEvaluator& f_eval, const BnbOptions& options,
                     WorkCounters& counters);

}  // namespace pesp
