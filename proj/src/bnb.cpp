#include "pesp/bnb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <set>

#include "pesp/errors.hpp"
#include "pesp/rng.hpp"

namespace pesp {

std::string to_string(Branching b) {
  switch (b) {
    case Branching::Random: return "random";
    case Branching::Single: return "single";
    case Branching::Multi: return "multi";
  }
  return "single";
}

Branching parse_branching(const std::string& s) {
  if (s == "random" || s == "rand") return Branching::Random;
  if (s == "single") return Branching::Single;
  if (s == "multi") return Branching::Multi;
  throw InvalidArgument("unknown branching rule: " + s);
}

std::string to_string(ScoreRule r) {
  switch (r) {
    case ScoreRule::Auto: return "auto";
    case ScoreRule::Difference: return "difference";
    case ScoreRule::Covariance: return "covariance";
  }
  return "auto";
}

ScoreRule parse_score_rule(const std::string& s) {
  if (s == "auto") return ScoreRule::Auto;
  if (s == "difference") return ScoreRule::Difference;
  if (s == "covariance") return ScoreRule::Covariance;
  throw InvalidArgument("unknown score rule: " + s);
}

std::string to_string(SearchStatus s) {
  switch (s) {
    case SearchStatus::Optimal: return "optimal";
    case SearchStatus::BudgetExhausted: return "budget_exhausted";
    case SearchStatus::TreeExhausted: return "tree_exhausted";
  }
  return "optimal";
}

std::vector<double> min_max_normalize(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double width = *hi - *lo;
  if (!(width > 0.0)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / width;
  return out;
}

CandidateScores score_candidates(const Instance& inst, IndexSet candidates, IndexSet required,
                                 const FEvaluation& f, ScoreRule rule) {
  if (candidates.empty()) throw InvalidArgument("no branching candidates");
  if (rule == ScoreRule::Auto) rule = inst.all_bernoulli() ? ScoreRule::Difference : ScoreRule::Covariance;
  const auto& stat = rule == ScoreRule::Difference ? f.difference : f.covariance;
  CandidateScores out;
  out.items = candidates.items();
  const double base = alpha(inst, required);
  for (int j : out.items) {
    IndexSet with = required;
    with.insert(j);
    out.plus.push_back(base - alpha(inst, with));
    const double d = static_cast<std::size_t>(j) < stat.size() ? stat[static_cast<std::size_t>(j)] : 0.0;
    // No observed spread means no evidence that knowing j matters.
    out.minus.push_back(std::isnan(d) ? 0.0 : d);
  }
  const auto zp = min_max_normalize(out.plus);
  const auto zm = min_max_normalize(out.minus);
  double best = -1.0;
  for (std::size_t i = 0; i < out.items.size(); ++i) {
    out.psi.push_back(zp[i] + zm[i]);
    if (out.psi[i] > best) {
      best = out.psi[i];
      out.best = out.items[i];
    }
  }
  return out;
}

IndexSet partition_group(IndexSet group, const std::vector<double>& psi) {
  if (group.size() < 2) throw InvalidArgument("only groups of two or more items can be split");
  auto items = group.items();
  std::stable_sort(items.begin(), items.end(), [&](int a, int b) {
    return psi[static_cast<std::size_t>(a)] > psi[static_cast<std::size_t>(b)];
  });
  IndexSet k;
  for (std::size_t r = 0; r < items.size(); r += 2) k.insert(items[r]);
  return k;
}

namespace {

void canonicalize(ProbeState& s) {
  std::sort(s.groups.begin(), s.groups.end(), [](IndexSet a, IndexSet b) { return a.front() < b.front(); });
}

std::vector<IndexSet> without(const std::vector<IndexSet>& groups, IndexSet t) {
  std::vector<IndexSet> out;
  for (IndexSet g : groups) {
    if (g != t) out.push_back(g);
  }
  return out;
}

}  // namespace

std::pair<ProbeState, ProbeState> branch_single(const ProbeState& node, int j) {
  if (node.mode != ProbeMode::SingleElement) throw InvalidArgument("branch_single needs a single-element node");
  if (node.excluded.contains(j) || node.required.contains(j)) throw InvalidArgument("item already fixed");
  ProbeState plus = node;
  plus.required.insert(j);
  ProbeState minus = node;
  minus.excluded.insert(j);
  return {plus, minus};
}

std::array<ProbeState, 3> branch_multi(const ProbeState& node, IndexSet t, IndexSet k) {
  if (node.mode != ProbeMode::MultiElement) throw InvalidArgument("branch_multi needs a multi-element node");
  if (std::find(node.groups.begin(), node.groups.end(), t) == node.groups.end()) {
    throw InvalidArgument("branching group is not a group of the node");
  }
  if (k.empty() || k == t || !k.subset_of(t)) throw InvalidArgument("split must be a proper nonempty subset");
  const IndexSet rest = t.minus(k);
  const auto others = without(node.groups, t);
  std::array<ProbeState, 3> out{node, node, node};
  out[0].excluded = node.excluded | k;
  out[0].groups = others;
  out[0].groups.push_back(rest);
  out[1].excluded = node.excluded | rest;
  out[1].groups = others;
  out[1].groups.push_back(k);
  out[2].groups = others;
  out[2].groups.push_back(k);
  out[2].groups.push_back(rest);
  for (auto& s : out) canonicalize(s);
  return out;
}

std::pair<ProbeState, ProbeState> split_free(const ProbeState& node, int n) {
  const IndexSet free = node.free_items(n);
  if (free.empty()) throw InvalidArgument("node has no unconstrained items");
  ProbeState none = node;
  none.excluded = node.excluded | free;
  ProbeState some = node;
  some.groups.push_back(free);
  canonicalize(some);
  return {none, some};
}

void SearchReport::write_log_csv(std::ostream& out) const {
  out << "node,parent,depth,state,ub,ub_se,lb,incumbent,global_ub,work_units,f_evals,seconds\n";
  out.precision(15);
  for (const auto& r : log) {
    out << r.id << ',' << r.parent << ',' << r.depth << ',' << r.state << ',' << r.upper.mean << ','
        << r.upper.std_error << ',' << r.lower.mean << ',' << r.incumbent << ',' << r.global_upper << ','
        << r.work_units << ',' << r.f_evals << ',' << r.seconds << '\n';
  }
}

nlohmann::json SearchReport::to_json() const {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) {
    cands.push_back({{"set", c.set.encode()}, {"net_value", c.net_value.mean}, {"std_error", c.net_value.std_error}});
  }
  return {{"status", pesp::to_string(status)},
          {"statistical", statistical},
          {"incumbent", incumbent.encode()},
          {"incumbent_value", incumbent_value},
          {"upper_bound", upper_bound},
          {"nodes", nodes},
          {"f_evals", f_evals},
          {"seconds", seconds},
          {"stop_reason", stop_reason},
          {"leaves", leaves.size()},
          {"candidates", cands}};
}

namespace {

struct Node {
  std::uint64_t id;
  std::int64_t parent;
  int depth;
  ProbeState state;
  IndexSet observable;
  NodeBounds bounds;
  double priority;
};

class Search {
 public:
  Search(const Instance& inst, FEvaluator& f_eval, const BnbOptions& options, WorkCounters& counters)
      : inst_(inst), f_eval_(f_eval), options_(options), counters_(counters), n_(inst.n_customers()),
        statistical_(f_eval.statistical()), rng_(options.seed, {0xB4A4C4ULL}) {}

  SearchReport run() {
    SearchReport report;
    report.statistical = statistical_;
    const ProbeMode mode = options_.branching == Branching::Multi ? ProbeMode::MultiElement : ProbeMode::SingleElement;
    push(make_node(ProbeState::root(mode), -1, 0));
    log_.back().global_upper = global_upper();
    report.status = SearchStatus::Optimal;
    while (!open_.empty()) {
      if (options_.budget.exhausted(counters_, clock_.seconds())) {
        report.status = SearchStatus::BudgetExhausted;
        report.stop_reason = "work budget";
        break;
      }
      const Node& top = nodes_[open_.top().second];
      if (!statistical_ && top.bounds.upper.mean <= incumbent_value_ + options_.fathom_tolerance) break;
      const std::size_t index = open_.top().second;
      pop();
      const Node parent = nodes_[index];
      if (parent.state.is_leaf(n_)) {
        terminal_.push_back(index);
        continue;
      }
      std::vector<std::size_t> children;
      const std::size_t first_record = log_.size();
      // Records of a branching step share the bound reached after the step.
      const auto stamp = [&] {
        for (std::size_t r = first_record; r < log_.size(); ++r) log_[r].global_upper = global_upper();
      };
      try {
        for (auto& child : branch(parent)) children.push_back(make_node(std::move(child), static_cast<std::int64_t>(parent.id), parent.depth + 1));
      } catch (const SizeLimitExceeded& e) {
        push(index);
        stamp();
        report.status = SearchStatus::BudgetExhausted;
        report.stop_reason = std::string("subproblem size limit: ") + e.what();
        break;
      }
      for (std::size_t c : children) {
        if (statistical_ || nodes_[c].bounds.upper.mean > incumbent_value_ + options_.fathom_tolerance) push(c);
      }
      stamp();
    }
    if (statistical_ && report.status != SearchStatus::BudgetExhausted) report.status = SearchStatus::TreeExhausted;

    report.incumbent = incumbent_;
    report.incumbent_value = incumbent_value_;
    if (statistical_) {
      std::vector<std::size_t> leaves = terminal_;
      while (!open_.empty()) {
        leaves.push_back(open_.top().second);
        open_.pop();
      }
      std::sort(leaves.begin(), leaves.end());
      for (std::size_t i : leaves) {
        const Node& node = nodes_[i];
        report.leaves.push_back({-node.state.cost_floor(inst_), f_cache_.at(node.observable.mask()).value});
      }
      report.upper_bound = global_stat_ub(report.leaves, options_.alpha);
    } else {
      report.upper_bound = report.status == SearchStatus::Optimal ? incumbent_value_ : global_upper();
    }
    for (const auto& [mask, value] : candidates_) report.candidates.push_back({IndexSet(mask), value});
    std::stable_sort(report.candidates.begin(), report.candidates.end(),
                     [](const SearchCandidate& a, const SearchCandidate& b) { return a.net_value.mean > b.net_value.mean; });
    report.nodes = nodes_.size();
    report.f_evals = f_evals_;
    report.seconds = clock_.seconds();
    report.log = std::move(log_);
    return report;
  }

 private:
  const FEvaluation& evaluate(IndexSet s) {
    auto it = f_cache_.find(s.mask());
    if (it != f_cache_.end()) return it->second;
    FEvaluation f = f_eval_.evaluate(s);
    ++f_evals_;
    return f_cache_.emplace(s.mask(), std::move(f)).first->second;
  }

  std::size_t make_node(ProbeState state, std::int64_t parent, int depth) {
    Node node{nodes_.size(), parent, depth, std::move(state), {}, {}, 0.0};
    node.observable = node.state.observable(n_);
    const FEvaluation& f = evaluate(node.observable);
    node.bounds = node_bounds(inst_, node.state, f.value);
    node.priority = node.bounds.upper.mean;
    if (statistical_) node.priority += options_.priority_z * node.bounds.upper.std_error;
    counters_.nodes.fetch_add(1, std::memory_order_relaxed);

    auto [it, fresh] = candidates_.emplace(node.observable.mask(), node.bounds.lower);
    (void)it;
    if (node.bounds.lower.mean > incumbent_value_ + options_.fathom_tolerance || nodes_.empty()) {
      incumbent_value_ = node.bounds.lower.mean;
      incumbent_ = node.observable;
    }
    nodes_.push_back(std::move(node));
    const Node& stored = nodes_.back();
    log_.push_back({stored.id, stored.parent, stored.depth, stored.state.encode(), stored.bounds.upper,
                    stored.bounds.lower, incumbent_value_, 0.0, counters_.work_units(), f_evals_,
                    clock_.seconds()});
    return nodes_.size() - 1;
  }

  std::vector<ProbeState> branch(const Node& node) {
    const FEvaluation& f = f_cache_.at(node.observable.mask());
    if (node.state.mode == ProbeMode::SingleElement) {
      const IndexSet cands = node.state.free_items(n_);
      int j;
      if (options_.branching == Branching::Random) {
        const auto items = cands.items();
        j = items[rng_.below(items.size())];
      } else {
        j = score_candidates(inst_, cands, node.state.required, f, options_.score).best;
      }
      auto [plus, minus] = branch_single(node.state, j);
      return {plus, minus};
    }
    if (!node.state.free_items(n_).empty()) {
      auto [none, some] = split_free(node.state, n_);
      return {none, some};
    }
    IndexSet t;
    for (IndexSet g : node.state.groups) {
      if (g.size() > t.size()) t = g;  // groups are ordered by first item
    }
    const auto scores = score_candidates(inst_, t, IndexSet{}, f, options_.score);
    std::vector<double> psi(static_cast<std::size_t>(n_), 0.0);
    for (std::size_t i = 0; i < scores.items.size(); ++i) psi[static_cast<std::size_t>(scores.items[i])] = scores.psi[i];
    const auto kids = branch_multi(node.state, t, partition_group(t, psi));
    return {kids.begin(), kids.end()};
  }

  void push(std::size_t index) {
    open_.emplace(std::make_pair(nodes_[index].priority, -static_cast<std::int64_t>(index)), index);
    open_bounds_.insert(nodes_[index].bounds.upper.mean);
  }

  void pop() {
    const Node& node = nodes_[open_.top().second];
    open_bounds_.erase(open_bounds_.find(node.bounds.upper.mean));
    open_.pop();
  }

  double global_upper() const {
    return open_bounds_.empty() ? incumbent_value_ : std::max(incumbent_value_, *open_bounds_.rbegin());
  }

  using Key = std::pair<std::pair<double, std::int64_t>, std::size_t>;

  const Instance& inst_;
  FEvaluator& f_eval_;
  const BnbOptions& options_;
  WorkCounters& counters_;
  int n_;
  bool statistical_;
  CounterRng rng_;
  Stopwatch clock_;
  std::deque<Node> nodes_;
  std::priority_queue<Key> open_;  // highest priority, then lowest index
  std::multiset<double> open_bounds_;
  std::vector<std::size_t> terminal_;
  std::map<std::uint64_t, FEvaluation> f_cache_;
  std::map<std::uint64_t, BoundEstimate> candidates_;
  std::vector<NodeRecord> log_;
  std::uint64_t f_evals_ = 0;
  IndexSet incumbent_;
  double incumbent_value_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

SearchReport run_bnb(const Instance& inst, FEvaluator& f_eval, const BnbOptions& options, WorkCounters& counters) {
  return Search(inst, f_eval, options, counters).run();
}

}  // namespace pesp
