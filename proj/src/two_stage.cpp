#include "pesp/two_stage.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <unordered_map>

#include <fmt/format.h>
#include <unistd.h>

#include "pesp/errors.hpp"

namespace pesp {

std::string to_string(Backend b) { return b == Backend::Exhaustive ? "exhaustive" : "external_mip"; }

Backend parse_backend(const std::string& s) {
  if (s == "exhaustive") return Backend::Exhaustive;
  if (s == "external_mip" || s == "external") return Backend::ExternalMip;
  throw InvalidArgument("unknown backend: " + s);
}

namespace {

constexpr double kPruneTol = 1e-9;

// Identical scenarios merged, sorted lexicographically.
std::vector<Scenario> canonical_scenarios(std::span<const Scenario> scenarios) {
  if (scenarios.empty()) throw InvalidArgument("two-stage solve needs at least one scenario");
  std::vector<const Scenario*> order;
  order.reserve(scenarios.size());
  for (const auto& s : scenarios) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const Scenario* a, const Scenario* b) {
    if (a->demand != b->demand) return a->demand < b->demand;
    return a->weight < b->weight;
  });
  std::vector<Scenario> out;
  for (const Scenario* s : order) {
    if (!out.empty() && out.back().demand == s->demand) {
      out.back().weight += s->weight;
    } else {
      out.push_back(*s);
    }
  }
  return out;
}

// Branch-and-bound over facility configuration vectors and then customer
// assignments. The bound relaxes the single-assignment constraints with
// multipliers; each open facility then fills its remaining capacity
// scenario by scenario, with assignment costs spread over the scenarios in
// proportion to demand.
struct NodeCapReached {};

class ExhaustiveSolver {
 public:
  ExhaustiveSolver(const Instance& inst, const std::vector<Scenario>& scenarios, std::uint64_t node_cap,
                   bool incumbent_on_cap)
      : inst_(inst), node_cap_(node_cap), incumbent_on_cap_(incumbent_on_cap), r_(inst.revenue_rate), nf_(inst.n_facilities()),
        scenarios_(static_cast<int>(scenarios.size())) {
    for (const auto& s : scenarios) {
      weight_.push_back(s.weight);
      price_cap_.push_back(s.weight * r_);
    }
    std::vector<int> active;
    std::vector<double> mean;
    for (int j = 0; j < inst.n_customers(); ++j) {
      double m = 0.0;
      for (int k = 0; k < scenarios_; ++k) {
        m += weight_[static_cast<std::size_t>(k)] * scenarios[static_cast<std::size_t>(k)].demand[static_cast<std::size_t>(j)];
      }
      if (m > 0.0) {
        active.push_back(j);
        mean.push_back(m);
      }
    }
    nj_ = static_cast<int>(active.size());
    // Branch on customers with large expected demand first.
    std::vector<int> rank(active.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) {
      return mean[static_cast<std::size_t>(a)] > mean[static_cast<std::size_t>(b)];
    });
    for (int a : rank) {
      customers_.push_back(active[static_cast<std::size_t>(a)]);
      mean_.push_back(mean[static_cast<std::size_t>(a)]);
    }
    demand_.resize(static_cast<std::size_t>(nj_ * scenarios_));
    for (int p = 0; p < nj_; ++p) {
      for (int k = 0; k < scenarios_; ++k) {
        demand_[idx(p, k)] = scenarios[static_cast<std::size_t>(k)].demand[static_cast<std::size_t>(customers_[static_cast<std::size_t>(p)])];
      }
    }
  }

  TwoStageResult solve() {
    struct Vector {
      std::vector<int> config;
      double open_cost;
      double bound;
    };
    std::uint64_t count = 1;
    for (const auto& f : inst_.facilities) {
      count *= f.configs.size() + 1;
      if (count > kMaxConfigVectors) throw SizeLimitExceeded("too many facility configuration vectors");
    }
    // Per (facility, configuration): revenue of each customer alone.
    std::vector<std::vector<std::vector<double>>> single(static_cast<std::size_t>(nf_));
    for (int i = 0; i < nf_; ++i) {
      const auto& f = inst_.facilities[static_cast<std::size_t>(i)];
      for (const auto& cfg : f.configs) {
        std::vector<double> g(static_cast<std::size_t>(nj_), 0.0);
        for (int p = 0; p < nj_; ++p) {
          double rev = 0.0;
          for (int k = 0; k < scenarios_; ++k) {
            rev += weight_[static_cast<std::size_t>(k)] * std::min(cfg.capacity, demand_[idx(p, k)]);
          }
          g[static_cast<std::size_t>(p)] = r_ * rev;
        }
        single[static_cast<std::size_t>(i)].push_back(std::move(g));
      }
    }

    std::vector<Vector> vectors;
    std::vector<int> cfg(static_cast<std::size_t>(nf_), kClosed);
    for (std::uint64_t v = 1; v < count; ++v) {
      std::uint64_t rest = v;
      double open = 0.0;
      for (int i = 0; i < nf_; ++i) {
        const auto& f = inst_.facilities[static_cast<std::size_t>(i)];
        const auto choices = f.configs.size() + 1;
        const int c = static_cast<int>(rest % choices) - 1;
        rest /= choices;
        cfg[static_cast<std::size_t>(i)] = c;
        if (c != kClosed) {
          open += f.configs[static_cast<std::size_t>(c)].open_cost;
        }
      }
      double per_customer = 0.0;
      for (int p = 0; p < nj_; ++p) {
        double best = 0.0;
        for (int i = 0; i < nf_; ++i) {
          const int c = cfg[static_cast<std::size_t>(i)];
          if (c == kClosed) continue;
          best = std::max(best, single[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] - cost(p, i));
        }
        per_customer += best;
      }
      const double bound = per_customer - open;
      if (bound > kPruneTol) vectors.push_back({cfg, open, bound});
    }
    std::stable_sort(vectors.begin(), vectors.end(),
                     [](const Vector& a, const Vector& b) { return a.bound > b.bound; });

    best_total_ = 0.0;
    best_ = FirstStageSolution::all_closed(inst_);
    // Greedy dives on the most promising vectors give an early incumbent.
    const std::size_t dives = std::min<std::size_t>(vectors.size(), 32);
    for (std::size_t v = 0; v < dives; ++v) {
      set_open(vectors[v].config, vectors[v].open_cost);
      greedy();
    }
    bool capped = false;
    try {
      for (const auto& v : vectors) {
        if (v.bound <= best_total_ + kPruneTol) break;
        set_open(v.config, v.open_cost);
        best_assign_ = best_total_ + v.open_cost;
        dfs(0, 0.0);
      }
    } catch (const NodeCapReached&) {
      if (!incumbent_on_cap_) {
        throw SizeLimitExceeded(fmt::format("exhaustive two-stage search exceeded {} nodes", node_cap_));
      }
      capped = true;
    }
    TwoStageResult result;
    result.proven_optimal = !capped;
    result.solution = best_;
    result.nodes = nodes_;
    return result;
  }

 private:
  // The configuration vectors are held in memory; the node cap governs only the tree.
  static constexpr std::uint64_t kMaxConfigVectors = std::uint64_t{1} << 22;
  static constexpr int kRootIterations = 30;
  static constexpr int kNodeIterations = 4;

  std::size_t idx(int p, int k) const { return static_cast<std::size_t>(p * scenarios_ + k); }
  double cost(int p, int i) const {
    return inst_.customers[static_cast<std::size_t>(customers_[static_cast<std::size_t>(p)])]
        .assign_costs[static_cast<std::size_t>(i)];
  }
  int n_open() const { return static_cast<int>(open_.size()); }
  double* rem(int depth, int ii) {
    return &remaining_[static_cast<std::size_t>((depth * n_open() + ii) * scenarios_)];
  }
  double& marginal(int p, int ii) { return marginal_[static_cast<std::size_t>(p * n_open() + ii)]; }

  void set_open(const std::vector<int>& cfg, double open_cost) {
    config_ = cfg;
    open_cost_ = open_cost;
    open_.clear();
    for (int i = 0; i < nf_; ++i) {
      if (cfg[static_cast<std::size_t>(i)] != kClosed) open_.push_back(i);
    }
    const int no = n_open();
    remaining_.assign(static_cast<std::size_t>((nj_ + 1) * no * scenarios_), 0.0);
    for (int ii = 0; ii < no; ++ii) {
      const int i = open_[static_cast<std::size_t>(ii)];
      const double cap = inst_.facilities[static_cast<std::size_t>(i)].configs[static_cast<std::size_t>(cfg[static_cast<std::size_t>(i)])].capacity;
      std::fill_n(rem(0, ii), scenarios_, cap);
    }
    marginal_.assign(static_cast<std::size_t>(nj_ * std::max(no, 1)), 0.0);
    mu_.resize(static_cast<std::size_t>(no * scenarios_));
    for (std::size_t c = 0; c < mu_.size(); ++c) mu_[c] = price_cap_[c % static_cast<std::size_t>(scenarios_)];
    assign_.assign(static_cast<std::size_t>(nj_), kUnassigned);
  }

  void compute_marginals(int depth) {
    const int no = n_open();
    for (int p = depth; p < nj_; ++p) {
      const double* d = &demand_[idx(p, 0)];
      for (int ii = 0; ii < no; ++ii) {
        const double* left = rem(depth, ii);
        double revenue = 0.0;
        for (int k = 0; k < scenarios_; ++k) revenue += weight_[static_cast<std::size_t>(k)] * std::min(d[k], left[k]);
        marginal(p, ii) = r_ * revenue - cost(p, open_[static_cast<std::size_t>(ii)]);
      }
    }
  }

  // Upper bound on what customers depth.. can add at the loads of `depth`,
  // stopping early once it drops to `target`. Needs compute_marginals(depth).
  //
  // Dual of the LP relaxation for fixed loads: any price mu[i][k] in
  // [0, w_k r] on the remaining capacity of facility i in scenario k gives
  //   sum_ik (w_k r - mu_ik) rem_ik + sum_p max(0, max_i sum_k mu_ik min(d_pk, rem_ik) - a_pi).
  // mu = w r is the per-customer bound. Prices persist between nodes so
  // each node refines its parent's.
  double node_bound(int depth, double target, int iterations) {
    const int no = n_open();
    double per_customer = 0.0;
    for (int p = depth; p < nj_; ++p) {
      double best = 0.0;
      for (int ii = 0; ii < no; ++ii) best = std::max(best, marginal(p, ii));
      per_customer += best;
    }
    if (per_customer <= target || per_customer <= 0.0) return per_customer;

    double best = per_customer;
    double scale = 1.0;
    int stalled = 0;
    const std::size_t cells = static_cast<std::size_t>(no * scenarios_);
    subgradient_.resize(cells);
    for (int it = 0; it < iterations; ++it) {
      double value = 0.0;
      for (int ii = 0; ii < no; ++ii) {
        const double* left = rem(depth, ii);
        for (int k = 0; k < scenarios_; ++k) {
          const std::size_t c = static_cast<std::size_t>(ii * scenarios_ + k);
          value += (price_cap_[static_cast<std::size_t>(k)] - mu_[c]) * left[k];
          subgradient_[c] = -left[k];
        }
      }
      for (int p = depth; p < nj_; ++p) {
        const double* d = &demand_[idx(p, 0)];
        double gain = 0.0;
        int arg = -1;
        for (int ii = 0; ii < no; ++ii) {
          const double* left = rem(depth, ii);
          const double* m = &mu_[static_cast<std::size_t>(ii * scenarios_)];
          double g = -cost(p, open_[static_cast<std::size_t>(ii)]);
          for (int k = 0; k < scenarios_; ++k) g += m[k] * std::min(d[k], left[k]);
          if (g > gain) {
            gain = g;
            arg = ii;
          }
        }
        if (arg < 0) continue;
        value += gain;
        const double* left = rem(depth, arg);
        double* s = &subgradient_[static_cast<std::size_t>(arg * scenarios_)];
        for (int k = 0; k < scenarios_; ++k) s[k] += std::min(d[k], left[k]);
      }
      if (value < best - 1e-12) {
        best = value;
        stalled = 0;
      } else if (++stalled >= 3) {
        scale *= 0.5;
        stalled = 0;
      }
      if (best <= target) break;
      double norm = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        const double cap = price_cap_[c % static_cast<std::size_t>(scenarios_)];
        const double s = subgradient_[c];
        // Components pinned at a box face by the step contribute nothing.
        if ((s > 0.0 && mu_[c] <= 0.0) || (s < 0.0 && mu_[c] >= cap)) continue;
        norm += s * s;
      }
      if (norm <= 1e-18) break;
      const double step = scale * (value - std::max(target, 0.0)) / norm;
      for (std::size_t c = 0; c < cells; ++c) {
        const double cap = price_cap_[c % static_cast<std::size_t>(scenarios_)];
        mu_[c] = std::clamp(mu_[c] - step * subgradient_[c], 0.0, cap);
      }
    }
    return best;
  }

  void record(double value) {
    best_assign_ = value;
    best_total_ = value - open_cost_;
    best_ = FirstStageSolution::all_closed(inst_);
    best_.config = config_;
    std::vector<bool> used(static_cast<std::size_t>(nf_), false);
    for (int p = 0; p < nj_; ++p) {
      const int ii = assign_[static_cast<std::size_t>(p)];
      if (ii == kUnassigned) continue;
      const int i = open_[static_cast<std::size_t>(ii)];
      best_.assignment[static_cast<std::size_t>(customers_[static_cast<std::size_t>(p)])] = i;
      used[static_cast<std::size_t>(i)] = true;
    }
    // Facilities left without customers only cost money.
    for (int i = 0; i < nf_; ++i) {
      if (!used[static_cast<std::size_t>(i)]) best_.config[static_cast<std::size_t>(i)] = kClosed;
    }
  }

  void descend(int depth, int p, int ii) {
    const int no = n_open();
    for (int o = 0; o < no; ++o) std::copy_n(rem(depth, o), scenarios_, rem(depth + 1, o));
    if (ii == kUnassigned) return;
    const double* d = &demand_[idx(p, 0)];
    double* left = rem(depth + 1, ii);
    for (int k = 0; k < scenarios_; ++k) left[k] = std::max(0.0, left[k] - d[k]);
  }

  void greedy() {
    double value = 0.0;
    for (int p = 0; p < nj_; ++p) {
      compute_marginals(p);
      int pick = kUnassigned;
      double gain = 0.0;
      for (int ii = 0; ii < n_open(); ++ii) {
        if (marginal(p, ii) > gain) {
          gain = marginal(p, ii);
          pick = ii;
        }
      }
      assign_[static_cast<std::size_t>(p)] = pick;
      value += gain;
      descend(p, p, pick);
    }
    if (value - open_cost_ > best_total_ + kPruneTol) record(value);
    std::fill(assign_.begin(), assign_.end(), kUnassigned);
  }

  void dfs(int depth, double value) {
    if (++nodes_ > node_cap_) throw NodeCapReached{};
    if (depth == nj_) {
      if (value > best_assign_ + kPruneTol) record(value);
      return;
    }
    compute_marginals(depth);
    const double bound = node_bound(depth, best_assign_ - value, depth == 0 ? kRootIterations : kNodeIterations);
    if (value + bound <= best_assign_ + kPruneTol) return;
    if (bound <= 0.0) {
      // Nothing left adds value: the remaining customers stay unassigned.
      if (value > best_assign_ + kPruneTol) record(value);
      return;
    }
    const int no = n_open();
    std::vector<std::pair<double, int>> choices;
    choices.reserve(static_cast<std::size_t>(no));
    for (int ii = 0; ii < no; ++ii) {
      // Loads only grow below this node, so a non-positive marginal never pays.
      if (marginal(depth, ii) > 0.0) choices.emplace_back(marginal(depth, ii), ii);
    }
    std::stable_sort(choices.begin(), choices.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [m, ii] : choices) {
      descend(depth, depth, ii);
      assign_[static_cast<std::size_t>(depth)] = ii;
      dfs(depth + 1, value + m);
      assign_[static_cast<std::size_t>(depth)] = kUnassigned;
    }
    descend(depth, depth, kUnassigned);
    dfs(depth + 1, value);
  }

  const Instance& inst_;
  std::uint64_t node_cap_;
  bool incumbent_on_cap_;
  double r_;
  int nf_;
  int scenarios_;
  int nj_ = 0;
  std::vector<double> weight_;
  std::vector<int> customers_;  // original index of each branching position
  std::vector<double> mean_;    // weighted demand sum per position
  std::vector<double> demand_;  // position-major

  std::vector<int> config_;
  std::vector<int> open_;
  std::vector<double> remaining_;
  std::vector<double> marginal_;
  std::vector<double> price_cap_;  // w_k r
  std::vector<double> mu_;
  std::vector<double> subgradient_;
  std::vector<int> assign_;  // open-facility slot per position
  double open_cost_ = 0.0;

  double best_total_ = 0.0;
  double best_assign_ = 0.0;
  FirstStageSolution best_;
  std::uint64_t nodes_ = 0;
};

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  for (std::size_t pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
  return text;
}

std::string solver_command(const SolverConfig& config) {
  if (!config.command.empty()) return config.command;
  const char* env = std::getenv("PESP_SOLVER_CMD");
  return env == nullptr ? std::string() : std::string(env);
}

TwoStageResult solve_external(const Instance& inst, const std::vector<Scenario>& scenarios,
                              const SolverConfig& config) {
  const std::string command = solver_command(config);
  if (command.empty()) {
    throw BackendUnavailable("no external MIP solver configured (set solver.command or PESP_SOLVER_CMD)");
  }
  static std::atomic<std::uint64_t> serial{0};
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       fmt::format("pesp_{}_{}", static_cast<long>(::getpid()), serial.fetch_add(1));
  fs::create_directories(dir);
  const fs::path mps = dir / "model.mps";
  const fs::path sol = dir / "model.sol";
  const MipModel model = emit_extensive_form(inst, scenarios);
  write_mps(model, mps.string());

  std::string cmd = substitute(substitute(command, "{mps}", mps.string()), "{sol}", sol.string());
  cmd += " 2>&1";
  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw SolverFailure("cannot start external solver", cmd);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) output += buf.data();
  const int status = ::pclose(pipe);
  auto cleanup = [&] {
    if (!config.keep_files) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  };
  if (status != 0) {
    cleanup();
    throw SolverFailure(fmt::format("external solver exited with status {}", status), output);
  }
  std::ifstream in(sol);
  if (!in) {
    cleanup();
    throw SolverFailure("external solver wrote no solution file", output);
  }
  const std::regex line_re(config.solution_regex);
  std::vector<double> values(model.variables().size(), 0.0);
  std::string line;
  std::smatch match;
  while (std::getline(in, line)) {
    if (!std::regex_search(line, match, line_re) || match.size() < 3) continue;
    const int v = model.find_variable(match[1].str());
    if (v >= 0) values[static_cast<std::size_t>(v)] = std::strtod(match[2].str().c_str(), nullptr);
  }
  in.close();
  cleanup();
  for (std::size_t v = 0; v < values.size(); ++v) {
    const auto& var = model.variables()[v];
    if (var.integer && std::abs(values[v] - std::round(values[v])) > config.tolerance) {
      throw SolverFailure(fmt::format("variable {} is fractional ({})", var.name, values[v]), output);
    }
  }
  TwoStageResult result;
  result.solution = solution_from_values(inst, model, values);
  try {
    check_feasible(inst, result.solution);
  } catch (const InfeasibleFirstStage& e) {
    throw SolverFailure(std::string("external solution infeasible: ") + e.what(), output);
  }
  return result;
}

}  // namespace

bool external_solver_configured(const SolverConfig& config) { return !solver_command(config).empty(); }

TwoStageResult solve_two_stage(const Instance& inst, std::span<const Scenario> scenarios,
                               const SolverConfig& config, WorkCounters* counters) {
  const std::vector<Scenario> canonical = canonical_scenarios(scenarios);
  TwoStageResult result;
  if (config.backend == Backend::Exhaustive) {
    result = ExhaustiveSolver(inst, canonical, config.node_cap, config.incumbent_on_cap).solve();
  } else {
    result = solve_external(inst, canonical, config);
  }
  result.backend = config.backend;
  result.scenario_count = scenarios.size();
  result.value = expected_value(inst, result.solution, canonical);
  if (counters != nullptr) counters->add_solve(scenarios.size());
  return result;
}

}  // namespace pesp
