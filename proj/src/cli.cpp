#include "pesp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "json.hpp"

#include "pesp/bnb.hpp"
#include "pesp/errors.hpp"
#include "pesp/heuristic.hpp"
#include "pesp/mipgen.hpp"
#include "pesp/sampling.hpp"

namespace pesp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kFormatVersion = 1;

struct Common {
  std::string instance;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out_dir;
  std::string backend = "exhaustive";
  std::string solver_cmd;
  std::uint64_t node_cap = 10'000'000;
  std::uint64_t max_work = kNoLimit;
  std::uint64_t max_nodes = kNoLimit;
  std::uint64_t max_f_evals = kNoLimit;
  double max_seconds = std::numeric_limits<double>::infinity();

  SolverConfig solver() const {
    SolverConfig c;
    c.backend = parse_backend(backend);
    c.node_cap = node_cap;
    c.command = solver_cmd;
    return c;
  }
  WorkBudget budget() const { return {max_work, max_nodes, max_f_evals, max_seconds}; }
};

struct GenerateOpts {
  int facilities = 3;
  int configs = 2;
  int customers = 10;
  std::string kind = "bernoulli";
  GeneratorOptions ranges;
  std::string output;
};

struct SearchOpts {
  std::string branching = "single";
  std::string score = "auto";
};

struct SaaOpts {
  int sample_size = 50;
  int replications = 30;
  std::string sampling = "lhs";
  double alpha = 0.05;
  std::size_t memo_capacity = SolveMemo::kDefaultCapacity;
};

struct InternalOpts {
  InternalSpec spec;
  std::string sampling = "lhs";
  double alpha = 0.05;
  double priority_z = 2.0;
  int lb_top = 0;
};

struct LowerOpts {
  LowerBoundSpec spec;
  std::string sampling = "lhs";
};

struct HeuristicOpts {
  HeuristicSpec spec;
  std::string sampling = "lhs";
  int top = 10;
};

struct EvaluateOpts {
  std::string set;
  bool exact = false;
};

struct EmitOpts {
  std::string mps;
  std::string metadata;
  std::size_t max_outcomes = NaMipOptions{}.max_outcomes;
  std::size_t max_linking_rows = NaMipOptions{}.max_linking_rows;
};

IndexSet parse_set(const std::string& text, int n) {
  IndexSet s;
  if (text.empty() || text == "-") return s;
  if (text == "all") return IndexSet::full(n);
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    std::size_t used = 0;
    int j = -1;
    try {
      j = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || j < 0 || j >= n) throw InvalidArgument("bad item '" + item + "' in set '" + text + "'");
    s.insert(j);
  }
  return s;
}

json estimate_json(const BoundEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"batches", e.batches},
          {"mode", e.mode == EstimateMode::Exact ? "exact" : "statistical"}};
}

// Every option of a subcommand, as given or defaulted.
json echo_options(const CLI::App& app) {
  json out = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_expected_max() == 0) {
        out[name] = true;
      } else {
        out[name] = r.size() == 1 ? json(r.front()) : json(r);
      }
    } else {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

class Report {
 public:
  Report(std::string command, std::vector<std::string> argv, const Common& common)
      : command_(std::move(command)), argv_(std::move(argv)), common_(common) {
    if (!common_.out_dir.empty()) fs::create_directories(common_.out_dir);
  }

  std::string path(const std::string& file) const {
    return common_.out_dir.empty() ? std::string() : (fs::path(common_.out_dir) / file).string();
  }

  // Writes a CSV file under out-dir (skipped without one) and lists it.
  template <typename Writer>
  void csv(const std::string& key, const std::string& file, Writer&& write) {
    const std::string p = path(file);
    if (p.empty()) return;
    std::ofstream out(p);
    if (!out) throw InvalidArgument("cannot write " + p);
    write(out);
    files_[key] = p;
  }

  void add_file(const std::string& key, const std::string& p) { files_[key] = p; }

  int finish(std::ostream& out, json config, json instance, json result, const WorkCounters& counters,
             double seconds, bool budget_limited) {
    const int code = budget_limited ? kExitBudgetLimited : kExitOk;
    json summary = {{"tool", "pesp"},
                    {"format_version", kFormatVersion},
                    {"command", command_},
                    {"argv", argv_},
                    {"seed", common_.seed ? json(*common_.seed) : json(nullptr)},
                    {"workers", common_.workers},
                    {"config", std::move(config)},
                    {"instance", std::move(instance)},
                    {"status", budget_limited ? "budget_limited" : "ok"},
                    {"exit_code", code},
                    {"result", std::move(result)},
                    {"counters", counters.to_json()},
                    {"timing", {{"seconds", seconds}}},
                    {"files", files_}};
    const std::string text = summary.dump(2);
    if (const std::string p = path("summary.json"); !p.empty()) {
      std::ofstream f(p);
      if (!f) throw InvalidArgument("cannot write " + p);
      f << text << '\n';
    }
    out << text << '\n';
    return code;
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  const Common& common_;
  std::map<std::string, std::string> files_;
};

json instance_json(const Instance& inst, const std::string& path) {
  return {{"path", path},
          {"name", inst.name},
          {"customers", inst.n_customers()},
          {"facilities", inst.n_facilities()},
          {"bernoulli", inst.all_bernoulli()}};
}

std::uint64_t need_seed(const Common& c, const std::string& why) {
  if (!c.seed) throw InvalidArgument("--seed is required for " + why);
  return *c.seed;
}

void add_common(CLI::App* app, Common& c, bool instance, bool solver) {
  if (instance) app->add_option("-i,--instance", c.instance, "Instance JSON file")->required();
  app->add_option("--seed", c.seed, "Master seed (required by every randomized command)");
  app->add_option("--workers", c.workers, "Worker threads; 1 is deterministic")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("-o,--out-dir", c.out_dir, "Directory for summary.json and CSV reports");
  if (!solver) return;
  app->add_option("--backend", c.backend, "Two-stage backend: exhaustive or external")->capture_default_str();
  app->add_option("--solver-cmd", c.solver_cmd, "External MIP command template with {mps} and {sol}; default PESP_SOLVER_CMD");
  app->add_option("--node-cap", c.node_cap, "Node cap of the exhaustive two-stage search")->capture_default_str();
  app->add_option("--max-work", c.max_work, "Work-unit budget");
  app->add_option("--max-nodes", c.max_nodes, "Search node budget");
  app->add_option("--max-f-evals", c.max_f_evals, "F evaluation budget");
  app->add_option("--max-seconds", c.max_seconds, "Wall-clock budget");
}

void add_search(CLI::App* app, SearchOpts& s) {
  app->add_option("--branching", s.branching, "random, single or multi")->capture_default_str();
  app->add_option("--score", s.score, "Branching score: auto, difference or covariance")->capture_default_str();
}

void add_lower(CLI::App* app, LowerOpts& l, const std::string& prefix) {
  app->add_option("--" + prefix + "outer", l.spec.outer, "Outer draws of the lower bound")->capture_default_str();
  app->add_option("--" + prefix + "inner", l.spec.inner, "Pricing scenarios per draw")->capture_default_str();
  app->add_option("--" + prefix + "selection", l.spec.selection, "Selection scenarios per draw")->capture_default_str();
  app->add_option("--" + prefix + "sampling", l.sampling, "lhs or mc for the conditional samples")->capture_default_str();
  app->add_option("--" + prefix + "alpha", l.spec.alpha, "One-sided confidence level")->capture_default_str();
}

LowerBoundSpec lower_spec(const LowerOpts& l) {
  LowerBoundSpec s = l.spec;
  s.inner_mode = parse_sampling_mode(l.sampling);
  s.validate();
  return s;
}

BnbOptions search_options(const SearchOpts& s, const Common& c) {
  BnbOptions o;
  o.branching = parse_branching(s.branching);
  o.score = parse_score_rule(s.score);
  o.budget = c.budget();
  o.seed = c.seed.value_or(0);
  return o;
}

json search_json(const SearchReport& r) {
  json j = r.to_json();
  j.erase("seconds");
  j.erase("candidates");
  return j;
}

void write_candidates(std::ostream& out, const SearchReport& r) {
  out << "set,net_mean,net_std_error\n";
  out.precision(15);
  for (const auto& c : r.candidates) out << c.set.encode() << ',' << c.net_value.mean << ',' << c.net_value.std_error << '\n';
}

int cmd_generate(const Common& c, const GenerateOpts& g, const json& config, Report& report, std::ostream& out) {
  const std::uint64_t seed = need_seed(c, "generate");
  const Instance inst =
      generate_instance(g.facilities, g.configs, g.customers, parse_distribution_kind(g.kind), seed, g.ranges);
  std::string path = g.output;
  if (path.empty()) path = report.path(inst.name + ".json");
  if (path.empty()) throw InvalidArgument("generate needs --output or --out-dir");
  save_instance(inst, path);
  report.add_file("instance", path);
  WorkCounters none;
  return report.finish(out, config, instance_json(inst, path), {{"kind", to_string(parse_distribution_kind(g.kind))}}, none,
                       0.0, false);
}

int cmd_solve_exact(const Common& c, const SearchOpts& s, const json& config, Report& report, std::ostream& out) {
  const Instance inst = load_instance(c.instance);
  if (s.branching == "random") need_seed(c, "random branching");
  WorkCounters counters;
  Stopwatch clock;
  ExactEvaluator eval(inst, c.solver(), &counters, c.workers);
  const SearchReport r = run_bnb(inst, eval, search_options(s, c), counters);
  const bool optimal = r.status == SearchStatus::Optimal;
  json result = search_json(r);
  result["z_pesp"] = optimal ? json(r.incumbent_value) : json(nullptr);
  result["optimal_set"] = optimal ? json(r.incumbent.encode()) : json(nullptr);
  report.csv("nodes", "nodes.csv", [&](std::ostream& f) { r.write_log_csv(f); });
  report.csv("candidates", "candidates.csv", [&](std::ostream& f) { write_candidates(f, r); });
  return report.finish(out, config, instance_json(inst, c.instance), result, counters, clock.seconds(), !optimal);
}

int cmd_solve_saa(const Common& c, const SearchOpts& s, const SaaOpts& a, const json& config, Report& report,
                  std::ostream& out) {
  const std::uint64_t seed = need_seed(c, "solve-saa");
  const Instance inst = load_instance(c.instance);
  const BnbOptions options = search_options(s, c);
  const SolverConfig solver = c.solver();
  WorkCounters total;
  std::vector<std::string> sets(static_cast<std::size_t>(std::max(a.replications, 0)));
  Stopwatch clock;
  const auto solve = [&](const std::vector<Scenario>& sample, std::uint64_t rep, WorkCounters& counters) {
    SaaEvaluator eval(inst, sample, solver, a.memo_capacity, &counters, 1);
    const SearchReport r = run_bnb(inst, eval, options, counters);
    sets[rep] = r.incumbent.encode();
    const bool limited = r.status != SearchStatus::Optimal;
    total.subproblem_solves += counters.subproblem_solves.load();
    total.subproblem_units += counters.subproblem_units.load();
    total.recourse_evals += counters.recourse_evals.load();
    total.nodes += counters.nodes.load();
    total.f_evals += counters.f_evals.load();
    total.memo_lookups += counters.memo_lookups.load();
    total.memo_hits += counters.memo_hits.load();
    return ReplicationOutcome{limited ? r.upper_bound : r.incumbent_value, limited};
  };
  const ReplicationSummary sum = saa_replicate(inst, a.sample_size, a.replications, parse_sampling_mode(a.sampling),
                                               solve, seed, c.workers, a.alpha);
  std::size_t limited = 0;
  for (bool b : sum.budget_limited) limited += b ? 1 : 0;
  json result = {{"upsilon", sum.mean},
                 {"stddev", sum.stddev},
                 {"ci_upper", sum.ci_upper},
                 {"alpha", sum.alpha},
                 {"sample_size", sum.sample_size},
                 {"replications", sum.values.size()},
                 {"budget_limited_replications", limited},
                 {"memo_hit_rate", total.hit_rate()},
                 {"optimal_sets", sets}};
  report.csv("replications", "replications.csv", [&](std::ostream& f) { sum.write_csv(f); });
  return report.finish(out, config, instance_json(inst, c.instance), result, total, clock.seconds(), limited > 0);
}

int cmd_solve_internal(const Common& c, const SearchOpts& s, InternalOpts in, const LowerOpts& lo, const json& config,
                       Report& report, std::ostream& out) {
  const std::uint64_t seed = need_seed(c, "solve-internal");
  const Instance inst = load_instance(c.instance);
  in.spec.mode = parse_sampling_mode(in.sampling);
  WorkCounters counters;
  Stopwatch clock;
  InternalEvaluator eval(inst, in.spec, c.solver(), derive_stream(seed, {0x1A7E}), &counters, c.workers);
  BnbOptions options = search_options(s, c);
  options.alpha = in.alpha;
  options.priority_z = in.priority_z;
  const SearchReport r = run_bnb(inst, eval, options, counters);
  json result = search_json(r);
  result["global_ub"] = r.upper_bound;
  result["alpha"] = in.alpha;
  result["perfect_information_ub"] = estimate_json(r.log.front().upper);
  result["root_set"] = IndexSet::full(inst.n_customers()).encode();

  std::vector<std::pair<SearchCandidate, StatLowerBound>> lbs;
  if (in.lb_top > 0) {
    const LowerBoundSpec spec = lower_spec(lo);
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(in.lb_top), r.candidates.size());
    for (std::size_t k = 0; k < top; ++k) {
      const auto& cand = r.candidates[k];
      lbs.emplace_back(cand, stat_lb(inst, cand.set, spec, c.solver(), derive_stream(seed, {0x10B0, cand.set.mask()}),
                                     &counters, c.workers));
    }
    json list = json::array();
    std::size_t best = 0;
    for (std::size_t k = 0; k < lbs.size(); ++k) {
      const double cost = alpha(inst, lbs[k].first.set);
      list.push_back({{"set", lbs[k].first.set.encode()},
                      {"net_mean", lbs[k].second.estimate.mean - cost},
                      {"std_error", lbs[k].second.estimate.std_error},
                      {"net_ci_lower", lbs[k].second.ci_lower - cost}});
      if (lbs[k].second.ci_lower - cost > lbs[best].second.ci_lower - alpha(inst, lbs[best].first.set)) best = k;
    }
    result["lower_bounds"] = list;
    if (!lbs.empty()) result["best_lower_bound"] = list[best];
  }
  report.csv("nodes", "nodes.csv", [&](std::ostream& f) { r.write_log_csv(f); });
  report.csv("candidates", "candidates.csv", [&](std::ostream& f) { write_candidates(f, r); });
  report.csv("leaves", "leaves.csv", [&](std::ostream& f) {
    f << "offset,mean,std_error\n";
    f.precision(15);
    for (const auto& l : r.leaves) f << l.offset << ',' << l.estimate.mean << ',' << l.estimate.std_error << '\n';
  });
  return report.finish(out, config, instance_json(inst, c.instance), result, counters, clock.seconds(),
                       r.status == SearchStatus::BudgetExhausted);
}

int cmd_heuristic(const Common& c, HeuristicOpts h, const LowerOpts& lo, const json& config, Report& report,
                  std::ostream& out) {
  const std::uint64_t seed = need_seed(c, "heuristic");
  const Instance inst = load_instance(c.instance);
  h.spec.mode = parse_sampling_mode(h.sampling);
  WorkCounters counters;
  Stopwatch clock;
  const CandidatePool pool = greedy_run(inst, h.spec, derive_stream(seed, {0x6EE}), c.solver(), &counters, c.workers);
  const auto finals = finalize_candidates(inst, pool, h.top, lower_spec(lo), seed, c.solver(), &counters, c.workers);
  json result = {{"pool_size", pool.entries.size()},
                 {"best_set", finals.front().set.encode()},
                 {"net_mean", finals.front().net_mean},
                 {"net_std_error", finals.front().net_std_error},
                 {"net_ci_lower", finals.front().net_ci_lower}};
  report.csv("pool", "pool.csv", [&](std::ostream& f) { pool.write_csv(f); });
  report.csv("final", "final.csv", [&](std::ostream& f) { write_final_csv(f, finals); });
  return report.finish(out, config, instance_json(inst, c.instance), result, counters, clock.seconds(), false);
}

int cmd_evaluate(const Common& c, const EvaluateOpts& e, const LowerOpts& lo, const json& config, Report& report,
                 std::ostream& out) {
  const std::uint64_t seed = need_seed(c, "evaluate");
  const Instance inst = load_instance(c.instance);
  const IndexSet s = parse_set(e.set, inst.n_customers());
  WorkCounters counters;
  Stopwatch clock;
  const StatLowerBound lb = stat_lb(inst, s, lower_spec(lo), c.solver(), seed, &counters, c.workers);
  const double cost = alpha(inst, s);
  json result = {{"set", s.encode()},
                 {"probe_cost", cost},
                 {"f_lower", estimate_json(lb.estimate)},
                 {"f_ci_lower", lb.ci_lower},
                 {"net_mean", lb.estimate.mean - cost},
                 {"net_ci_lower", lb.ci_lower - cost}};
  if (e.exact) {
    const BoundEstimate f = f_exact(inst, s, c.solver(), &counters);
    result["f_exact"] = f.mean;
    result["net_exact"] = f.mean - cost;
  }
  report.csv("draws", "draws.csv", [&](std::ostream& f) {
    f << "draw,value\n";
    f.precision(15);
    for (std::size_t k = 0; k < lb.values.size(); ++k) f << k << ',' << lb.values[k] << '\n';
  });
  return report.finish(out, config, instance_json(inst, c.instance), result, counters, clock.seconds(), false);
}

int cmd_emit_na_mip(const Common& c, const EmitOpts& e, const json& config, Report& report, std::ostream& out) {
  const Instance inst = load_instance(c.instance);
  Stopwatch clock;
  const NaMip na = build_na_mip(inst, {e.max_outcomes, e.max_linking_rows});
  const std::string mps = e.mps.empty() ? report.path("na_mip.mps") : e.mps;
  if (mps.empty()) throw InvalidArgument("emit-na-mip needs --mps or --out-dir");
  write_mps(na.model, mps);
  report.add_file("mps", mps);
  const json meta = na.metadata(inst);
  const std::string meta_path = e.metadata.empty() ? mps + ".json" : e.metadata;
  std::ofstream(meta_path) << meta.dump(2) << '\n';
  report.add_file("metadata", meta_path);
  json result = {{"outcomes", na.outcomes.size()},
                 {"variables", na.model.variables().size()},
                 {"binaries", na.model.num_binaries()},
                 {"rows", na.model.rows().size()},
                 {"nonzeros", na.model.num_nonzeros()},
                 {"pairs", na.pairs},
                 {"linking_rows", na.linking_rows},
                 {"big_m", meta["big_m"]},
                 {"epsilon", meta["epsilon"]}};
  WorkCounters none;
  return report.finish(out, config, instance_json(inst, c.instance), result, none, clock.seconds(), false);
}

std::vector<std::string> replay_args(const std::string& summary_path, const std::string& out_dir) {
  std::ifstream in(summary_path);
  if (!in) throw InvalidArgument("cannot open " + summary_path);
  json summary;
  try {
    in >> summary;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("cannot parse summary: ") + e.what());
  }
  if (!summary.contains("argv")) throw InvalidArgument(summary_path + " has no embedded argv");
  const auto argv = summary["argv"].get<std::vector<std::string>>();
  std::vector<std::string> out;
  for (std::size_t k = 0; k < argv.size(); ++k) {
    const std::string& a = argv[k];
    if (a == "-o" || a == "--out-dir" || a == "--output" || a == "--mps" || a == "--metadata") {
      ++k;
      continue;
    }
    if (a.rfind("--out-dir=", 0) == 0 || a.rfind("--output=", 0) == 0 || a.rfind("--mps=", 0) == 0 ||
        a.rfind("--metadata=", 0) == 0) {
      continue;
    }
    out.push_back(a);
  }
  if (!out_dir.empty()) {
    out.push_back("--out-dir");
    out.push_back(out_dir);
  }
  return out;
}

void diagnose(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probing-enhanced stochastic programs: exact, sampled and heuristic probe-set search", "pesp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pesp 0.1.0");

  Common common;
  GenerateOpts gen;
  SearchOpts search;
  SaaOpts saa;
  InternalOpts internal;
  LowerOpts lower;
  HeuristicOpts heur;
  EvaluateOpts evaluate;
  EmitOpts emit;
  std::string replay_summary;

  auto* g = app.add_subcommand("generate", "Write a random facility instance");
  add_common(g, common, false, false);
  g->add_option("--facilities", gen.facilities)->capture_default_str();
  g->add_option("--configs", gen.configs, "Configurations per facility")->capture_default_str();
  g->add_option("--customers", gen.customers)->capture_default_str();
  g->add_option("--kind", gen.kind, "bernoulli or mixed_triangular")->capture_default_str();
  g->add_option("--revenue-rate", gen.ranges.revenue_rate)->capture_default_str();
  g->add_option("--capacity-min", gen.ranges.capacity_min)->capture_default_str();
  g->add_option("--capacity-max", gen.ranges.capacity_max)->capture_default_str();
  g->add_option("--probe-cost-min", gen.ranges.probe_cost_min)->capture_default_str();
  g->add_option("--probe-cost-max", gen.ranges.probe_cost_max)->capture_default_str();
  g->add_option("--output", gen.output, "Instance path; default <out-dir>/<name>.json");

  auto* ex = app.add_subcommand("solve-exact", "Branch and bound with exact F (Bernoulli demand)");
  add_common(ex, common, true, true);
  add_search(ex, search);

  auto* sa = app.add_subcommand("solve-saa", "Replicated external-sampling branch and bound");
  add_common(sa, common, true, true);
  add_search(sa, search);
  sa->add_option("-N,--sample-size", saa.sample_size)->capture_default_str();
  sa->add_option("-L,--replications", saa.replications)->capture_default_str();
  sa->add_option("--sampling", saa.sampling, "lhs or mc")->capture_default_str();
  sa->add_option("--alpha", saa.alpha)->capture_default_str();
  sa->add_option("--memo-capacity", saa.memo_capacity, "Cached sampled two-stage solves; 0 disables")->capture_default_str();

  auto* in = app.add_subcommand("solve-internal", "Internal-sampling branch and bound with a global statistical bound");
  add_common(in, common, true, true);
  add_search(in, search);
  in->add_option("--outer", internal.spec.outer)->capture_default_str();
  in->add_option("--batches", internal.spec.batches)->capture_default_str();
  in->add_option("--inner", internal.spec.inner)->capture_default_str();
  in->add_option("--enum-batches", internal.spec.enum_batches)->capture_default_str();
  in->add_option("--enum-max-probes", internal.spec.enumerate_max_probes)->capture_default_str();
  in->add_option("--enum-max-outcomes", internal.spec.enumerate_max_outcomes)->capture_default_str();
  in->add_option("--sampling", internal.sampling, "lhs or mc")->capture_default_str();
  in->add_option("--alpha", internal.alpha)->capture_default_str();
  in->add_option("--priority-z", internal.priority_z, "Node order: mean + z * std_error")->capture_default_str();
  in->add_option("--lb-top", internal.lb_top, "Certify this many of the best candidates with lower bounds")->capture_default_str();
  add_lower(in, lower, "lb-");

  auto* he = app.add_subcommand("heuristic", "Greedy probing heuristic with certified finalists");
  add_common(he, common, true, true);
  he->add_option("--outer", heur.spec.outer)->capture_default_str();
  he->add_option("--inner", heur.spec.inner)->capture_default_str();
  he->add_option("--selection", heur.spec.selection)->capture_default_str();
  he->add_option("--clusters", heur.spec.clusters)->capture_default_str();
  he->add_flag("--weighted-clusters", heur.spec.weighted_clusters, "Weight clusters by size");
  he->add_option("--sampling", heur.sampling, "lhs or mc")->capture_default_str();
  he->add_option("--top", heur.top, "Candidates to certify")->capture_default_str();
  add_lower(he, lower, "lb-");

  auto* ev = app.add_subcommand("evaluate", "Statistical lower bound for one probe set");
  add_common(ev, common, true, true);
  ev->add_option("--set", evaluate.set, "Probe set, e.g. \"0;3;7\"; empty or - for none, all for every item")->required();
  ev->add_flag("--exact", evaluate.exact, "Also compute F exactly (Bernoulli demand)");
  add_lower(ev, lower, "");

  auto* em = app.add_subcommand("emit-na-mip", "Write the pairwise big-M probing MIP as MPS");
  add_common(em, common, true, false);
  em->add_option("--mps", emit.mps, "Output path; default <out-dir>/na_mip.mps");
  em->add_option("--metadata", emit.metadata, "Metadata JSON path; default <mps>.json");
  em->add_option("--max-outcomes", emit.max_outcomes)->capture_default_str();
  em->add_option("--max-linking-rows", emit.max_linking_rows)->capture_default_str();

  auto* rp = app.add_subcommand("replay", "Re-run the command recorded in a summary.json");
  rp->add_option("summary", replay_summary)->required();
  rp->add_option("-o,--out-dir", common.out_dir);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "pesp 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diagnose(err, "usage", e.what());
    return kExitError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == rp) return run_cli(replay_args(replay_summary, common.out_dir), out, err);
    if (common.workers < 1) throw InvalidArgument("--workers must be >= 1");
    const json config = echo_options(*sub);
    Report report(sub->get_name(), args, common);
    if (sub == g) return cmd_generate(common, gen, config, report, out);
    if (sub == ex) return cmd_solve_exact(common, search, config, report, out);
    if (sub == sa) return cmd_solve_saa(common, search, saa, config, report, out);
    if (sub == in) return cmd_solve_internal(common, search, internal, lower, config, report, out);
    if (sub == he) return cmd_heuristic(common, heur, lower, config, report, out);
    if (sub == ev) return cmd_evaluate(common, evaluate, lower, config, report, out);
    if (sub == em) return cmd_emit_na_mip(common, emit, config, report, out);
  } catch (const InvalidArgument& e) {
    diagnose(err, "invalid_argument", e.what());
    return kExitError;
  } catch (const Error& e) {
    diagnose(err, "solver", e.what());
    return kExitError;
  } catch (const std::exception& e) {
    diagnose(err, "internal", e.what());
    return kExitError;
  }
  return kExitError;
}

}  // namespace pesp
