#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pesp/demand_sampling.hpp"
#include "pesp/instance.hpp"
#include "pesp/recourse.hpp"
#include "pesp/work.hpp"

namespace pesp {

enum class Backend { Exhaustive, ExternalMip };

std::string to_string(Backend b);
Backend parse_backend(const std::string& s);

struct SolverConfig {
  Backend backend = Backend::Exhaustive;
  std::uint64_t node_cap = 10'000'000;
  /// When the exhaustive search hits node_cap, return the best solution found
  /// so far (flagged not proven optimal) instead of throwing. Useful wherever
  /// any feasible solution is valid, such as lower-bound candidate selection.
  bool incumbent_on_cap = false;
  /// Shell command template for ExternalMip; `{mps}` and `{sol}` are replaced by
  /// file paths. Empty means read PESP_SOLVER_CMD.
  std::string command;
  /// Each solution-file line matching this regex yields (name, value) from
  /// capture groups 1 and 2.
  std::string solution_regex = R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s+([-+0-9.eE]+))";
  /// Integrality tolerance applied to the solver's binary values.
  double tolerance = 1e-6;
  bool keep_files = false;
};

struct TwoStageResult {
  double value = 0.0;
  FirstStageSolution solution;
  std::size_t scenario_count = 0;
  Backend backend = Backend::Exhaustive;
  std::uint64_t nodes = 0;
  bool proven_optimal = true;
};

/// max over first-stage solutions of -cost + sum_k weight_k * recourse_k.
/// The result is invariant to the order of the scenarios.
TwoStageResult solve_two_stage(const Instance& inst, std::span<const Scenario> scenarios,
                               const SolverConfig& config = {}, WorkCounters* counters = nullptr);

/// True when the ExternalMip backend has a command to run.
bool external_solver_configured(const SolverConfig& config);

}  // namespace pesp
