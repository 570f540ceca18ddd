#pragma once

#include <span>
#include <vector>

#include "pesp/demand_sampling.hpp"
#include "pesp/instance.hpp"
#include "pesp/mip_model.hpp"

namespace pesp {

inline constexpr int kClosed = -1;
inline constexpr int kUnassigned = -1;

/// First-stage decision: a configuration per facility (kClosed or an index)
/// and a serving facility per customer (kUnassigned or a facility index).
struct FirstStageSolution {
  std::vector<int> config;
  std::vector<int> assignment;

  static FirstStageSolution all_closed(const Instance& inst);
  bool operator==(const FirstStageSolution&) const = default;
};

/// Throws InfeasibleFirstStage unless the solution has the instance's shape
/// and serves customers only from open facilities.
void check_feasible(const Instance& inst, const FirstStageSolution& sol);

/// Open costs plus assignment costs (nonnegative).
double first_stage_cost(const Instance& inst, const FirstStageSolution& sol);

/// Second-stage revenue r * sum_i min(capacity_i, assigned demand_i).
double recourse_value(const Instance& inst, const FirstStageSolution& sol,
                      std::span<const double> demand);
inline double recourse_value(const Instance& inst, const FirstStageSolution& sol,
                             const Scenario& scenario) {
  return recourse_value(inst, sol, scenario.demand);
}

/// -cost + sum_k weight_k * recourse_k.
double expected_value(const Instance& inst, const FirstStageSolution& sol,
                      std::span<const Scenario> scenarios);

/// Extensive form with binaries y_i_c, u_i_j and flows f_i_j_k; its optimum is
/// the two-stage optimum over the weighted scenarios.
MipModel emit_extensive_form(const Instance& inst, std::span<const Scenario> scenarios);

/// Reads y/u values of a point of emit_extensive_form's model (rounded).
FirstStageSolution solution_from_values(const Instance& inst, const MipModel& model,
                                        const std::vector<double>& values);

}  // namespace pesp
