#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"

#include "pesp/demand_sampling.hpp"
#include "pesp/instance.hpp"
#include "pesp/mip_model.hpp"

namespace pesp {

struct NaMipOptions {
  std::size_t max_outcomes = std::size_t{1} << 12;
  /// Guard on the pairwise linking rows, which grow quadratically in outcomes.
  std::size_t max_linking_rows = 20'000'000;
};

/// Range of each first-stage variable: configuration binaries y_i_c first,
/// then assignment binaries u_i_j. All are 0/1 here, so every range is 1.
std::vector<double> first_stage_ranges(const Instance& inst);

/// Smallest nonzero coordinate difference of two demand vectors; 0 if equal.
double pair_epsilon(const std::vector<double>& a, const std::vector<double>& b);

/// The probing model over every outcome of the finite joint support. Each
/// outcome h carries its own copy of the first-stage variables (y_i_c_h,
/// u_i_j_h) and flows f_i_j_h; for each pair of outcomes and each first-stage
/// variable two big-M rows force equal copies unless a probed item tells the
/// outcomes apart. Probe binaries x_j enter the objective with -cost.
struct NaMip {
  MipModel model;
  std::vector<Scenario> outcomes;  // weight = probability
  std::vector<int> probe_vars;     // model index of x_j
  std::vector<std::vector<int>> first_stage_vars;  // [outcome][first-stage variable]
  std::size_t pairs = 0;
  std::size_t linking_rows = 0;
  double min_epsilon = 0.0;
  double max_epsilon = 0.0;
  double min_big_m = 0.0;
  double max_big_m = 0.0;

  /// Variable name map, outcome list, pair count and big-M statistics.
  nlohmann::json metadata(const Instance& inst) const;
};

/// Throws ContinuousUnsupported for non-Bernoulli demand and SupportTooLarge
/// when the support or the linking rows exceed the options.
NaMip build_na_mip(const Instance& inst, const NaMipOptions& options = {});

}  // namespace pesp
