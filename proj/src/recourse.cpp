#include "pesp/recourse.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pesp/errors.hpp"

namespace pesp {

FirstStageSolution FirstStageSolution::all_closed(const Instance& inst) {
  return {std::vector<int>(static_cast<std::size_t>(inst.n_facilities()), kClosed),
          std::vector<int>(static_cast<std::size_t>(inst.n_customers()), kUnassigned)};
}

void check_feasible(const Instance& inst, const FirstStageSolution& sol) {
  if (static_cast<int>(sol.config.size()) != inst.n_facilities() ||
      static_cast<int>(sol.assignment.size()) != inst.n_customers()) {
    throw InfeasibleFirstStage("solution shape does not match the instance");
  }
  for (int i = 0; i < inst.n_facilities(); ++i) {
    const int c = sol.config[static_cast<std::size_t>(i)];
    if (c != kClosed && (c < 0 || c >= static_cast<int>(inst.facilities[static_cast<std::size_t>(i)].configs.size()))) {
      throw InfeasibleFirstStage(fmt::format("facility {} has invalid configuration {}", i, c));
    }
  }
  for (int j = 0; j < inst.n_customers(); ++j) {
    const int i = sol.assignment[static_cast<std::size_t>(j)];
    if (i == kUnassigned) continue;
    if (i < 0 || i >= inst.n_facilities()) {
      throw InfeasibleFirstStage(fmt::format("customer {} assigned to unknown facility {}", j, i));
    }
    if (sol.config[static_cast<std::size_t>(i)] == kClosed) {
      throw InfeasibleFirstStage(fmt::format("customer {} assigned to closed facility {}", j, i));
    }
  }
}

double first_stage_cost(const Instance& inst, const FirstStageSolution& sol) {
  check_feasible(inst, sol);
  double cost = 0.0;
  for (std::size_t i = 0; i < sol.config.size(); ++i) {
    if (sol.config[i] != kClosed) {
      cost += inst.facilities[i].configs[static_cast<std::size_t>(sol.config[i])].open_cost;
    }
  }
  for (std::size_t j = 0; j < sol.assignment.size(); ++j) {
    if (sol.assignment[j] != kUnassigned) {
      cost += inst.customers[j].assign_costs[static_cast<std::size_t>(sol.assignment[j])];
    }
  }
  return cost;
}

double recourse_value(const Instance& inst, const FirstStageSolution& sol,
                      std::span<const double> demand) {
  const std::size_t nf = sol.config.size();
  double load_buf[16];
  std::vector<double> load_vec;
  double* load = load_buf;
  if (nf > 16) {
    load_vec.assign(nf, 0.0);
    load = load_vec.data();
  } else {
    std::fill(load_buf, load_buf + nf, 0.0);
  }
  for (std::size_t j = 0; j < sol.assignment.size(); ++j) {
    if (sol.assignment[j] != kUnassigned) load[sol.assignment[j]] += demand[j];
  }
  double served = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    if (sol.config[i] == kClosed) continue;
    served += std::min(inst.facilities[i].configs[static_cast<std::size_t>(sol.config[i])].capacity, load[i]);
  }
  return inst.revenue_rate * served;
}

double expected_value(const Instance& inst, const FirstStageSolution& sol,
                      std::span<const Scenario> scenarios) {
  double value = -first_stage_cost(inst, sol);
  for (const auto& s : scenarios) value += s.weight * recourse_value(inst, sol, s.demand);
  return value;
}

MipModel emit_extensive_form(const Instance& inst, std::span<const Scenario> scenarios) {
  if (scenarios.empty()) throw InvalidArgument("extensive form needs at least one scenario");
  MipModel model;
  model.name = inst.name.empty() ? "PESP" : inst.name;
  model.maximize = true;
  const int nf = inst.n_facilities();
  const int nc = inst.n_customers();
  const double r = inst.revenue_rate;

  std::vector<std::vector<int>> y(static_cast<std::size_t>(nf));
  std::vector<std::vector<int>> u(static_cast<std::size_t>(nf));
  for (int i = 0; i < nf; ++i) {
    const auto& f = inst.facilities[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < f.configs.size(); ++c) {
      y[static_cast<std::size_t>(i)].push_back(
          model.add_binary(fmt::format("y_{}_{}", i, c), -f.configs[c].open_cost));
    }
  }
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nc; ++j) {
      u[static_cast<std::size_t>(i)].push_back(model.add_binary(
          fmt::format("u_{}_{}", i, j),
          -inst.customers[static_cast<std::size_t>(j)].assign_costs[static_cast<std::size_t>(i)]));
    }
  }

  for (int i = 0; i < nf; ++i) {
    MipRow row{fmt::format("cfg_{}", i), {}, RowSense::LessEqual, 1.0};
    for (int v : y[static_cast<std::size_t>(i)]) row.coeffs.emplace_back(v, 1.0);
    model.add_row(std::move(row));
  }
  for (int i = 0; i < nf; ++i) {
    for (int j = 0; j < nc; ++j) {
      MipRow row{fmt::format("link_{}_{}", i, j), {}, RowSense::LessEqual, 0.0};
      row.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
      for (int v : y[static_cast<std::size_t>(i)]) row.coeffs.emplace_back(v, -1.0);
      model.add_row(std::move(row));
    }
  }
  for (int j = 0; j < nc; ++j) {
    MipRow row{fmt::format("assign_{}", j), {}, RowSense::LessEqual, 1.0};
    for (int i = 0; i < nf; ++i) row.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
    model.add_row(std::move(row));
  }

  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& sc = scenarios[k];
    for (int i = 0; i < nf; ++i) {
      std::vector<int> flows;
      for (int j = 0; j < nc; ++j) {
        flows.push_back(model.add_continuous(fmt::format("f_{}_{}_{}", i, j, k), r * sc.weight));
      }
      MipRow cap{fmt::format("cap_{}_{}", i, k), {}, RowSense::LessEqual, 0.0};
      for (int v : flows) cap.coeffs.emplace_back(v, 1.0);
      const auto& f = inst.facilities[static_cast<std::size_t>(i)];
      for (std::size_t c = 0; c < f.configs.size(); ++c) {
        cap.coeffs.emplace_back(y[static_cast<std::size_t>(i)][c], -f.configs[c].capacity);
      }
      model.add_row(std::move(cap));
      for (int j = 0; j < nc; ++j) {
        MipRow dem{fmt::format("dem_{}_{}_{}", i, j, k), {}, RowSense::LessEqual, 0.0};
        dem.coeffs.emplace_back(flows[static_cast<std::size_t>(j)], 1.0);
        dem.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                                -sc.demand[static_cast<std::size_t>(j)]);
        model.add_row(std::move(dem));
      }
    }
  }
  return model;
}

FirstStageSolution solution_from_values(const Instance& inst, const MipModel& model,
                                        const std::vector<double>& values) {
  auto sol = FirstStageSolution::all_closed(inst);
  for (int i = 0; i < inst.n_facilities(); ++i) {
    const auto& f = inst.facilities[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < f.configs.size(); ++c) {
      const int v = model.find_variable(fmt::format("y_{}_{}", i, c));
      if (v >= 0 && values[static_cast<std::size_t>(v)] > 0.5) sol.config[static_cast<std::size_t>(i)] = static_cast<int>(c);
    }
  }
  for (int i = 0; i < inst.n_facilities(); ++i) {
    for (int j = 0; j < inst.n_customers(); ++j) {
      const int v = model.find_variable(fmt::format("u_{}_{}", i, j));
      if (v >= 0 && values[static_cast<std::size_t>(v)] > 0.5) sol.assignment[static_cast<std::size_t>(j)] = i;
    }
  }
  return sol;
}

}  // namespace pesp
