#include "pesp/mipgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pesp/errors.hpp"

namespace pesp {

std::vector<double> first_stage_ranges(const Instance& inst) {
  std::size_t count = 0;
  for (const auto& f : inst.facilities) count += f.configs.size();
  count += static_cast<std::size_t>(inst.n_facilities()) * static_cast<std::size_t>(inst.n_customers());
  return std::vector<double>(count, 1.0);
}

double pair_epsilon(const std::vector<double>& a, const std::vector<double>& b) {
  double eps = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = std::abs(a[j] - b[j]);
    if (d > 0.0 && (eps == 0.0 || d < eps)) eps = d;
  }
  return eps;
}

NaMip build_na_mip(const Instance& inst, const NaMipOptions& options) {
  if (!inst.all_bernoulli()) throw ContinuousUnsupported("the probing MIP needs finitely supported demand");
  NaMip out;
  try {
    out.outcomes = enumerate_conditional_support(inst, Observation{IndexSet{}, {}}, options.max_outcomes);
  } catch (const SizeLimitExceeded& e) {
    throw SupportTooLarge(e.what());
  }
  std::erase_if(out.outcomes, [](const Scenario& s) { return !(s.weight > 0.0); });

  const int nf = inst.n_facilities();
  const int nc = inst.n_customers();
  const std::size_t nh = out.outcomes.size();
  const auto ranges = first_stage_ranges(inst);
  out.pairs = nh * (nh - 1) / 2;
  out.linking_rows = 2 * ranges.size() * out.pairs;
  if (out.linking_rows > options.max_linking_rows) {
    throw SupportTooLarge(fmt::format("{} outcomes need {} linking rows, above the limit of {}", nh,
                                      out.linking_rows, options.max_linking_rows));
  }

  MipModel& model = out.model;
  model.name = inst.name.empty() ? "PESP_NA" : inst.name + "_NA";
  model.maximize = true;
  const double r = inst.revenue_rate;
  for (int j = 0; j < nc; ++j) {
    out.probe_vars.push_back(model.add_binary(fmt::format("x_{}", j), -inst.customers[static_cast<std::size_t>(j)].probe_cost));
  }

  for (std::size_t h = 0; h < nh; ++h) {
    const Scenario& sc = out.outcomes[h];
    const double p = sc.weight;
    std::vector<std::vector<int>> y(static_cast<std::size_t>(nf));
    std::vector<std::vector<int>> u(static_cast<std::size_t>(nf));
    auto& first = out.first_stage_vars.emplace_back();
    for (int i = 0; i < nf; ++i) {
      const auto& f = inst.facilities[static_cast<std::size_t>(i)];
      for (std::size_t c = 0; c < f.configs.size(); ++c) {
        y[static_cast<std::size_t>(i)].push_back(model.add_binary(fmt::format("y_{}_{}_{}", i, c, h), -p * f.configs[c].open_cost));
        first.push_back(y[static_cast<std::size_t>(i)].back());
      }
    }
    for (int i = 0; i < nf; ++i) {
      for (int j = 0; j < nc; ++j) {
        const double a = inst.customers[static_cast<std::size_t>(j)].assign_costs[static_cast<std::size_t>(i)];
        u[static_cast<std::size_t>(i)].push_back(model.add_binary(fmt::format("u_{}_{}_{}", i, j, h), -p * a));
        first.push_back(u[static_cast<std::size_t>(i)].back());
      }
    }
    for (int i = 0; i < nf; ++i) {
      MipRow row{fmt::format("cfg_{}_{}", i, h), {}, RowSense::LessEqual, 1.0};
      for (int v : y[static_cast<std::size_t>(i)]) row.coeffs.emplace_back(v, 1.0);
      model.add_row(std::move(row));
      for (int j = 0; j < nc; ++j) {
        MipRow link{fmt::format("link_{}_{}_{}", i, j, h), {}, RowSense::LessEqual, 0.0};
        link.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
        for (int v : y[static_cast<std::size_t>(i)]) link.coeffs.emplace_back(v, -1.0);
        model.add_row(std::move(link));
      }
    }
    for (int j = 0; j < nc; ++j) {
      MipRow row{fmt::format("assign_{}_{}", j, h), {}, RowSense::LessEqual, 1.0};
      for (int i = 0; i < nf; ++i) row.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], 1.0);
      model.add_row(std::move(row));
    }
    for (int i = 0; i < nf; ++i) {
      const auto& f = inst.facilities[static_cast<std::size_t>(i)];
      MipRow cap{fmt::format("cap_{}_{}", i, h), {}, RowSense::LessEqual, 0.0};
      std::vector<int> flows;
      for (int j = 0; j < nc; ++j) {
        flows.push_back(model.add_continuous(fmt::format("f_{}_{}_{}", i, j, h), r * p));
        cap.coeffs.emplace_back(flows.back(), 1.0);
      }
      for (std::size_t c = 0; c < f.configs.size(); ++c) cap.coeffs.emplace_back(y[static_cast<std::size_t>(i)][c], -f.configs[c].capacity);
      model.add_row(std::move(cap));
      for (int j = 0; j < nc; ++j) {
        MipRow dem{fmt::format("dem_{}_{}_{}", i, j, h), {}, RowSense::LessEqual, 0.0};
        dem.coeffs.emplace_back(flows[static_cast<std::size_t>(j)], 1.0);
        dem.coeffs.emplace_back(u[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], -sc.demand[static_cast<std::size_t>(j)]);
        model.add_row(std::move(dem));
      }
    }
  }

  out.min_epsilon = out.min_big_m = std::numeric_limits<double>::infinity();
  for (std::size_t h = 0; h < nh; ++h) {
    for (std::size_t g = h + 1; g < nh; ++g) {
      const auto& a = out.outcomes[h].demand;
      const auto& b = out.outcomes[g].demand;
      const double eps = pair_epsilon(a, b);
      out.min_epsilon = std::min(out.min_epsilon, eps);
      out.max_epsilon = std::max(out.max_epsilon, eps);
      std::vector<std::pair<int, double>> separation;
      for (int j = 0; j < nc; ++j) {
        const double d = std::abs(a[static_cast<std::size_t>(j)] - b[static_cast<std::size_t>(j)]);
        if (d > 0.0) separation.emplace_back(out.probe_vars[static_cast<std::size_t>(j)], d);
      }
      for (std::size_t v = 0; v < ranges.size(); ++v) {
        const double big_m = ranges[v] / eps;
        out.min_big_m = std::min(out.min_big_m, big_m);
        out.max_big_m = std::max(out.max_big_m, big_m);
        for (int dir = 0; dir < 2; ++dir) {
          const double sign = dir == 0 ? 1.0 : -1.0;
          MipRow row{fmt::format("na_{}_{}_{}_{}", v, h, g, dir == 0 ? "p" : "m"), {}, RowSense::LessEqual, 0.0};
          row.coeffs.emplace_back(out.first_stage_vars[h][v], sign);
          row.coeffs.emplace_back(out.first_stage_vars[g][v], -sign);
          for (const auto& [x, d] : separation) row.coeffs.emplace_back(x, -big_m * d);
          model.add_row(std::move(row));
        }
      }
    }
  }
  if (out.pairs == 0) out.min_epsilon = out.min_big_m = 0.0;
  return out;
}

nlohmann::json NaMip::metadata(const Instance& inst) const {
  using nlohmann::json;
  json vars = json::array();
  for (std::size_t v = 0; v < model.variables().size(); ++v) {
    const auto& var = model.variables()[v];
    const char role = var.name.front();
    vars.push_back({{"index", v},
                    {"name", var.name},
                    {"role", role == 'x' ? "probe" : role == 'f' ? "flow" : "first_stage"},
                    {"integer", var.integer}});
  }
  json outs = json::array();
  for (std::size_t h = 0; h < outcomes.size(); ++h) {
    outs.push_back({{"index", h}, {"probability", outcomes[h].weight}, {"demand", outcomes[h].demand}});
  }
  return {{"instance", inst.name},
          {"objective_sense", "maximize"},
          {"mps_objective_negated", true},
          {"outcomes", outs},
          {"variables", vars},
          {"first_stage_per_outcome", first_stage_ranges(inst).size()},
          {"pairs", pairs},
          {"linking_rows", linking_rows},
          {"rows", model.rows().size()},
          {"nonzeros", model.num_nonzeros()},
          {"epsilon", {{"min", min_epsilon}, {"max", max_epsilon}}},
          {"big_m", {{"min", min_big_m}, {"max", max_big_m}}}};
}

}  // namespace pesp
