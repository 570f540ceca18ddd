#pragma once

#include <vector>

#include "pesp/demand_sampling.hpp"
#include "pesp/instance.hpp"

namespace fixture {

inline pesp::Facility facility(int id, std::vector<pesp::FacilityConfig> configs) { return {id, std::move(configs)}; }

inline pesp::Customer bernoulli_customer(int id, std::vector<double> assign, double probe, double low_prob,
                                         double nominal) {
  pesp::Customer c;
  c.id = id;
  c.assign_costs = std::move(assign);
  c.probe_cost = probe;
  c.demand = pesp::Bernoulli{low_prob, nominal};
  return c;
}

/// Small generated Bernoulli instance with |I| facilities, |C| configs each.
inline pesp::Instance small(int facilities, int configs, int customers, std::uint64_t seed) {
  return pesp::generate_instance(facilities, configs, customers, pesp::DistributionKind::Bernoulli, seed);
}

/// Every coordinate has low_prob 0 or 1, so demand is deterministic.
inline pesp::Instance degenerate(int facilities, int configs, int customers, std::uint64_t seed) {
  auto inst = small(facilities, configs, customers, seed);
  for (std::size_t j = 0; j < inst.customers.size(); ++j) {
    auto b = inst.customers[j].demand.bernoulli();
    b.low_prob = j % 2 == 0 ? 0.0 : 1.0;
    inst.customers[j].demand = b;
  }
  return inst;
}

inline std::vector<pesp::Scenario> single(std::vector<double> demand) { return {{std::move(demand), 1.0}}; }

}  // namespace fixture
