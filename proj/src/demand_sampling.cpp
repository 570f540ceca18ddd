#include "pesp/demand_sampling.hpp"

#include <cmath>
#include <string>

#include "pesp/errors.hpp"

namespace pesp {

std::string to_string(SamplingMode m) { return m == SamplingMode::MonteCarlo ? "mc" : "lhs"; }

SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "mc" || s == "monte_carlo") return SamplingMode::MonteCarlo;
  if (s == "lhs" || s == "latin_hypercube") return SamplingMode::LatinHypercube;
  throw InvalidArgument("unknown sampling mode: " + s);
}

void SampleSpec::validate() const {
  if (outer < 1 || inner < 1 || selection < 1 || batches < 1) {
    throw InvalidArgument("sample sizes must all be >= 1");
  }
}

std::vector<double> unit_design(std::size_t count, std::size_t dims, SamplingMode mode,
                                CounterRng& rng) {
  std::vector<double> u(count * dims);
  if (mode == SamplingMode::MonteCarlo) {
    for (double& x : u) x = rng.uniform();
    return u;
  }
  const double width = 1.0 / static_cast<double>(count);
  for (std::size_t d = 0; d < dims; ++d) {
    const auto perm = random_permutation(count, rng);
    for (std::size_t k = 0; k < count; ++k) {
      u[k * dims + d] = (static_cast<double>(perm[k]) + rng.uniform()) * width;
    }
  }
  return u;
}

std::vector<Scenario> sample_joint(const Instance& inst, int count, SamplingMode mode,
                                   CounterRng& rng) {
  return sample_conditional(inst, Observation{IndexSet{}, {}}, count, mode, rng);
}

std::vector<Scenario> sample_joint(const Instance& inst, const SampleSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, {0x10147ULL});
  return sample_joint(inst, spec.outer, spec.mode, rng);
}

void check_observation(const Instance& inst, const Observation& obs) {
  for (int j : obs.probed.items()) {
    if (j >= inst.n_customers() || static_cast<std::size_t>(j) >= obs.values.size()) {
      throw InvalidArgument("observation index out of range");
    }
    if (!inst.customers[static_cast<std::size_t>(j)].demand.in_support(obs.values[static_cast<std::size_t>(j)])) {
      throw ObservationOutOfSupport("observed demand " + std::to_string(obs.values[static_cast<std::size_t>(j)]) +
                                    " is impossible for customer " + std::to_string(j));
    }
  }
}

std::vector<Scenario> sample_conditional(const Instance& inst, const Observation& obs, int count,
                                         SamplingMode mode, CounterRng& rng) {
  if (count < 1) throw InvalidArgument("sample size must be >= 1");
  check_observation(inst, obs);
  const int n = inst.n_customers();
  std::vector<int> free;
  for (int j = 0; j < n; ++j) {
    if (!obs.probed.contains(j)) free.push_back(j);
  }
  const auto cnt = static_cast<std::size_t>(count);
  const auto u = unit_design(cnt, free.size(), mode, rng);
  const double w = 1.0 / static_cast<double>(count);
  std::vector<Scenario> out(cnt);
  for (std::size_t k = 0; k < cnt; ++k) {
    auto& d = out[k].demand;
    d.assign(static_cast<std::size_t>(n), 0.0);
    for (int j : obs.probed.items()) d[static_cast<std::size_t>(j)] = obs.values[static_cast<std::size_t>(j)];
    for (std::size_t f = 0; f < free.size(); ++f) {
      const auto j = static_cast<std::size_t>(free[f]);
      d[j] = inst.customers[j].demand.quantile(u[k * free.size() + f]);
    }
    out[k].weight = w;
  }
  return out;
}

std::vector<Scenario> sample_conditional(const Instance& inst, const Observation& obs,
                                         const SampleSpec& spec) {
  spec.validate();
  CounterRng rng(spec.seed, {0xC0D1ULL});
  return sample_conditional(inst, obs, spec.inner, spec.mode, rng);
}

namespace {

// Cartesian product of the atoms of `coords`, starting from `base`.
std::vector<ProjectedOutcome> product_of_atoms(const Instance& inst, const std::vector<int>& coords,
                                               const Observation& base, std::size_t cap) {
  std::vector<std::vector<std::pair<double, double>>> atoms;
  std::size_t total = 1;
  for (int j : coords) {
    const auto& dist = inst.customers[static_cast<std::size_t>(j)].demand;
    if (!dist.is_bernoulli()) {
      throw InfiniteSupport("customer " + std::to_string(j) + " has continuous demand");
    }
    atoms.push_back(dist.atoms());
    total *= atoms.back().size();
    if (total > cap) {
      throw SizeLimitExceeded("support enumeration exceeds " + std::to_string(cap) + " outcomes");
    }
  }
  std::vector<ProjectedOutcome> out;
  out.reserve(total);
  out.push_back({base, 1.0});
  for (std::size_t c = 0; c < coords.size(); ++c) {
    std::vector<ProjectedOutcome> next;
    next.reserve(out.size() * atoms[c].size());
    for (const auto& o : out) {
      for (const auto& [value, prob] : atoms[c]) {
        ProjectedOutcome p = o;
        p.observation.values[static_cast<std::size_t>(coords[c])] = value;
        p.probability *= prob;
        next.push_back(std::move(p));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<ProjectedOutcome> enumerate_support_projection(const Instance& inst, IndexSet s) {
  Observation base{s, std::vector<double>(static_cast<std::size_t>(inst.n_customers()), 0.0)};
  return product_of_atoms(inst, s.items(), base, kEnumerationCap);
}

std::vector<Scenario> enumerate_conditional_support(const Instance& inst, const Observation& obs,
                                                    std::size_t cap) {
  check_observation(inst, obs);
  std::vector<int> free;
  for (int j = 0; j < inst.n_customers(); ++j) {
    if (!obs.probed.contains(j)) free.push_back(j);
  }
  Observation base = obs;
  base.values.resize(static_cast<std::size_t>(inst.n_customers()), 0.0);
  auto outcomes = product_of_atoms(inst, free, base, cap);
  std::vector<Scenario> out;
  out.reserve(outcomes.size());
  for (auto& o : outcomes) out.push_back({std::move(o.observation.values), o.probability});
  return out;
}

Observation observe(const Scenario& scenario, IndexSet s) {
  Observation obs{s, std::vector<double>(scenario.demand.size(), 0.0)};
  for (int j : s.items()) obs.values[static_cast<std::size_t>(j)] = scenario.demand[static_cast<std::size_t>(j)];
  return obs;
}

}  // namespace pesp
