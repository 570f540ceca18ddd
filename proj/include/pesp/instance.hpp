#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "pesp/index_set.hpp"

namespace pesp {

/// Demand is 0 with probability `low_prob`, otherwise `nominal`.
struct Bernoulli {
  double low_prob = 0.5;
  double nominal = 1.0;
};

/// Low branch (probability `low_prob`): triangular(0, mode 0, low_max).
/// High branch: triangular(high_min, high_mode, high_max).
struct MixedTriangular {
  double low_prob = 0.5;
  double low_max = 1.0;
  double high_min = 1.0;
  double high_mode = 1.0;
  double high_max = 1.0;
};

class DemandDistribution {
 public:
  DemandDistribution() = default;
  DemandDistribution(Bernoulli b) : dist_(b) {}  // NOLINT(google-explicit-constructor)
  DemandDistribution(MixedTriangular m) : dist_(m) {}  // NOLINT(google-explicit-constructor)

  bool is_bernoulli() const { return std::holds_alternative<Bernoulli>(dist_); }
  const Bernoulli& bernoulli() const { return std::get<Bernoulli>(dist_); }
  const MixedTriangular& mixed() const { return std::get<MixedTriangular>(dist_); }
  double low_prob() const;

  /// Maps u in (0,1) to a demand. Low branch when u < low_prob, using u/low_prob
  /// as the branch's own uniform; otherwise (u - low_prob)/(1 - low_prob).
  /// Monotone in u whenever the branches do not overlap.
  double quantile(double u) const;
  double cdf(double x) const;
  double mean() const;
  /// True when `x` is a possible outcome (point mass or within a branch's range).
  bool in_support(double x) const;
  /// Finite-support outcomes with probabilities (Bernoulli only; zero-probability
  /// outcomes are omitted).
  std::vector<std::pair<double, double>> atoms() const;

  void validate() const;

 private:
  std::variant<Bernoulli, MixedTriangular> dist_;
};

struct FacilityConfig {
  double capacity = 0.0;
  double open_cost = 0.0;
};

struct Facility {
  int id = 0;
  std::vector<FacilityConfig> configs;
};

struct Customer {
  int id = 0;
  std::vector<double> assign_costs;  // one per facility
  double probe_cost = 0.0;
  DemandDistribution demand;
};

struct Instance {
  std::vector<Facility> facilities;
  std::vector<Customer> customers;
  double revenue_rate = 1.0;
  std::string name;
  std::uint64_t seed = 0;

  int n_facilities() const { return static_cast<int>(facilities.size()); }
  int n_customers() const { return static_cast<int>(customers.size()); }
  bool all_bernoulli() const;

  /// Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

enum class DistributionKind { Bernoulli, MixedTriangular };

DistributionKind parse_distribution_kind(const std::string& s);
std::string to_string(DistributionKind kind);

/// Ranges used by generate_instance. Defaults give instances where probing
/// is neither free nor dominant.
struct GeneratorOptions {
  double capacity_min = 20.0;
  double capacity_max = 100.0;
  double open_cost_factor_min = 2.5;  // open cost = capacity * factor
  double open_cost_factor_max = 4.5;
  double assign_cost_min = 1.0;
  double assign_cost_max = 10.0;
  double probe_cost_min = 5.0;
  double probe_cost_max = 50.0;
  double low_prob_min = 0.2;
  double low_prob_max = 0.8;
  double nominal_min = 10.0;
  double nominal_max = 40.0;
  double revenue_rate = 10.0;
};

/// Random instance with capacities drawn on [20, 100] (sorted so capacity
/// increases with configuration index), open costs proportional to capacity
/// with multiplicative noise, assignment costs on [1, 10], probe costs on
/// [5, 50] and low-demand probabilities on [0.2, 0.8].
Instance generate_instance(int n_facilities, int n_configs, int n_customers,
                           DistributionKind kind, std::uint64_t seed,
                           const GeneratorOptions& options = {});

nlohmann::json to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

}  // namespace pesp
