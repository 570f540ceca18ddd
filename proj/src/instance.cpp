#include "pesp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pesp/errors.hpp"
#include "pesp/rng.hpp"

namespace pesp {

namespace {

// Inverse CDF of triangular(lo, mode, hi) at u in [0, 1].
double triangular_quantile(double lo, double mode, double hi, double u) {
  const double width = hi - lo;
  if (width <= 0.0) return lo;
  const double split = (mode - lo) / width;
  if (u < split) return lo + std::sqrt(u * width * (mode - lo));
  return hi - std::sqrt((1.0 - u) * width * (hi - mode));
}

double triangular_cdf(double lo, double mode, double hi, double x) {
  if (x <= lo) return x < lo ? 0.0 : (hi > lo ? 0.0 : 1.0);
  if (x >= hi) return 1.0;
  const double width = hi - lo;
  if (x <= mode) return (x - lo) * (x - lo) / (width * (mode - lo));
  return 1.0 - (hi - x) * (hi - x) / (width * (hi - mode));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace

double DemandDistribution::low_prob() const {
  return std::visit([](const auto& d) { return d.low_prob; }, dist_);
}

double DemandDistribution::quantile(double u) const {
  if (const auto* b = std::get_if<Bernoulli>(&dist_)) return u < b->low_prob ? 0.0 : b->nominal;
  const auto& m = std::get<MixedTriangular>(dist_);
  if (u < m.low_prob) return triangular_quantile(0.0, 0.0, m.low_max, u / m.low_prob);
  const double v = (u - m.low_prob) / (1.0 - m.low_prob);
  return triangular_quantile(m.high_min, m.high_mode, m.high_max, v);
}

double DemandDistribution::cdf(double x) const {
  if (const auto* b = std::get_if<Bernoulli>(&dist_)) {
    if (x < 0.0) return 0.0;
    return x < b->nominal ? b->low_prob : 1.0;
  }
  const auto& m = std::get<MixedTriangular>(dist_);
  return m.low_prob * triangular_cdf(0.0, 0.0, m.low_max, x) +
         (1.0 - m.low_prob) * triangular_cdf(m.high_min, m.high_mode, m.high_max, x);
}

double DemandDistribution::mean() const {
  if (const auto* b = std::get_if<Bernoulli>(&dist_)) return (1.0 - b->low_prob) * b->nominal;
  const auto& m = std::get<MixedTriangular>(dist_);
  return m.low_prob * m.low_max / 3.0 +
         (1.0 - m.low_prob) * (m.high_min + m.high_mode + m.high_max) / 3.0;
}

bool DemandDistribution::in_support(double x) const {
  if (const auto* b = std::get_if<Bernoulli>(&dist_)) {
    return (x == 0.0 && b->low_prob > 0.0) || (x == b->nominal && b->low_prob < 1.0);
  }
  const auto& m = std::get<MixedTriangular>(dist_);
  const bool low = m.low_prob > 0.0 && x >= 0.0 && x <= m.low_max;
  const bool high = m.low_prob < 1.0 && x >= m.high_min && x <= m.high_max;
  return low || high;
}

std::vector<std::pair<double, double>> DemandDistribution::atoms() const {
  if (!is_bernoulli()) throw InfiniteSupport("continuous demand has no finite support");
  const auto& b = bernoulli();
  std::vector<std::pair<double, double>> out;
  if (b.low_prob > 0.0) out.emplace_back(0.0, b.low_prob);
  if (b.low_prob < 1.0) out.emplace_back(b.nominal, 1.0 - b.low_prob);
  return out;
}

void DemandDistribution::validate() const {
  const double rho = low_prob();
  require(rho >= 0.0 && rho <= 1.0, "low-demand probability must lie in [0, 1]");
  if (const auto* b = std::get_if<Bernoulli>(&dist_)) {
    require(b->nominal > 0.0, "nominal demand must be positive");
    return;
  }
  const auto& m = std::get<MixedTriangular>(dist_);
  require(m.low_max > 0.0, "low_max must be positive");
  require(m.high_min >= 0.0, "high_min must be nonnegative");
  require(m.high_min <= m.high_mode && m.high_mode <= m.high_max,
          "mixed triangular requires high_min <= high_mode <= high_max");
}

bool Instance::all_bernoulli() const {
  return std::all_of(customers.begin(), customers.end(),
                     [](const Customer& c) { return c.demand.is_bernoulli(); });
}

void Instance::validate() const {
  require(revenue_rate > 0.0, "revenue_rate must be positive");
  require(n_customers() <= kMaxProbeItems, "at most 64 customers are supported");
  for (const auto& f : facilities) {
    require(!f.configs.empty(), "every facility needs at least one configuration");
    for (const auto& c : f.configs) {
      require(c.capacity >= 0.0 && c.open_cost >= 0.0,
              "capacities and open costs must be nonnegative");
    }
  }
  for (const auto& c : customers) {
    require(static_cast<int>(c.assign_costs.size()) == n_facilities(),
            "each customer needs one assignment cost per facility");
    for (double a : c.assign_costs) require(a >= 0.0, "assignment costs must be nonnegative");
    require(c.probe_cost >= 0.0, "probe costs must be nonnegative");
    c.demand.validate();
  }
}

DistributionKind parse_distribution_kind(const std::string& s) {
  if (s == "bernoulli") return DistributionKind::Bernoulli;
  if (s == "mixed_triangular" || s == "continuous") return DistributionKind::MixedTriangular;
  throw InvalidArgument("unknown distribution kind: " + s);
}

std::string to_string(DistributionKind kind) {
  return kind == DistributionKind::Bernoulli ? "bernoulli" : "mixed_triangular";
}

Instance generate_instance(int n_facilities, int n_configs, int n_customers,
                           DistributionKind kind, std::uint64_t seed,
                           const GeneratorOptions& opt) {
  require(n_facilities >= 1 && n_configs >= 1 && n_customers >= 1, "all counts must be >= 1");
  CounterRng rng(seed, {0x1157A7CEULL});
  Instance inst;
  inst.revenue_rate = opt.revenue_rate;
  inst.seed = seed;
  inst.name = "J" + std::to_string(n_customers) + (kind == DistributionKind::Bernoulli ? "" : "_C") +
              "_s" + std::to_string(seed);

  for (int i = 0; i < n_facilities; ++i) {
    Facility f;
    f.id = i;
    std::vector<double> caps(static_cast<std::size_t>(n_configs));
    for (double& c : caps) c = std::round(rng.uniform(opt.capacity_min, opt.capacity_max));
    std::sort(caps.begin(), caps.end());
    for (double cap : caps) {
      const double factor = rng.uniform(opt.open_cost_factor_min, opt.open_cost_factor_max);
      f.configs.push_back({cap, std::round(cap * factor)});
    }
    inst.facilities.push_back(std::move(f));
  }

  for (int j = 0; j < n_customers; ++j) {
    Customer c;
    c.id = j;
    for (int i = 0; i < n_facilities; ++i) {
      c.assign_costs.push_back(std::round(rng.uniform(opt.assign_cost_min, opt.assign_cost_max)));
    }
    c.probe_cost = std::round(rng.uniform(opt.probe_cost_min, opt.probe_cost_max));
    const double rho = std::round(rng.uniform(opt.low_prob_min, opt.low_prob_max) * 100.0) / 100.0;
    if (kind == DistributionKind::Bernoulli) {
      c.demand = Bernoulli{rho, std::round(rng.uniform(opt.nominal_min, opt.nominal_max))};
    } else {
      MixedTriangular m;
      m.low_prob = rho;
      m.low_max = std::round(rng.uniform(0.1, 0.3) * opt.nominal_min * 10.0) / 10.0;
      m.high_min = std::round(rng.uniform(0.5, 1.0) * opt.nominal_min);
      m.high_mode = m.high_min + std::round(rng.uniform(0.0, 0.5) * (opt.nominal_max - opt.nominal_min));
      m.high_max = m.high_mode + std::round(rng.uniform(0.2, 0.6) * (opt.nominal_max - opt.nominal_min));
      c.demand = m;
    }
    inst.customers.push_back(std::move(c));
  }
  inst.validate();
  return inst;
}

nlohmann::json to_json(const Instance& inst) {
  using nlohmann::json;
  json j;
  j["format_version"] = 1;
  j["revenue_rate"] = inst.revenue_rate;
  j["meta"] = {{"name", inst.name}, {"seed", inst.seed}};
  json facilities = json::array();
  for (const auto& f : inst.facilities) {
    json configs = json::array();
    for (const auto& c : f.configs) configs.push_back({{"capacity", c.capacity}, {"open_cost", c.open_cost}});
    facilities.push_back({{"id", f.id}, {"configs", configs}});
  }
  j["facilities"] = facilities;
  json customers = json::array();
  for (const auto& c : inst.customers) {
    json dist;
    if (c.demand.is_bernoulli()) {
      const auto& b = c.demand.bernoulli();
      dist = {{"kind", "bernoulli"}, {"params", {{"low_prob", b.low_prob}, {"nominal", b.nominal}}}};
    } else {
      const auto& m = c.demand.mixed();
      dist = {{"kind", "mixed_triangular"},
              {"params",
               {{"low_prob", m.low_prob},
                {"low_max", m.low_max},
                {"high_min", m.high_min},
                {"high_mode", m.high_mode},
                {"high_max", m.high_max}}}};
    }
    customers.push_back({{"id", c.id},
                         {"assign_costs", c.assign_costs},
                         {"probe_cost", c.probe_cost},
                         {"distribution", dist}});
  }
  j["customers"] = customers;
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  try {
    const int version = j.value("format_version", 1);
    require(version == 1, "unsupported instance format_version " + std::to_string(version));
    Instance inst;
    inst.revenue_rate = j.at("revenue_rate").get<double>();
    if (j.contains("meta")) {
      inst.name = j["meta"].value("name", "");
      inst.seed = j["meta"].value("seed", std::uint64_t{0});
    }
    for (const auto& jf : j.at("facilities")) {
      Facility f;
      f.id = jf.at("id").get<int>();
      for (const auto& jc : jf.at("configs")) {
        f.configs.push_back({jc.at("capacity").get<double>(), jc.at("open_cost").get<double>()});
      }
      inst.facilities.push_back(std::move(f));
    }
    for (const auto& jc : j.at("customers")) {
      Customer c;
      c.id = jc.at("id").get<int>();
      c.assign_costs = jc.at("assign_costs").get<std::vector<double>>();
      c.probe_cost = jc.at("probe_cost").get<double>();
      const auto& dist = jc.at("distribution");
      const auto kind = dist.at("kind").get<std::string>();
      const auto& p = dist.at("params");
      if (kind == "bernoulli") {
        c.demand = Bernoulli{p.at("low_prob").get<double>(), p.at("nominal").get<double>()};
      } else if (kind == "mixed_triangular") {
        c.demand = MixedTriangular{p.at("low_prob").get<double>(), p.at("low_max").get<double>(),
                                   p.at("high_min").get<double>(), p.at("high_mode").get<double>(),
                                   p.at("high_max").get<double>()};
      } else {
        throw InvalidArgument("unknown distribution kind: " + kind);
      }
      inst.customers.push_back(std::move(c));
    }
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed instance JSON: ") + e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open instance file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("cannot parse " + path + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << to_json(inst).dump(2) << '\n';
}

}  // namespace pesp
