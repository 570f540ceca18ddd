#pragma once
// Independent reference computations for tests. Nothing here calls the
// library's solvers; only the data types are shared.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pesp/instance.hpp"
#include "pesp/mip_model.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

template <typename T>
struct LpResult {
  bool unbounded = false;
  T value{};
  std::vector<T> x;
};

/// max c.x s.t. A x <= b, x >= 0, with b >= 0 (the origin is feasible).
/// Dense tableau with Bland's rule, so it terminates and is exact over
/// rationals.
template <typename T>
LpResult<T> simplex_max(const std::vector<T>& c, const std::vector<std::vector<T>>& a, const std::vector<T>& b,
                        T eps = T(0)) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  for (const T& v : b) {
    if (v < -eps) throw std::invalid_argument("simplex_max needs b >= 0");
  }
  // Columns: n structural, m slack, rhs.
  std::vector<std::vector<T>> t(m + 1, std::vector<T>(n + m + 1, T(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = T(1);
    t[i][n + m] = b[i] < T(0) ? T(0) : b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -c[j];
  for (;;) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (t[m][j] < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == n + m) break;
    std::size_t leave = m;
    T best{};
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > eps) {
        const T ratio = t[i][n + m] / t[i][enter];
        if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave == m) return {true, T(0), {}};
    const T pivot = t[leave][enter];
    for (auto& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave || t[i][enter] == T(0)) continue;
      const T f = t[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }
  LpResult<T> out;
  out.value = t[m][n + m];
  out.x.assign(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = t[i][n + m];
  }
  return out;
}

inline Rational exact(double v) {
  // Doubles are dyadic rationals, so this conversion is exact.
  int e = 0;
  const double frac = std::frexp(v, &e);
  const auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
  Rational r(mant);
  e -= 53;
  if (e > 0) r *= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), e);
  if (e < 0) r /= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), -e);
  return r;
}

/// Second-stage revenue as an LP over flows f_ij (one per assigned pair):
/// max r sum f  s.t.  sum_j f_ij <= cap_i,  f_ij <= d_j,  f >= 0.
inline Rational recourse_lp(const pesp::Instance& inst, const std::vector<int>& config,
                            const std::vector<int>& assignment, const std::vector<double>& demand) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    if (assignment[j] >= 0) pairs.emplace_back(assignment[j], static_cast<int>(j));
  }
  std::vector<Rational> c(pairs.size(), exact(inst.revenue_rate));
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  for (int i = 0; i < inst.n_facilities(); ++i) {
    const int k = config[static_cast<std::size_t>(i)];
    const double cap = k < 0 ? 0.0 : inst.facilities[static_cast<std::size_t>(i)].configs[static_cast<std::size_t>(k)].capacity;
    std::vector<Rational> row(pairs.size(), Rational(0));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (pairs[p].first == i) row[p] = 1;
    }
    a.push_back(row);
    b.push_back(exact(cap));
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<Rational> row(pairs.size(), Rational(0));
    row[p] = 1;
    a.push_back(row);
    b.push_back(exact(demand[static_cast<std::size_t>(pairs[p].second)]));
  }
  return simplex_max(c, a, b).value;
}

/// Calls f(config, assignment) for every feasible first-stage decision.
inline void for_each_first_stage(const pesp::Instance& inst,
                                 const std::function<void(const std::vector<int>&, const std::vector<int>&)>& f) {
  const int nf = inst.n_facilities();
  const int nc = inst.n_customers();
  std::vector<int> config(static_cast<std::size_t>(nf), -1);
  std::vector<int> assign(static_cast<std::size_t>(nc), -1);
  std::function<void(int)> customers = [&](int j) {
    if (j == nc) {
      f(config, assign);
      return;
    }
    assign[static_cast<std::size_t>(j)] = -1;
    customers(j + 1);
    for (int i = 0; i < nf; ++i) {
      if (config[static_cast<std::size_t>(i)] < 0) continue;
      assign[static_cast<std::size_t>(j)] = i;
      customers(j + 1);
    }
    assign[static_cast<std::size_t>(j)] = -1;
  };
  std::function<void(int)> facilities = [&](int i) {
    if (i == nf) {
      customers(0);
      return;
    }
    const int nk = static_cast<int>(inst.facilities[static_cast<std::size_t>(i)].configs.size());
    for (int k = -1; k < nk; ++k) {
      config[static_cast<std::size_t>(i)] = k;
      facilities(i + 1);
    }
    config[static_cast<std::size_t>(i)] = -1;
  };
  facilities(0);
}

inline double cost_of(const pesp::Instance& inst, const std::vector<int>& config, const std::vector<int>& assign) {
  double cost = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config[i] >= 0) cost += inst.facilities[i].configs[static_cast<std::size_t>(config[i])].open_cost;
  }
  for (std::size_t j = 0; j < assign.size(); ++j) {
    if (assign[j] >= 0) cost += inst.customers[j].assign_costs[static_cast<std::size_t>(assign[j])];
  }
  return cost;
}

inline double revenue_of(const pesp::Instance& inst, const std::vector<int>& config, const std::vector<int>& assign,
                         const std::vector<double>& demand) {
  std::vector<double> load(config.size(), 0.0);
  for (std::size_t j = 0; j < assign.size(); ++j) {
    if (assign[j] >= 0) load[static_cast<std::size_t>(assign[j])] += demand[j];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (config[i] < 0) continue;
    total += std::min(load[i], inst.facilities[i].configs[static_cast<std::size_t>(config[i])].capacity);
  }
  return inst.revenue_rate * total;
}

struct WeightedDemand {
  std::vector<double> demand;
  double weight;
};

/// max over first-stage decisions of -cost + sum_k w_k revenue_k, by enumeration.
inline double brute_force_two_stage(const pesp::Instance& inst, const std::vector<WeightedDemand>& scenarios) {
  double best = -std::numeric_limits<double>::infinity();
  for_each_first_stage(inst, [&](const std::vector<int>& config, const std::vector<int>& assign) {
    double v = -cost_of(inst, config, assign);
    for (const auto& s : scenarios) v += s.weight * revenue_of(inst, config, assign, s.demand);
    best = std::max(best, v);
  });
  return best;
}

/// All 2^n demand outcomes of a Bernoulli instance with their probabilities.
inline std::vector<WeightedDemand> all_outcomes(const pesp::Instance& inst) {
  const int n = inst.n_customers();
  std::vector<WeightedDemand> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    WeightedDemand w{std::vector<double>(static_cast<std::size_t>(n), 0.0), 1.0};
    for (int j = 0; j < n; ++j) {
      const auto& b = inst.customers[static_cast<std::size_t>(j)].demand.bernoulli();
      if ((m >> j) & 1U) {
        w.demand[static_cast<std::size_t>(j)] = b.nominal;
        w.weight *= 1.0 - b.low_prob;
      } else {
        w.weight *= b.low_prob;
      }
    }
    if (w.weight > 0.0) out.push_back(std::move(w));
  }
  return out;
}

/// F(S) = sum over observed projections of P(projection) times the two-stage
/// optimum under the conditional distribution, by brute force.
inline double brute_force_f(const pesp::Instance& inst, std::uint64_t s_mask) {
  std::map<std::vector<double>, std::vector<WeightedDemand>> groups;
  for (const auto& o : all_outcomes(inst)) {
    std::vector<double> key;
    for (std::size_t j = 0; j < o.demand.size(); ++j) {
      if ((s_mask >> j) & 1U) key.push_back(o.demand[j]);
    }
    groups[key].push_back(o);
  }
  double f = 0.0;
  for (auto& [key, members] : groups) {
    double p = 0.0;
    for (const auto& m : members) p += m.weight;
    for (auto& m : members) m.weight /= p;
    f += p * brute_force_two_stage(inst, members);
  }
  return f;
}

/// Optimum of a maximization MIP whose integer variables are all binary and
/// whose continuous variables are nonnegative and unbounded above, after
/// fixing some binaries. Rows that can never bind are dropped, pairs of
/// opposite rows v_a - v_b <= 0 merge binaries into classes, the remaining
/// structure is split into independent components, and each component is
/// solved by enumerating its binary classes with an LP over its continuous
/// variables for every binary assignment.
inline std::optional<double> fixed_binary_mip_optimum(const pesp::MipModel& model, const std::map<int, double>& fixed,
                                                      std::size_t max_classes = 16) {
  const auto& vars = model.variables();
  const auto nv = vars.size();
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };

  for (const auto& v : vars) {
    if (v.integer && (v.lower != 0.0 || v.upper != 1.0)) throw std::invalid_argument("integer variables must be binary");
    if (!v.integer && (v.lower != 0.0 || v.upper != pesp::kInf)) throw std::invalid_argument("continuous variables must be [0, inf)");
  }

  struct Row {
    std::vector<std::pair<int, double>> coeffs;  // free variables only
    double rhs;
  };
  std::vector<Row> rows;
  std::map<std::pair<int, int>, int> directed;  // (a, b) for a - b <= 0
  for (const auto& r : model.rows()) {
    if (r.sense == pesp::RowSense::Equal) throw std::invalid_argument("equality rows unsupported");
    const double sign = r.sense == pesp::RowSense::GreaterEqual ? -1.0 : 1.0;
    Row row{{}, sign * r.rhs};
    bool continuous = false;
    for (const auto& [v, a] : r.coeffs) {
      if (auto it = fixed.find(v); it != fixed.end()) {
        row.rhs -= sign * a * it->second;
      } else {
        row.coeffs.emplace_back(v, sign * a);
        continuous = continuous || !vars[static_cast<std::size_t>(v)].integer;
      }
    }
    if (row.coeffs.empty()) {
      if (row.rhs < -1e-9) return std::nullopt;
      continue;
    }
    if (!continuous) {
      double max_activity = 0.0;
      for (const auto& [v, a] : row.coeffs) max_activity += std::max(a, 0.0);
      if (max_activity <= row.rhs + 1e-12) continue;  // never binds
      if (row.coeffs.size() == 2 && row.rhs == 0.0 && row.coeffs[0].second == -row.coeffs[1].second &&
          std::abs(row.coeffs[0].second) == 1.0) {
        const int a = row.coeffs[0].second > 0 ? row.coeffs[0].first : row.coeffs[1].first;
        const int b = row.coeffs[0].second > 0 ? row.coeffs[1].first : row.coeffs[0].first;
        directed[{a, b}] = static_cast<int>(rows.size());
      }
    }
    rows.push_back(std::move(row));
  }
  // Opposite implications make an equality: merge and drop both rows.
  std::vector<bool> dropped(rows.size(), false);
  for (const auto& [ab, idx] : directed) {
    auto back = directed.find({ab.second, ab.first});
    if (back == directed.end()) continue;
    parent[find(ab.first)] = find(ab.second);
    dropped[static_cast<std::size_t>(idx)] = true;
    dropped[static_cast<std::size_t>(back->second)] = true;
  }

  // Components over class representatives and continuous variables.
  std::vector<int> comp(nv);
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> cfind = [&](int v) { return comp[v] == v ? v : comp[v] = cfind(comp[v]); };
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (dropped[k]) continue;
    const int first = find(rows[k].coeffs.front().first);
    for (const auto& [v, a] : rows[k].coeffs) comp[cfind(find(v))] = cfind(first);
  }

  double total = model.objective_offset;
  for (const auto& [v, x] : fixed) total += vars[static_cast<std::size_t>(v)].objective * x;
  std::map<int, std::vector<int>> members;  // component -> free representatives / continuous vars
  for (std::size_t v = 0; v < nv; ++v) {
    if (fixed.count(static_cast<int>(v)) != 0) continue;
    if (find(static_cast<int>(v)) != static_cast<int>(v)) continue;
    members[cfind(static_cast<int>(v))].push_back(static_cast<int>(v));
  }
  std::map<int, std::vector<std::size_t>> comp_rows;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (!dropped[k]) comp_rows[cfind(find(rows[k].coeffs.front().first))].push_back(k);
  }
  // Objective per class representative.
  std::vector<double> class_obj(nv, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    if (fixed.count(static_cast<int>(v)) == 0) class_obj[static_cast<std::size_t>(find(static_cast<int>(v)))] += vars[v].objective;
  }

  for (const auto& [cid, vs] : members) {
    std::vector<int> classes;
    std::vector<int> conts;
    for (int v : vs) (vars[static_cast<std::size_t>(v)].integer ? classes : conts).push_back(v);
    if (classes.size() > max_classes) throw std::invalid_argument("component too large to enumerate");
    std::map<int, std::size_t> cont_index;
    for (std::size_t k = 0; k < conts.size(); ++k) cont_index[conts[k]] = k;
    const auto& rs = comp_rows[cid];
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << classes.size()); ++m) {
      std::map<int, double> value;
      double obj = 0.0;
      for (std::size_t k = 0; k < classes.size(); ++k) {
        value[classes[k]] = static_cast<double>((m >> k) & 1U);
        obj += class_obj[static_cast<std::size_t>(classes[k])] * value[classes[k]];
      }
      bool ok = true;
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (std::size_t k : rs) {
        double rhs = rows[k].rhs;
        std::vector<double> coef(conts.size(), 0.0);
        bool has_cont = false;
        for (const auto& [v, c] : rows[k].coeffs) {
          const int rep = find(v);
          if (vars[static_cast<std::size_t>(v)].integer) {
            rhs -= c * value[rep];
          } else {
            coef[cont_index[v]] += c;
            has_cont = true;
          }
        }
        if (!has_cont) {
          if (rhs < -1e-9) ok = false;
          continue;
        }
        if (rhs < -1e-9) {
          ok = false;  // flows are >= 0 and all flow coefficients here are positive
          for (double cf : coef) ok = ok || cf < 0.0;
          if (!ok) break;
          throw std::invalid_argument("negative right-hand side with mixed signs");
        }
        a.push_back(coef);
        b.push_back(std::max(rhs, 0.0));
      }
      if (!ok) continue;
      if (!conts.empty()) {
        std::vector<double> c(conts.size());
        for (std::size_t k = 0; k < conts.size(); ++k) c[k] = vars[static_cast<std::size_t>(conts[k])].objective;
        const auto lp = simplex_max<double>(c, a, b, 1e-12);
        if (lp.unbounded) throw std::invalid_argument("unbounded component");
        obj += lp.value;
      }
      best = std::max(best, obj);
    }
    if (best == -std::numeric_limits<double>::infinity()) return std::nullopt;
    total += best;
  }
  return total;
}

}  // namespace oracle
