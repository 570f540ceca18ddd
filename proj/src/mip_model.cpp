#include "pesp/mip_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pesp/errors.hpp"

namespace pesp {

int MipModel::add_variable(MipVariable v) {
  if (index_.count(v.name) != 0) throw InvalidArgument("duplicate variable name " + v.name);
  const int id = static_cast<int>(vars_.size());
  index_.emplace(v.name, id);
  vars_.push_back(std::move(v));
  return id;
}

int MipModel::add_binary(const std::string& name, double objective) {
  return add_variable({name, 0.0, 1.0, true, objective});
}

int MipModel::add_continuous(const std::string& name, double objective, double lower,
                             double upper) {
  return add_variable({name, lower, upper, false, objective});
}

int MipModel::add_row(MipRow row) {
  rows_.push_back(std::move(row));
  return static_cast<int>(rows_.size()) - 1;
}

int MipModel::find_variable(const std::string& name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::size_t MipModel::num_binaries() const {
  return static_cast<std::size_t>(std::count_if(vars_.begin(), vars_.end(), [](const MipVariable& v) {
    return v.integer && v.lower == 0.0 && v.upper == 1.0;
  }));
}

std::size_t MipModel::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.coeffs.size();
  return nnz;
}

double MipModel::objective_value(const std::vector<double>& x) const {
  double v = objective_offset;
  for (std::size_t i = 0; i < vars_.size(); ++i) v += vars_[i].objective * x[i];
  return v;
}

double MipModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    worst = std::max({worst, vars_[i].lower - x[i], x[i] - vars_[i].upper});
    if (vars_[i].integer) worst = std::max(worst, std::abs(x[i] - std::round(x[i])));
  }
  for (const auto& r : rows_) {
    double lhs = 0.0;
    for (const auto& [var, c] : r.coeffs) lhs += c * x[static_cast<std::size_t>(var)];
    switch (r.sense) {
      case RowSense::LessEqual: worst = std::max(worst, lhs - r.rhs); break;
      case RowSense::GreaterEqual: worst = std::max(worst, r.rhs - lhs); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(lhs - r.rhs)); break;
    }
  }
  return worst;
}

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

char sense_code(RowSense s) {
  switch (s) {
    case RowSense::LessEqual: return 'L';
    case RowSense::GreaterEqual: return 'G';
    case RowSense::Equal: return 'E';
  }
  return 'L';
}

void entry(std::ostream& out, const std::string& col, const std::string& row, double v) {
  fmt::print(out, "    {:<8}  {:<8}  {:>12}\n", col, row, num(v));
}

}  // namespace

void write_mps(const MipModel& model, std::ostream& out) {
  const double sign = model.maximize ? -1.0 : 1.0;
  const auto& vars = model.variables();
  const auto& rows = model.rows();

  // Column-major view of the constraint matrix.
  std::vector<std::vector<std::pair<int, double>>> columns(vars.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [var, c] : rows[r].coeffs) {
      if (c != 0.0) columns[static_cast<std::size_t>(var)].emplace_back(static_cast<int>(r), c);
    }
  }

  fmt::print(out, "* rows {} columns {} integers {} nonzeros {}\n", rows.size(), vars.size(),
             std::count_if(vars.begin(), vars.end(), [](const MipVariable& v) { return v.integer; }),
             model.num_nonzeros());
  if (model.maximize) fmt::print(out, "* maximize: objective coefficients negated\n");
  if (model.objective_offset != 0.0) {
    fmt::print(out, "* objective offset {}\n", num(model.objective_offset));
  }
  fmt::print(out, "NAME          {}\n", model.name);
  fmt::print(out, "ROWS\n");
  fmt::print(out, " N  OBJ\n");
  for (const auto& r : rows) fmt::print(out, " {}  {}\n", sense_code(r.sense), r.name);

  fmt::print(out, "COLUMNS\n");
  bool in_integer_block = false;
  int marker = 0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto& v = vars[i];
    if (v.integer != in_integer_block) {
      fmt::print(out, "    MARKER{:04}  'MARKER'                 '{}'\n", marker++,
                 v.integer ? "INTORG" : "INTEND");
      in_integer_block = v.integer;
    }
    if (v.objective != 0.0) entry(out, v.name, "OBJ", sign * v.objective);
    for (const auto& [row, c] : columns[i]) entry(out, v.name, rows[static_cast<std::size_t>(row)].name, c);
    if (v.objective == 0.0 && columns[i].empty()) entry(out, v.name, "OBJ", 0.0);
  }
  if (in_integer_block) fmt::print(out, "    MARKER{:04}  'MARKER'                 'INTEND'\n", marker++);

  fmt::print(out, "RHS\n");
  for (const auto& r : rows) {
    if (r.rhs != 0.0) entry(out, "RHS", r.name, r.rhs);
  }

  fmt::print(out, "BOUNDS\n");
  for (const auto& v : vars) {
    if (v.integer && v.lower == 0.0 && v.upper == 1.0) {
      fmt::print(out, " BV BND       {}\n", v.name);
      continue;
    }
    if (v.lower == -kInf && v.upper == kInf) {
      fmt::print(out, " FR BND       {}\n", v.name);
      continue;
    }
    if (v.lower == v.upper) {
      fmt::print(out, " FX BND       {:<8}  {:>12}\n", v.name, num(v.lower));
      continue;
    }
    if (v.lower == -kInf) fmt::print(out, " MI BND       {}\n", v.name);
    else if (v.lower != 0.0) fmt::print(out, " LO BND       {:<8}  {:>12}\n", v.name, num(v.lower));
    if (v.upper != kInf) fmt::print(out, " UP BND       {:<8}  {:>12}\n", v.name, num(v.upper));
  }
  fmt::print(out, "ENDATA\n");
}

void write_mps(const MipModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write " + path);
  write_mps(model, out);
}

}  // namespace pesp
