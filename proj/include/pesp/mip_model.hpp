#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

namespace pesp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct MipVariable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool integer = false;
  double objective = 0.0;
};

enum class RowSense { LessEqual, GreaterEqual, Equal };

struct MipRow {
  std::string name;
  std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

/// Backend-agnostic in-memory mixed-integer model.
class MipModel {
 public:
  std::string name = "PESP";
  bool maximize = true;
  double objective_offset = 0.0;

  int add_variable(MipVariable v);
  int add_binary(const std::string& name, double objective);
  int add_continuous(const std::string& name, double objective, double lower = 0.0,
                     double upper = kInf);
  int add_row(MipRow row);

  const std::vector<MipVariable>& variables() const { return vars_; }
  const std::vector<MipRow>& rows() const { return rows_; }
  std::vector<MipVariable>& variables() { return vars_; }
  /// -1 if absent.
  int find_variable(const std::string& name) const;
  std::size_t num_binaries() const;
  std::size_t num_nonzeros() const;

  /// Objective value of a point (including the offset).
  double objective_value(const std::vector<double>& x) const;
  /// Largest violation of bounds, rows and integrality at x.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<MipVariable> vars_;
  std::vector<MipRow> rows_;
  std::unordered_map<std::string, int> index_;
};

/// Fixed-format MPS. MPS minimizes, so a maximization model is written with
/// negated objective coefficients (noted in a comment line). Output is a pure
/// function of the model.
void write_mps(const MipModel& model, std::ostream& out);
void write_mps(const MipModel& model, const std::string& path);

}  // namespace pesp
