#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gridplan/common.hpp"

namespace gridplan::milp {

enum class VarKind : std::uint8_t { continuous, integer, binary };

enum class RowSense : std::uint8_t { le, eq, ge };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarKind kind = VarKind::continuous;
};

// One sparse linear constraint. Terms reference variable indices and are kept
// in insertion order so LP-format export/import round-trips exactly.
struct Row {
  std::string name;
  std::vector<std::pair<std::int32_t, double>> terms;
  RowSense sense = RowSense::le;
  double rhs = 0.0;
};

// Solver-agnostic sparse MILP, always a minimization.
//
// Row names carry a structural group as the prefix before the first '.'
// (e.g. "pow_balance.n1,t3@s0"); row_group() extracts it. The group tag
// drives the structural audit and the stage transformations of the
// construction heuristic.
class MilpInstance {
 public:
  std::int32_t add_variable(std::string name, double lower, double upper, VarKind kind);

  // Creates an empty row and returns its index.
  std::int32_t add_row(std::string name, RowSense sense, double rhs);

  // Accumulates into an existing term of `row` if `var` is already present.
  void add_term(std::int32_t row, std::int32_t var, double coef);

  // Appends a fully-formed row; terms must reference declared variables and
  // carry no duplicates (cheaper than add_term for long rows).
  std::int32_t add_row_terms(std::string name, RowSense sense, double rhs,
                             std::vector<std::pair<std::int32_t, double>> terms);

  void add_objective(std::int32_t var, double coef);
  void add_objective_constant(double c) { objective_constant_ += c; }

  std::int32_t var_index(std::string_view name) const;        // -1 when absent
  std::int32_t require_var(std::string_view name) const;      // throws when absent
  std::int32_t row_index(std::string_view name) const;        // -1 when absent

  const Variable& variable(std::int32_t i) const { return vars_[i]; }
  Variable& variable(std::int32_t i) { return vars_[i]; }
  const Row& row(std::int32_t i) const { return rows_[i]; }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_coef(std::int32_t var) const { return obj_[var]; }
  double objective_constant() const { return objective_constant_; }

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

  void set_bounds(std::int32_t var, double lower, double upper);
  void set_kind(std::int32_t var, VarKind kind) { vars_[var].kind = kind; }

  // Evaluates a·x for row r at the given point.
  double row_activity(std::int32_t r, const std::vector<double>& x) const;
  // Signed violation of row r (0 when satisfied).
  double row_violation(std::int32_t r, const std::vector<double>& x) const;
  // Max violation over all rows and bounds.
  double max_violation(const std::vector<double>& x) const;

  double objective_value(const std::vector<double>& x) const;

  // Checks structural invariants: unique names, resolvable term indices,
  // lower <= upper, finite coefficients. Throws Error on failure.
  void validate() const;

  // Deletes rows for which pred(row) is true; variable set unchanged.
  void remove_rows_if(const std::function<bool(const Row&)>& pred);

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<double> obj_;  // dense by variable index
  double objective_constant_ = 0.0;
  std::unordered_map<std::string, std::int32_t> var_names_;
  std::unordered_map<std::string, std::int32_t> row_names_;
};

// Group tag of a row name: prefix before the first '.', or the whole name.
std::string_view row_group(std::string_view row_name);

// Row counts keyed by group tag; covers every row (the audit is total).
std::unordered_map<std::string, std::size_t> structural_audit(const MilpInstance& mi);

}  // namespace gridplan::milp
