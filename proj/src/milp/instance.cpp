#include "gridplan/milp/instance.hpp"

#include <algorithm>
#include <cmath>

namespace gridplan::milp {

std::int32_t MilpInstance::add_variable(std::string name, double lower, double upper, VarKind kind) {
  if (var_names_.count(name)) throw Error("duplicate variable registration: " + name);
  if (kind == VarKind::binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (lower > upper) throw Error("variable " + name + ": lower > upper");
  const auto idx = static_cast<std::int32_t>(vars_.size());
  var_names_.emplace(name, idx);
  vars_.push_back(Variable{std::move(name), lower, upper, kind});
  obj_.push_back(0.0);
  return idx;
}

std::int32_t MilpInstance::add_row(std::string name, RowSense sense, double rhs) {
  if (row_names_.count(name)) throw Error("duplicate row registration: " + name);
  const auto idx = static_cast<std::int32_t>(rows_.size());
  row_names_.emplace(name, idx);
  rows_.push_back(Row{std::move(name), {}, sense, rhs});
  return idx;
}

void MilpInstance::add_term(std::int32_t row, std::int32_t var, double coef) {
  if (var < 0 || var >= static_cast<std::int32_t>(vars_.size()))
    throw Error("row term references unknown variable index");
  auto& terms = rows_[row].terms;
  for (auto& [v, c] : terms) {
    if (v == var) {
      c += coef;
      return;
    }
  }
  terms.emplace_back(var, coef);
}

std::int32_t MilpInstance::add_row_terms(std::string name, RowSense sense, double rhs,
                                         std::vector<std::pair<std::int32_t, double>> terms) {
  const auto idx = add_row(std::move(name), sense, rhs);
  for (const auto& [v, c] : terms) {
    if (v < 0 || v >= static_cast<std::int32_t>(vars_.size()))
      throw Error("row term references unknown variable index in row " + rows_[idx].name);
    (void)c;
  }
  rows_[idx].terms = std::move(terms);
  return idx;
}

void MilpInstance::add_objective(std::int32_t var, double coef) { obj_[var] += coef; }

std::int32_t MilpInstance::var_index(std::string_view name) const {
  auto it = var_names_.find(std::string(name));
  return it == var_names_.end() ? -1 : it->second;
}

std::int32_t MilpInstance::require_var(std::string_view name) const {
  const auto idx = var_index(name);
  if (idx < 0) throw Error("unknown variable: " + std::string(name));
  return idx;
}

std::int32_t MilpInstance::row_index(std::string_view name) const {
  auto it = row_names_.find(std::string(name));
  return it == row_names_.end() ? -1 : it->second;
}

void MilpInstance::set_bounds(std::int32_t var, double lower, double upper) {
  if (lower > upper) throw Error("set_bounds: lower > upper for " + vars_[var].name);
  vars_[var].lower = lower;
  vars_[var].upper = upper;
}

double MilpInstance::row_activity(std::int32_t r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& [v, c] : rows_[r].terms) a += c * x[v];
  return a;
}

double MilpInstance::row_violation(std::int32_t r, const std::vector<double>& x) const {
  const double a = row_activity(r, x);
  const Row& row = rows_[r];
  switch (row.sense) {
    case RowSense::le: return std::max(0.0, a - row.rhs);
    case RowSense::ge: return std::max(0.0, row.rhs - a);
    case RowSense::eq: return std::abs(a - row.rhs);
  }
  return 0.0;
}

double MilpInstance::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_.size(); ++r)
    worst = std::max(worst, row_violation(static_cast<std::int32_t>(r), x));
  for (std::size_t v = 0; v < vars_.size(); ++v) {
    worst = std::max(worst, vars_[v].lower - x[v]);
    worst = std::max(worst, x[v] - vars_[v].upper);
  }
  return worst;
}

double MilpInstance::objective_value(const std::vector<double>& x) const {
  double z = objective_constant_;
  for (std::size_t v = 0; v < vars_.size(); ++v) z += obj_[v] * x[v];
  return z;
}

void MilpInstance::validate() const {
  if (var_names_.size() != vars_.size()) throw Error("variable registry out of sync");
  for (const auto& v : vars_) {
    if (!(v.lower <= v.upper)) throw Error("variable " + v.name + ": lower > upper");
    if (std::isnan(v.lower) || std::isnan(v.upper)) throw Error("variable " + v.name + ": NaN bound");
  }
  for (const auto& row : rows_) {
    std::vector<std::int32_t> seen;
    seen.reserve(row.terms.size());
    for (const auto& [v, c] : row.terms) {
      if (v < 0 || v >= static_cast<std::int32_t>(vars_.size()))
        throw Error("row " + row.name + " references unknown variable");
      if (!std::isfinite(c)) throw Error("row " + row.name + " has non-finite coefficient");
      seen.push_back(v);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw Error("row " + row.name + " has duplicate variable terms");
    if (!std::isfinite(row.rhs)) throw Error("row " + row.name + " has non-finite rhs");
  }
  for (double c : obj_)
    if (!std::isfinite(c)) throw Error("objective has non-finite coefficient");
}

void MilpInstance::remove_rows_if(const std::function<bool(const Row&)>& pred) {
  std::vector<Row> kept;
  kept.reserve(rows_.size());
  row_names_.clear();
  for (auto& row : rows_) {
    if (!pred(row)) {
      row_names_.emplace(row.name, static_cast<std::int32_t>(kept.size()));
      kept.push_back(std::move(row));
    }
  }
  rows_ = std::move(kept);
}

std::string_view row_group(std::string_view row_name) {
  const auto dot = row_name.find('.');
  return dot == std::string_view::npos ? row_name : row_name.substr(0, dot);
}

std::unordered_map<std::string, std::size_t> structural_audit(const MilpInstance& mi) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& row : mi.rows()) counts[std::string(row_group(row.name))]++;
  return counts;
}

}  // namespace gridplan::milp
