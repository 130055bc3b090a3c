#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridplan/milp/instance.hpp"

namespace gridplan::milp {

enum class SolveStatus { optimal, feasible, infeasible, unbounded, time_limit };

std::string to_string(SolveStatus s);

struct SolveOptions {
  double time_limit_s = 900.0;
  double mip_gap = 1e-4;
  double feasibility_tol = 1e-6;
  double integrality_tol = 1e-5;
  std::uint64_t seed = 0;
  std::string backend = "reference";
  int verbosity = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  std::vector<double> values;  // by variable index; empty unless a point exists
  double gap = 0.0;            // |objective - best_bound| / max(1, |objective|)
  double wall_time_s = 0.0;
  std::int64_t simplex_iterations = 0;
  std::int64_t nodes = 0;
  double max_residual = 0.0;  // post-solve row/bound violation audit

  double value(const MilpInstance& mi, std::string_view name) const {
    return values.at(static_cast<std::size_t>(mi.require_var(name)));
  }
};

// Starting-basis hint: (row index, variable index) pairs that form a known
// feasible triangular basis; remaining rows take their logical column.
// Builders that know a trivially feasible recourse point supply one.
struct BasisHint {
  std::vector<std::pair<std::int32_t, std::int32_t>> assignments;
};

SolveResult solve(const MilpInstance& mi, const SolveOptions& options,
                  const BasisHint* hint = nullptr);

// All integrality dropped; otherwise identical to solve().
SolveResult solve_lp_relaxation(const MilpInstance& mi, const SolveOptions& options,
                                const BasisHint* hint = nullptr);

// Returns a copy with lower = upper = value for each named target. Values may
// be snapped into the original bounds by at most 1e-6; larger violations throw.
MilpInstance fix_variables(const MilpInstance& mi,
                           const std::vector<std::pair<std::string, double>>& assignments);

}  // namespace gridplan::milp
