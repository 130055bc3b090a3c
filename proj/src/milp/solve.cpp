#include "gridplan/milp/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "simplex.hpp"

namespace gridplan::milp {

namespace {

using Clock = std::chrono::steady_clock;
using detail::LpCore;
using detail::LpOutcome;
using detail::LpStatus;
using detail::Simplex;
using detail::SimplexControls;
using detail::SimplexState;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct BoundChange {
  std::int32_t var;
  double lower, upper;
};

struct Node {
  double bound;
  std::int64_t id;
  std::vector<BoundChange> changes;  // cumulative from root
  SimplexState basis;                // parent's optimal basis (may be empty)
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

SimplexControls make_controls(const SolveOptions& opt, Clock::time_point t0) {
  SimplexControls ctl;
  ctl.feas_tol = 1e-7;
  ctl.dual_tol = 1e-7;
  ctl.verbosity = opt.verbosity;
  if (opt.time_limit_s > 0) {
    ctl.deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(opt.time_limit_s));
    ctl.has_deadline = true;
  }
  return ctl;
}

SolveResult reference_solve(const MilpInstance& mi, const SolveOptions& opt, const BasisHint* hint,
                            bool relax) {
  mi.validate();
  const auto t0 = Clock::now();
  SolveResult res;

  LpCore core = detail::build_core(mi, /*scale=*/true);
  SimplexControls ctl = make_controls(opt, t0);
  Simplex splx(core, ctl);

  std::vector<std::int32_t> int_vars;
  if (!relax)
    for (std::size_t j = 0; j < mi.num_vars(); ++j)
      if (mi.variable(j).kind != VarKind::continuous)
        int_vars.push_back(static_cast<std::int32_t>(j));

  SimplexState state = hint ? Simplex::state_from_hint(core, hint->assignments)
                            : Simplex::logical_state(core);
  LpOutcome root = splx.solve(state, true);
  res.simplex_iterations += root.iterations;

  auto finalize_lp_status = [&](LpStatus s) {
    switch (s) {
      case LpStatus::infeasible: res.status = SolveStatus::infeasible; break;
      case LpStatus::unbounded: res.status = SolveStatus::unbounded; break;
      case LpStatus::time_limit: res.status = SolveStatus::time_limit; break;
      default: res.status = SolveStatus::time_limit; break;
    }
  };

  if (root.status != LpStatus::optimal) {
    finalize_lp_status(root.status);
    res.wall_time_s = seconds_since(t0);
    return res;
  }

  auto fractional = [&](const std::vector<double>& x) {
    std::int32_t worst = -1;
    double worst_dist = kInf;
    for (auto j : int_vars) {
      const double f = x[j] - std::round(x[j]);
      if (std::abs(f) <= opt.integrality_tol) continue;
      const double frac = x[j] - std::floor(x[j]);
      const double dist = std::abs(frac - 0.5);
      if (dist < worst_dist - 1e-12) {
        worst_dist = dist;
        worst = j;
      }
    }
    return worst;
  };

  const std::vector<double> root_x = splx.unscaled_values();
  const std::int32_t root_frac = int_vars.empty() ? -1 : fractional(root_x);
  if (root_frac < 0) {
    res.status = SolveStatus::optimal;
    res.objective = root.objective;
    res.best_bound = root.objective;
    res.values = root_x;
    res.gap = 0.0;
    res.nodes = 1;
    res.max_residual = mi.max_violation(res.values);
    res.wall_time_s = seconds_since(t0);
    return res;
  }

  // Branch and bound: best-bound selection, most-fractional branching.
  const std::vector<double> lb0 = core.lb, ub0 = core.ub;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  double incumbent_obj = kInf;
  std::vector<double> incumbent_x;
  double global_lb = root.objective;
  std::int64_t nodes_solved = 1;
  bool hit_limit = false;

  auto push_children = [&](const std::vector<double>& x, std::int32_t var,
                           const std::vector<BoundChange>& base, double bound,
                           const SimplexState& basis) {
    const double fl = std::floor(x[var]);
    for (int side = 0; side < 2; ++side) {
      Node child;
      child.bound = bound;
      child.id = next_id++;
      child.changes = base;
      double lo = mi.variable(var).lower, hi = mi.variable(var).upper;
      for (const auto& bc : child.changes)
        if (bc.var == var) {
          lo = bc.lower;
          hi = bc.upper;
        }
      if (side == 0)
        hi = std::min(hi, fl);
      else
        lo = std::max(lo, fl + 1.0);
      if (lo > hi + 1e-9) continue;
      child.changes.push_back(BoundChange{var, lo, hi});
      child.basis = basis;
      open.push(std::move(child));
    }
  };

  push_children(root_x, root_frac, {}, root.objective, state);

  const std::int64_t node_limit = 2000000;
  while (!open.empty()) {
    if (opt.time_limit_s > 0 && seconds_since(t0) > opt.time_limit_s) {
      hit_limit = true;
      break;
    }
    if (nodes_solved > node_limit) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    global_lb = std::max(global_lb, std::min(node.bound, incumbent_obj));
    if (node.bound >= incumbent_obj - 1e-9 * std::max(1.0, std::abs(incumbent_obj))) {
      // Best-bound order: everything remaining is dominated.
      global_lb = incumbent_obj;
      break;
    }
    if (std::isfinite(incumbent_obj)) {
      const double gap = (incumbent_obj - global_lb) / std::max(1.0, std::abs(incumbent_obj));
      if (gap <= opt.mip_gap) break;
    }

    // Apply node bounds (integer columns are unscaled in the core).
    for (const auto& bc : node.changes) {
      core.lb[bc.var] = bc.lower;
      core.ub[bc.var] = bc.upper;
    }
    SimplexState nstate = node.basis.basic.empty() ? Simplex::logical_state(core) : node.basis;
    LpOutcome sub = splx.solve(nstate, true);
    res.simplex_iterations += sub.iterations;
    ++nodes_solved;
    for (const auto& bc : node.changes) {
      core.lb[bc.var] = lb0[bc.var];
      core.ub[bc.var] = ub0[bc.var];
    }

    if (sub.status == LpStatus::time_limit || sub.status == LpStatus::iteration_limit) {
      hit_limit = true;
      break;
    }
    if (sub.status != LpStatus::optimal) continue;  // infeasible child
    if (sub.objective >= incumbent_obj - 1e-9 * std::max(1.0, std::abs(incumbent_obj))) continue;

    const std::vector<double> x = splx.unscaled_values();
    const std::int32_t frac = fractional(x);
    if (frac < 0) {
      incumbent_obj = sub.objective;
      incumbent_x = x;
    } else {
      push_children(x, frac, node.changes, sub.objective, nstate);
    }
  }

  if (open.empty() && !hit_limit) global_lb = std::min(global_lb, incumbent_obj);

  res.nodes = nodes_solved;
  res.wall_time_s = seconds_since(t0);
  if (!std::isfinite(incumbent_obj)) {
    if (hit_limit) {
      res.status = SolveStatus::time_limit;
      res.best_bound = global_lb;
    } else {
      res.status = SolveStatus::infeasible;
    }
    return res;
  }
  res.objective = incumbent_obj;
  res.values = std::move(incumbent_x);
  res.best_bound = std::min(global_lb, incumbent_obj);
  res.gap = std::abs(res.objective - res.best_bound) / std::max(1.0, std::abs(res.objective));
  res.max_residual = mi.max_violation(res.values);
  if (hit_limit && res.gap > opt.mip_gap)
    res.status = SolveStatus::time_limit;
  else if (res.gap <= opt.mip_gap)
    res.status = SolveStatus::optimal;
  else
    res.status = SolveStatus::feasible;
  // Contract: never report optimal with a violated row.
  if (res.status == SolveStatus::optimal && res.max_residual > opt.feasibility_tol)
    res.status = SolveStatus::feasible;
  return res;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::feasible: return "feasible";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

SolveResult solve_with_command_backend(const MilpInstance& mi, const SolveOptions& options);

SolveResult solve(const MilpInstance& mi, const SolveOptions& options, const BasisHint* hint) {
  if (options.backend == "reference") return reference_solve(mi, options, hint, false);
  return solve_with_command_backend(mi, options);
}

SolveResult solve_lp_relaxation(const MilpInstance& mi, const SolveOptions& options,
                                const BasisHint* hint) {
  if (options.backend == "reference") return reference_solve(mi, options, hint, true);
  MilpInstance relaxed = mi;
  for (std::size_t j = 0; j < relaxed.num_vars(); ++j)
    relaxed.set_kind(static_cast<std::int32_t>(j), VarKind::continuous);
  return solve_with_command_backend(relaxed, options);
}

MilpInstance fix_variables(const MilpInstance& mi,
                           const std::vector<std::pair<std::string, double>>& assignments) {
  MilpInstance out = mi;
  for (const auto& [name, value] : assignments) {
    const auto j = out.require_var(name);
    const auto& v = out.variable(j);
    double snapped = std::min(std::max(value, v.lower), v.upper);
    if (std::abs(snapped - value) > 1e-6)
      throw Error("fix_variables: value " + std::to_string(value) + " outside bounds of " + name);
    out.set_bounds(j, snapped, snapped);
  }
  return out;
}

}  // namespace gridplan::milp
