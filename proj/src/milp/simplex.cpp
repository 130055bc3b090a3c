#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace gridplan::milp::detail {

namespace {

double pow2_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) return 1.0;
  const double e = std::round(std::log2(s));
  return std::ldexp(1.0, static_cast<int>(std::max(-10.0, std::min(10.0, e))));
}

}  // namespace

LpCore build_core(const MilpInstance& mi, bool scale) {
  LpCore core;
  core.n = static_cast<std::int32_t>(mi.num_vars());
  core.m = static_cast<std::int32_t>(mi.num_rows());
  core.cost_shift = mi.objective_constant();

  std::vector<std::int32_t> count(core.n, 0);
  std::size_t nnz = 0;
  for (const auto& row : mi.rows()) {
    nnz += row.terms.size();
    for (const auto& [v, c] : row.terms) {
      (void)c;
      count[v]++;
    }
  }
  core.cols.clear(core.m, core.n);
  core.cols.ptr.resize(core.n + 1);
  core.cols.ptr[0] = 0;
  for (std::int32_t j = 0; j < core.n; ++j) core.cols.ptr[j + 1] = core.cols.ptr[j] + count[j];
  core.cols.ind.resize(nnz);
  core.cols.val.resize(nnz);
  std::vector<std::int32_t> next(core.cols.ptr.begin(), core.cols.ptr.end() - 1);
  for (std::int32_t r = 0; r < core.m; ++r) {
    for (const auto& [v, c] : mi.row(r).terms) {
      const auto slot = next[v]++;
      core.cols.ind[slot] = r;
      core.cols.val[slot] = c;
    }
  }

  // Geometric-mean equilibration rounded to powers of two; integer columns
  // keep scale 1 so branching bounds stay exact.
  core.row_scale.assign(core.m, 1.0);
  core.col_scale.assign(core.n, 1.0);
  if (scale) {
    std::vector<double> rmax(core.m, 0.0), rmin(core.m, kInf);
    for (std::int32_t j = 0; j < core.n; ++j) {
      for (std::int32_t p = core.cols.ptr[j]; p < core.cols.ptr[j + 1]; ++p) {
        const double a = std::abs(core.cols.val[p]);
        if (a == 0.0) continue;
        rmax[core.cols.ind[p]] = std::max(rmax[core.cols.ind[p]], a);
        rmin[core.cols.ind[p]] = std::min(rmin[core.cols.ind[p]], a);
      }
    }
    for (std::int32_t r = 0; r < core.m; ++r)
      if (rmax[r] > 0.0) core.row_scale[r] = pow2_scale(1.0 / std::sqrt(rmax[r] * rmin[r]));
    for (std::int32_t j = 0; j < core.n; ++j) {
      if (mi.variable(j).kind != VarKind::continuous) continue;
      double cmax = 0.0, cmin = kInf;
      for (std::int32_t p = core.cols.ptr[j]; p < core.cols.ptr[j + 1]; ++p) {
        const double a = std::abs(core.cols.val[p]) * core.row_scale[core.cols.ind[p]];
        if (a == 0.0) continue;
        cmax = std::max(cmax, a);
        cmin = std::min(cmin, a);
      }
      if (cmax > 0.0) core.col_scale[j] = pow2_scale(1.0 / std::sqrt(cmax * cmin));
    }
  }
  for (std::int32_t j = 0; j < core.n; ++j)
    for (std::int32_t p = core.cols.ptr[j]; p < core.cols.ptr[j + 1]; ++p)
      core.cols.val[p] *= core.row_scale[core.cols.ind[p]] * core.col_scale[j];
  core.rows = transpose(core.cols);

  const auto total = core.n + core.m;
  core.lb.assign(total, 0.0);
  core.ub.assign(total, 0.0);
  core.cost.assign(total, 0.0);
  for (std::int32_t j = 0; j < core.n; ++j) {
    const auto& v = mi.variable(j);
    core.lb[j] = std::isfinite(v.lower) ? v.lower / core.col_scale[j] : -kInf;
    core.ub[j] = std::isfinite(v.upper) ? v.upper / core.col_scale[j] : kInf;
    core.cost[j] = mi.objective_coef(j) * core.col_scale[j];
  }
  core.rhs.assign(core.m, 0.0);
  for (std::int32_t r = 0; r < core.m; ++r) {
    const auto& row = mi.row(r);
    core.rhs[r] = row.rhs * core.row_scale[r];
    const auto lj = core.logical(r);
    switch (row.sense) {
      case RowSense::le: core.lb[lj] = 0.0; core.ub[lj] = kInf; break;
      case RowSense::ge: core.lb[lj] = -kInf; core.ub[lj] = 0.0; break;
      case RowSense::eq: core.lb[lj] = 0.0; core.ub[lj] = 0.0; break;
    }
  }
  return core;
}

Simplex::Simplex(LpCore& core, const SimplexControls& controls) : core_(core), ctl_(controls) {
  const auto total = static_cast<std::size_t>(core_.total());
  x_.assign(total, 0.0);
  z_.assign(total, 0.0);
  devex_.assign(total, 1.0);
  pos_of_.assign(total, -1);
  work_.resize(std::max<std::size_t>(total, core_.m));
  work2_.resize(std::max<std::size_t>(total, core_.m));
  alpha_.resize(total);
}

SimplexState Simplex::logical_state(const LpCore& core) {
  SimplexState st;
  st.basic.resize(core.m);
  st.vstate.assign(core.total(), kAtLower);
  for (std::int32_t j = 0; j < core.total(); ++j) {
    const double lo = core.lb[j], hi = core.ub[j];
    if (std::isfinite(lo) && std::isfinite(hi))
      st.vstate[j] = std::abs(lo) <= std::abs(hi) ? kAtLower : kAtUpper;
    else if (std::isfinite(lo))
      st.vstate[j] = kAtLower;
    else if (std::isfinite(hi))
      st.vstate[j] = kAtUpper;
    else
      st.vstate[j] = kFreeZero;
  }
  for (std::int32_t r = 0; r < core.m; ++r) {
    st.basic[r] = core.logical(r);
    st.vstate[core.logical(r)] = kBasic;
  }
  return st;
}

SimplexState Simplex::state_from_hint(
    const LpCore& core, const std::vector<std::pair<std::int32_t, std::int32_t>>& hint) {
  SimplexState st = logical_state(core);
  for (const auto& [row, var] : hint) {
    if (row < 0 || row >= core.m || var < 0 || var >= core.total()) continue;
    if (st.vstate[var] == kBasic) continue;
    const auto old = st.basic[row];
    if (old != core.logical(row)) continue;
    st.vstate[old] = std::isfinite(core.lb[old]) ? kAtLower
                     : std::isfinite(core.ub[old]) ? kAtUpper
                                                   : kFreeZero;
    st.basic[row] = var;
    st.vstate[var] = kBasic;
  }
  return st;
}

void Simplex::gather_column(std::int32_t var, IndexedVector& out) const {
  out.clear();
  if (var < core_.n) {
    for (std::int32_t p = core_.cols.ptr[var]; p < core_.cols.ptr[var + 1]; ++p)
      out.set(core_.cols.ind[p], core_.cols.val[p]);
  } else {
    out.set(var - core_.n, 1.0);
  }
}

double Simplex::column_dot(std::int32_t var, const std::vector<double>& dense) const {
  if (var >= core_.n) return dense[var - core_.n];
  double s = 0.0;
  for (std::int32_t p = core_.cols.ptr[var]; p < core_.cols.ptr[var + 1]; ++p)
    s += core_.cols.val[p] * dense[core_.cols.ind[p]];
  return s;
}

void Simplex::ftran(IndexedVector& v) const {
  lu_.ftran(v);
  for (const auto& e : etas_) {
    const double yp = v.dense[e.pivot_pos];
    if (yp == 0.0) continue;
    const double t = yp / e.pivot_val;
    v.dense[e.pivot_pos] = 0.0;
    v.set(e.pivot_pos, t);
    for (const auto& [i, dv] : e.d)
      if (i != e.pivot_pos) v.add(i, -dv * t);
  }
}

void Simplex::btran(IndexedVector& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = 0.0;
    for (const auto& [i, dv] : it->d)
      if (i != it->pivot_pos) s += dv * v.dense[i];
    const double wp = (v.dense[it->pivot_pos] - s) / it->pivot_val;
    v.dense[it->pivot_pos] = 0.0;
    if (wp != 0.0) v.set(it->pivot_pos, wp);
  }
  lu_.btran(v);
}

void Simplex::assemble_basis(Csc& basis_cols) const {
  basis_cols.clear(core_.m, core_.m);
  basis_cols.ptr.assign(1, 0);
  for (std::int32_t p = 0; p < core_.m; ++p) {
    const auto var = st_->basic[p];
    if (var < core_.n) {
      for (std::int32_t q = core_.cols.ptr[var]; q < core_.cols.ptr[var + 1]; ++q) {
        basis_cols.ind.push_back(core_.cols.ind[q]);
        basis_cols.val.push_back(core_.cols.val[q]);
      }
    } else {
      basis_cols.ind.push_back(var - core_.n);
      basis_cols.val.push_back(1.0);
    }
    basis_cols.ptr.push_back(static_cast<std::int32_t>(basis_cols.ind.size()));
  }
}

bool Simplex::refactorize() {
  Csc basis_cols;
  for (int attempt = 0; attempt < 3; ++attempt) {
    assemble_basis(basis_cols);
    double bmax = 1.0;
    for (double v : basis_cols.val) bmax = std::max(bmax, std::abs(v));
    if (lu_.factorize(basis_cols, 0.1, 1e-13 * bmax)) {
      etas_.clear();
      return true;
    }
    bool reset = false;
    const auto& rej = lu_.rejected();
    const auto& rows = lu_.leftover_rows();
    for (std::size_t k = 0; k < rej.size(); ++k) {
      const auto pos = rej[k];
      const auto lvar = core_.logical(rows[k]);
      if (st_->vstate[lvar] == kBasic) {
        reset = true;
        break;
      }
      const auto old = st_->basic[pos];
      pos_of_[old] = -1;
      const auto s = std::isfinite(core_.lb[old]) ? kAtLower
                     : std::isfinite(core_.ub[old]) ? kAtUpper
                                                    : kFreeZero;
      st_->vstate[old] = s;
      x_[old] = s == kAtLower ? core_.lb[old] : s == kAtUpper ? core_.ub[old] : 0.0;
      st_->basic[pos] = lvar;
      st_->vstate[lvar] = kBasic;
      pos_of_[lvar] = pos;
    }
    if (reset) {
      *st_ = logical_state(core_);
      std::fill(pos_of_.begin(), pos_of_.end(), -1);
      for (std::int32_t p = 0; p < core_.m; ++p) pos_of_[st_->basic[p]] = p;
      for (std::int32_t j = 0; j < core_.total(); ++j)
        if (st_->vstate[j] != kBasic)
          x_[j] = st_->vstate[j] == kAtLower ? core_.lb[j]
                  : st_->vstate[j] == kAtUpper ? core_.ub[j]
                                               : 0.0;
    }
  }
  etas_.clear();
  return false;
}

void Simplex::recompute_primal() {
  std::vector<double> rhs(core_.rhs.begin(), core_.rhs.end());
  for (std::int32_t j = 0; j < core_.total(); ++j) {
    if (st_->vstate[j] == kBasic) continue;
    const double xj = x_[j];
    if (xj == 0.0) continue;
    if (j < core_.n) {
      for (std::int32_t p = core_.cols.ptr[j]; p < core_.cols.ptr[j + 1]; ++p)
        rhs[core_.cols.ind[p]] -= core_.cols.val[p] * xj;
    } else {
      rhs[j - core_.n] -= xj;
    }
  }
  work_.clear();
  for (std::int32_t r = 0; r < core_.m; ++r)
    if (rhs[r] != 0.0) work_.set(r, rhs[r]);
  ftran(work_);
  for (std::int32_t p = 0; p < core_.m; ++p) x_[st_->basic[p]] = work_.dense[p];
  work_.clear();
}

void Simplex::recompute_duals() {
  work2_.clear();
  for (std::int32_t p = 0; p < core_.m; ++p) {
    const double c = core_.cost[st_->basic[p]];
    if (c != 0.0) work2_.set(p, c);
  }
  btran(work2_);
  for (std::int32_t j = 0; j < core_.total(); ++j) {
    if (st_->vstate[j] == kBasic) {
      z_[j] = 0.0;
      continue;
    }
    z_[j] = core_.cost[j] - column_dot(j, work2_.dense);
  }
  work2_.clear();
}

double Simplex::infeasibility() const {
  double s = 0.0;
  for (std::int32_t p = 0; p < core_.m; ++p) {
    const auto v = st_->basic[p];
    if (std::isfinite(core_.lb[v])) s += std::max(0.0, core_.lb[v] - x_[v]);
    if (std::isfinite(core_.ub[v])) s += std::max(0.0, x_[v] - core_.ub[v]);
  }
  return s;
}

void Simplex::reset_devex() { std::fill(devex_.begin(), devex_.end(), 1.0); }

bool Simplex::prices_clean(double mult) const {
  const double tol = dtol_ * mult;
  for (std::int32_t j = 0; j < core_.total(); ++j) {
    const auto s = st_->vstate[j];
    if (s == kBasic || core_.lb[j] == core_.ub[j]) continue;
    if (s == kAtLower && z_[j] < -tol) return false;
    if (s == kAtUpper && z_[j] > tol) return false;
    if (s == kFreeZero && std::abs(z_[j]) > tol) return false;
  }
  return true;
}

std::vector<double> Simplex::unscaled_values() const {
  std::vector<double> out(core_.n, 0.0);
  for (std::int32_t j = 0; j < core_.n; ++j) out[j] = x_[j] * core_.col_scale[j];
  return out;
}

// Ratio test shared by both phases. Returns the blocking position (-1 for a
// bound flip of the entering variable) and the step length.
Simplex::RatioResult Simplex::ratio_test(std::int32_t q, int dir, bool phase1, double ftol) const {
  RatioResult res;
  const double own_range = core_.ub[q] - core_.lb[q];
  double tmin = std::isfinite(own_range) ? own_range : kInf;
  // Pass 1: smallest blocking step.
  for (auto p : work_.idx) {
    const double dv = work_.dense[p];
    if (std::abs(dv) <= ctl_.pivot_tol) continue;
    const auto v = st_->basic[p];
    const double delta = -dir * dv;
    const double xv = x_[v];
    double bound;
    if (phase1) {
      const bool below = xv < core_.lb[v] - ftol;
      const bool above = xv > core_.ub[v] + ftol;
      if (delta > 0) {
        if (above) continue;
        bound = below ? core_.lb[v] : core_.ub[v];
      } else {
        if (below) continue;
        bound = above ? core_.ub[v] : core_.lb[v];
      }
    } else {
      bound = delta > 0 ? core_.ub[v] : core_.lb[v];
    }
    if (!std::isfinite(bound)) continue;
    const double t = std::max(0.0, (bound - xv) / delta);
    tmin = std::min(tmin, t);
  }
  if (!std::isfinite(tmin)) {
    res.unbounded = true;
    return res;
  }
  // Pass 2: among near-minimal blockers prefer the largest pivot (lowest
  // variable index under Bland's rule).
  const double window = tmin + 1e-9 * (1.0 + tmin);
  double best_piv = 0.0;
  std::int32_t best_var = -1;
  for (auto p : work_.idx) {
    const double dv = work_.dense[p];
    if (std::abs(dv) <= ctl_.pivot_tol) continue;
    const auto v = st_->basic[p];
    const double delta = -dir * dv;
    const double xv = x_[v];
    double bound;
    std::int8_t bstate;
    if (phase1) {
      const bool below = xv < core_.lb[v] - ftol;
      const bool above = xv > core_.ub[v] + ftol;
      if (delta > 0) {
        if (above) continue;
        bound = below ? core_.lb[v] : core_.ub[v];
        bstate = below ? kAtLower : kAtUpper;
      } else {
        if (below) continue;
        bound = above ? core_.ub[v] : core_.lb[v];
        bstate = above ? kAtUpper : kAtLower;
      }
    } else {
      bound = delta > 0 ? core_.ub[v] : core_.lb[v];
      bstate = delta > 0 ? kAtUpper : kAtLower;
    }
    if (!std::isfinite(bound)) continue;
    const double t = std::max(0.0, (bound - xv) / delta);
    if (t > window) continue;
    const bool take = bland_ ? (best_var < 0 || v < best_var)
                             : (std::abs(dv) > std::abs(best_piv) ||
                                (std::abs(dv) == std::abs(best_piv) && (best_var < 0 || v < best_var)));
    if (take) {
      best_piv = dv;
      best_var = v;
      res.block_pos = p;
      res.block_state = bstate;
      res.t = t;
    }
  }
  if (res.block_pos < 0) {
    res.t = own_range;  // bound flip
  }
  return res;
}

LpOutcome Simplex::solve(SimplexState& state, bool warm) {
  LpOutcome out;
  st_ = &state;
  const auto total = core_.total();
  if (!warm || static_cast<std::int32_t>(state.basic.size()) != core_.m ||
      static_cast<std::int32_t>(state.vstate.size()) != total)
    state = logical_state(core_);

  std::fill(pos_of_.begin(), pos_of_.end(), -1);
  for (std::int32_t p = 0; p < core_.m; ++p) pos_of_[state.basic[p]] = p;
  for (std::int32_t j = 0; j < total; ++j) {
    if (state.vstate[j] == kBasic) continue;
    auto s = state.vstate[j];
    if (s == kAtLower && !std::isfinite(core_.lb[j]))
      s = std::isfinite(core_.ub[j]) ? kAtUpper : kFreeZero;
    if (s == kAtUpper && !std::isfinite(core_.ub[j]))
      s = std::isfinite(core_.lb[j]) ? kAtLower : kFreeZero;
    if (s == kFreeZero && (std::isfinite(core_.lb[j]) || std::isfinite(core_.ub[j])))
      s = std::isfinite(core_.lb[j]) ? kAtLower : kAtUpper;
    state.vstate[j] = s;
    x_[j] = s == kAtLower ? core_.lb[j] : s == kAtUpper ? core_.ub[j] : 0.0;
  }

  if (!refactorize()) {
    out.status = LpStatus::iteration_limit;
    return out;
  }
  recompute_primal();

  double cmax = 1.0;
  for (std::int32_t j = 0; j < total; ++j) cmax = std::max(cmax, std::abs(core_.cost[j]));
  dtol_ = ctl_.dual_tol * cmax;
  const double ftol = ctl_.feas_tol;
  const double degen_eps = 1e-10;
  const std::int64_t max_iters =
      ctl_.max_iterations > 0 ? ctl_.max_iterations
                              : 50000 + 60LL * static_cast<std::int64_t>(core_.m + core_.n / 4);
  iters_ = 0;
  degen_streak_ = 0;
  bland_ = false;

  std::vector<double> pi(core_.m, 0.0);
  auto deadline_hit = [&]() {
    return ctl_.has_deadline && (iters_ & 63) == 0 &&
           std::chrono::steady_clock::now() > ctl_.deadline;
  };
  auto finish_limit = [&](LpStatus s) {
    out.status = s;
    out.iterations = iters_;
    return out;
  };
  auto push_eta = [&](std::int32_t pos) {
    Eta e;
    e.pivot_pos = pos;
    e.pivot_val = work_.dense[pos];
    e.d.reserve(work_.idx.size());
    for (auto p : work_.idx)
      if (work_.dense[p] != 0.0) e.d.emplace_back(p, work_.dense[p]);
    etas_.push_back(std::move(e));
  };

  for (int round = 0; round < 8; ++round) {
    // ---------------- Phase 1: drive out bound infeasibility ----------------
    for (;;) {
      if (iters_ >= max_iters) return finish_limit(LpStatus::iteration_limit);
      if (deadline_hit()) return finish_limit(LpStatus::time_limit);

      work2_.clear();
      bool any_infeas = false;
      for (std::int32_t p = 0; p < core_.m; ++p) {
        const auto v = st_->basic[p];
        if (x_[v] < core_.lb[v] - ftol) {
          work2_.set(p, -1.0);
          any_infeas = true;
        } else if (x_[v] > core_.ub[v] + ftol) {
          work2_.set(p, 1.0);
          any_infeas = true;
        }
      }
      if (!any_infeas) {
        work2_.clear();
        break;
      }
      btran(work2_);
      std::fill(pi.begin(), pi.end(), 0.0);
      for (auto r : work2_.idx) pi[r] = work2_.dense[r];
      work2_.clear();

      std::int32_t q = -1;
      double best = 0.0, zq = 0.0;
      for (std::int32_t j = 0; j < total; ++j) {
        const auto s = st_->vstate[j];
        if (s == kBasic || core_.lb[j] == core_.ub[j]) continue;
        const double zeta = -column_dot(j, pi);
        const bool elig = (s == kAtLower && zeta < -dtol_) || (s == kAtUpper && zeta > dtol_) ||
                          (s == kFreeZero && std::abs(zeta) > dtol_);
        if (!elig) continue;
        if (bland_) {
          q = j;
          zq = zeta;
          break;
        }
        if (std::abs(zeta) > best) {
          best = std::abs(zeta);
          q = j;
          zq = zeta;
        }
      }
      if (q < 0) {
        if (infeasibility() > 10.0 * ftol * std::max(1, core_.m))
          return finish_limit(LpStatus::infeasible);
        break;
      }

      const int dir = (st_->vstate[q] == kAtLower || (st_->vstate[q] == kFreeZero && zq < 0)) ? 1 : -1;
      gather_column(q, work_);
      ftran(work_);
      const RatioResult rt = ratio_test(q, dir, /*phase1=*/true, ftol);
      if (rt.unbounded) {
        // Numerically impossible for the infeasibility objective: rebuild.
        work_.clear();
        if (!refactorize()) return finish_limit(LpStatus::iteration_limit);
        recompute_primal();
        ++iters_;
        continue;
      }

      x_[q] += dir * rt.t;
      for (auto p : work_.idx) x_[st_->basic[p]] -= dir * rt.t * work_.dense[p];
      degen_streak_ = rt.t <= degen_eps ? degen_streak_ + 1 : 0;
      bland_ = degen_streak_ > ctl_.bland_trigger;

      bool need_refactor = false;
      if (rt.block_pos < 0) {
        st_->vstate[q] = dir > 0 ? kAtUpper : kAtLower;
        x_[q] = dir > 0 ? core_.ub[q] : core_.lb[q];
      } else {
        const double pivot = work_.dense[rt.block_pos];
        const auto l = st_->basic[rt.block_pos];
        st_->vstate[l] = rt.block_state;
        x_[l] = rt.block_state == kAtLower ? core_.lb[l] : core_.ub[l];
        pos_of_[l] = -1;
        st_->basic[rt.block_pos] = q;
        st_->vstate[q] = kBasic;
        pos_of_[q] = rt.block_pos;
        push_eta(rt.block_pos);
        need_refactor = std::abs(pivot) < 1e-8 ||
                        static_cast<std::int32_t>(etas_.size()) >= ctl_.refactor_interval;
      }
      work_.clear();
      ++iters_;
      if (need_refactor) {
        if (!refactorize()) return finish_limit(LpStatus::iteration_limit);
        recompute_primal();
      }
    }

    // ---------------- Phase 2 ----------------
    recompute_duals();
    reset_devex();
    bland_ = false;
    degen_streak_ = 0;
    bool claim_optimal = false;
    for (;;) {
      if (iters_ >= max_iters) return finish_limit(LpStatus::iteration_limit);
      if (deadline_hit()) return finish_limit(LpStatus::time_limit);

      std::int32_t q = -1;
      double best_score = 0.0;
      for (std::int32_t j = 0; j < total; ++j) {
        const auto s = st_->vstate[j];
        if (s == kBasic || core_.lb[j] == core_.ub[j]) continue;
        const double zj = z_[j];
        const bool elig = (s == kAtLower && zj < -dtol_) || (s == kAtUpper && zj > dtol_) ||
                          (s == kFreeZero && std::abs(zj) > dtol_);
        if (!elig) continue;
        if (bland_) {
          q = j;
          break;
        }
        const double score = zj * zj / devex_[j];
        if (score > best_score) {
          best_score = score;
          q = j;
        }
      }
      if (q < 0) {
        claim_optimal = true;
        break;
      }

      const int dir = (st_->vstate[q] == kAtLower || (st_->vstate[q] == kFreeZero && z_[q] < 0)) ? 1 : -1;
      gather_column(q, work_);
      ftran(work_);
      const RatioResult rt = ratio_test(q, dir, /*phase1=*/false, ftol);
      if (rt.unbounded) {
        work_.clear();
        out.status = LpStatus::unbounded;
        out.iterations = iters_;
        return out;
      }

      x_[q] += dir * rt.t;
      for (auto p : work_.idx) x_[st_->basic[p]] -= dir * rt.t * work_.dense[p];
      degen_streak_ = rt.t <= degen_eps ? degen_streak_ + 1 : 0;
      bland_ = degen_streak_ > ctl_.bland_trigger;

      if (rt.block_pos < 0) {
        st_->vstate[q] = dir > 0 ? kAtUpper : kAtLower;
        x_[q] = dir > 0 ? core_.ub[q] : core_.lb[q];
        work_.clear();
        ++iters_;
        continue;
      }

      // Dual/devex update from the pivot row of the outgoing basis.
      work2_.clear();
      work2_.set(rt.block_pos, 1.0);
      btran(work2_);
      alpha_.clear();
      for (auto r : work2_.idx) {
        const double rv = work2_.dense[r];
        if (rv == 0.0) continue;
        for (std::int32_t p = core_.rows.ptr[r]; p < core_.rows.ptr[r + 1]; ++p)
          alpha_.add(core_.rows.ind[p], core_.rows.val[p] * rv);
        alpha_.add(core_.n + r, rv);
      }
      work2_.clear();

      const double pivot = work_.dense[rt.block_pos];
      const double zq = z_[q];
      const double ratio0 = zq / pivot;
      const auto l = st_->basic[rt.block_pos];
      const double wq = std::max(devex_[q], 1.0);

      st_->vstate[l] = rt.block_state;
      x_[l] = rt.block_state == kAtLower ? core_.lb[l] : core_.ub[l];
      pos_of_[l] = -1;
      st_->basic[rt.block_pos] = q;
      st_->vstate[q] = kBasic;
      pos_of_[q] = rt.block_pos;

      for (auto j : alpha_.idx) {
        if (st_->vstate[j] == kBasic) continue;
        const double aj = alpha_.dense[j];
        if (aj == 0.0) continue;
        z_[j] -= ratio0 * aj;
        const double cand = (aj / pivot) * (aj / pivot) * wq;
        if (cand > devex_[j]) devex_[j] = cand;
      }
      z_[q] = 0.0;
      z_[l] = -ratio0;
      devex_[l] = std::max(wq / (pivot * pivot), 1.0);
      if (devex_[l] > 1e10) reset_devex();
      alpha_.clear();

      push_eta(rt.block_pos);
      work_.clear();
      ++iters_;

      if (std::abs(pivot) < 1e-8 ||
          static_cast<std::int32_t>(etas_.size()) >= ctl_.refactor_interval) {
        if (!refactorize()) return finish_limit(LpStatus::iteration_limit);
        recompute_primal();
        recompute_duals();
      }
    }

    if (claim_optimal) {
      if (!refactorize()) return finish_limit(LpStatus::iteration_limit);
      recompute_primal();
      recompute_duals();
      if (infeasibility() > ftol * std::max(1, core_.m) || !prices_clean(10.0)) continue;
      out.status = LpStatus::optimal;
      break;
    }
  }

  if (out.status != LpStatus::optimal) out.status = LpStatus::iteration_limit;
  out.iterations = iters_;
  double obj = core_.cost_shift;
  for (std::int32_t j = 0; j < total; ++j)
    if (core_.cost[j] != 0.0) obj += core_.cost[j] * x_[j];
  out.objective = obj;
  return out;
}

}  // namespace gridplan::milp::detail
