#include "sparse_lu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridplan::milp::detail {

Csc transpose(const Csc& a) {
  Csc t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
  t.ind.resize(a.ind.size());
  t.val.resize(a.val.size());
  for (auto r : a.ind) t.ptr[static_cast<std::size_t>(r) + 1]++;
  for (std::size_t i = 1; i < t.ptr.size(); ++i) t.ptr[i] += t.ptr[i - 1];
  std::vector<std::int32_t> next(t.ptr.begin(), t.ptr.end() - 1);
  for (std::int32_t c = 0; c < a.cols; ++c) {
    for (std::int32_t p = a.ptr[c]; p < a.ptr[c + 1]; ++p) {
      const auto slot = next[a.ind[p]]++;
      t.ind[slot] = c;
      t.val[slot] = a.val[p];
    }
  }
  return t;
}

bool BasisLu::factorize(const Csc& cols, double pivot_rel_tol, double abs_tol) {
  m_ = cols.cols;
  prow_.assign(m_, -1);
  pinv_.assign(m_, -1);
  rejected_.clear();
  leftover_rows_.clear();
  udiag_.assign(m_, 0.0);

  // Static row counts for a Markowitz-flavoured pivot tie-break.
  std::vector<std::int32_t> row_count(m_, 0);
  for (auto r : cols.ind) row_count[r]++;

  // Process sparsest columns first; step s handles input column qcol_[s].
  std::vector<std::int32_t> qcol(m_);
  std::iota(qcol.begin(), qcol.end(), 0);
  std::stable_sort(qcol.begin(), qcol.end(), [&](std::int32_t a, std::int32_t b) {
    return cols.ptr[a + 1] - cols.ptr[a] < cols.ptr[b + 1] - cols.ptr[b];
  });
  qcol_ = qcol;

  // L is accumulated in original-row coordinates and renumbered afterwards.
  Csc lorig;
  lorig.clear(m_, m_);
  lorig.ptr.assign(1, 0);
  upper_.clear(m_, m_);
  upper_.ptr.assign(1, 0);

  IndexedVector x;
  x.resize(static_cast<std::size_t>(m_));
  std::vector<std::int32_t> order;
  mark_.assign(m_, -1);
  stamp_ = 0;
  std::vector<std::int32_t> stack, stack_pos;

  for (std::int32_t step = 0; step < m_; ++step) {
    const std::int32_t j = qcol[step];
    x.clear();
    for (std::int32_t p = cols.ptr[j]; p < cols.ptr[j + 1]; ++p) x.set(cols.ind[p], cols.val[p]);

    // Reach over already-built L columns, following pinv_ indirection.
    order.clear();
    ++stamp_;
    for (std::size_t s0 = 0; s0 < x.idx.size(); ++s0) {
      const std::int32_t start = x.idx[s0];
      if (mark_[start] == stamp_) continue;
      stack.assign(1, start);
      const std::int32_t k0 = pinv_[start];
      stack_pos.assign(1, k0 >= 0 ? lorig.ptr[k0] : 0);
      mark_[start] = stamp_;
      while (!stack.empty()) {
        const std::int32_t node = stack.back();
        const std::int32_t k = pinv_[node];
        const std::int32_t pend = k >= 0 ? lorig.ptr[k + 1] : 0;
        bool descended = false;
        while (stack_pos.back() < pend) {
          const std::int32_t child = lorig.ind[stack_pos.back()++];
          if (mark_[child] != stamp_) {
            mark_[child] = stamp_;
            stack.push_back(child);
            const std::int32_t ck = pinv_[child];
            stack_pos.push_back(ck >= 0 ? lorig.ptr[ck] : 0);
            descended = true;
            break;
          }
        }
        if (!descended && stack_pos.back() >= pend) {
          order.push_back(node);
          stack.pop_back();
          stack_pos.pop_back();
        }
      }
    }
    // Numeric sweep in topological (reverse post) order.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::int32_t i = *it;
      const std::int32_t k = pinv_[i];
      if (k < 0) continue;
      const double t = x.dense[i];
      if (t == 0.0) continue;
      for (std::int32_t p = lorig.ptr[k]; p < lorig.ptr[k + 1]; ++p)
        x.add(lorig.ind[p], -lorig.val[p] * t);
    }

    // Pivot among rows not yet assigned.
    double colmax = 0.0;
    for (auto i : x.idx)
      if (pinv_[i] < 0) colmax = std::max(colmax, std::abs(x.dense[i]));

    if (colmax <= abs_tol) {
      // Dependent column: substitute the logical column of the lowest
      // unassigned row so the factorization stays triangular.
      rejected_.push_back(j);
      std::int32_t r = -1;
      for (std::int32_t i = 0; i < m_; ++i)
        if (pinv_[i] < 0) {
          r = i;
          break;
        }
      prow_[step] = r;
      pinv_[r] = step;
      leftover_rows_.push_back(r);
      udiag_[step] = 1.0;
      lorig.ptr.push_back(static_cast<std::int32_t>(lorig.ind.size()));
      upper_.ptr.push_back(static_cast<std::int32_t>(upper_.ind.size()));
      continue;
    }

    std::int32_t piv = -1;
    std::int32_t best_count = 0;
    double best_abs = 0.0;
    for (auto i : x.idx) {
      if (pinv_[i] >= 0) continue;
      const double a = std::abs(x.dense[i]);
      if (a < pivot_rel_tol * colmax || a <= abs_tol) continue;
      if (piv < 0 || row_count[i] < best_count ||
          (row_count[i] == best_count && (a > best_abs || (a == best_abs && i < piv)))) {
        piv = i;
        best_count = row_count[i];
        best_abs = a;
      }
    }
    const double pivot = x.dense[piv];
    prow_[step] = piv;
    pinv_[piv] = step;
    udiag_[step] = pivot;

    // Deterministic factor content: emit entries in ascending row index.
    std::sort(x.idx.begin(), x.idx.end());
    for (auto i : x.idx) {
      const double v = x.dense[i];
      if (v == 0.0 || i == piv) continue;
      if (pinv_[i] >= 0 && pinv_[i] != step) {
        upper_.ind.push_back(pinv_[i]);
        upper_.val.push_back(v);
      } else if (pinv_[i] < 0) {
        lorig.ind.push_back(i);
        lorig.val.push_back(v / pivot);
      }
    }
    lorig.ptr.push_back(static_cast<std::int32_t>(lorig.ind.size()));
    upper_.ptr.push_back(static_cast<std::int32_t>(upper_.ind.size()));
  }

  // Renumber L into step coordinates (strictly lower by construction).
  lower_ = lorig;
  for (auto& r : lower_.ind) r = pinv_[r];
  lower_t_ = transpose(lower_);
  upper_t_ = transpose(upper_);
  qinv_.assign(m_, 0);
  for (std::int32_t s = 0; s < m_; ++s) qinv_[qcol_[s]] = s;

  work_.resize(static_cast<std::size_t>(m_));
  mark_.assign(m_, -1);
  stamp_ = 0;
  return rejected_.empty();
}

void BasisLu::reach(const Csc& g, const IndexedVector& rhs, std::vector<std::int32_t>& order) const {
  order.clear();
  ++stamp_;
  for (auto start : rhs.idx) {
    if (mark_[start] == stamp_) continue;
    stack_.assign(1, start);
    stack_pos_.assign(1, g.ptr[start]);
    mark_[start] = stamp_;
    while (!stack_.empty()) {
      const std::int32_t node = stack_.back();
      const std::int32_t pend = g.ptr[node + 1];
      bool descended = false;
      while (stack_pos_.back() < pend) {
        const std::int32_t child = g.ind[stack_pos_.back()++];
        if (mark_[child] != stamp_) {
          mark_[child] = stamp_;
          stack_.push_back(child);
          stack_pos_.push_back(g.ptr[child]);
          descended = true;
          break;
        }
      }
      if (!descended && stack_pos_.back() >= pend) {
        order.push_back(node);
        stack_.pop_back();
        stack_pos_.pop_back();
      }
    }
  }
}

void BasisLu::ftran(IndexedVector& x) const {
  // Permute original rows into step space.
  work_.clear();
  for (auto i : x.idx) {
    const double v = x.dense[i];
    if (v != 0.0) work_.set(pinv_[i], v);
  }
  std::swap(x, work_);

  auto& order = order_;
  // Unit lower solve.
  reach(lower_, x, order);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::int32_t k = *it;
    const double t = x.dense[k];
    if (t == 0.0) continue;
    for (std::int32_t p = lower_.ptr[k]; p < lower_.ptr[k + 1]; ++p)
      x.add(lower_.ind[p], -lower_.val[p] * t);
  }
  // Upper solve.
  reach(upper_, x, order);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::int32_t jj = *it;
    double t = x.dense[jj];
    if (t == 0.0) continue;
    t /= udiag_[jj];
    x.dense[jj] = t;
    for (std::int32_t p = upper_.ptr[jj]; p < upper_.ptr[jj + 1]; ++p)
      x.add(upper_.ind[p], -upper_.val[p] * t);
  }
  // Steps back to basis positions.
  work_.clear();
  for (auto s : x.idx) {
    const double v = x.dense[s];
    if (v != 0.0) work_.set(qcol_[s], v);
  }
  std::swap(x, work_);
}

void BasisLu::btran(IndexedVector& x) const {
  // Basis positions into step space.
  work_.clear();
  for (auto j : x.idx) {
    const double v = x.dense[j];
    if (v != 0.0) work_.set(qinv_[j], v);
  }
  std::swap(x, work_);

  auto& order = order_;
  // U^T (lower triangular with diagonal).
  reach(upper_t_, x, order);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::int32_t k = *it;
    double t = x.dense[k];
    if (t == 0.0) continue;
    t /= udiag_[k];
    x.dense[k] = t;
    for (std::int32_t p = upper_t_.ptr[k]; p < upper_t_.ptr[k + 1]; ++p)
      x.add(upper_t_.ind[p], -upper_t_.val[p] * t);
  }
  // L^T (unit upper triangular).
  reach(lower_t_, x, order);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::int32_t i = *it;
    const double t = x.dense[i];
    if (t == 0.0) continue;
    for (std::int32_t p = lower_t_.ptr[i]; p < lower_t_.ptr[i + 1]; ++p)
      x.add(lower_t_.ind[p], -lower_t_.val[p] * t);
  }
  // Steps back to original rows.
  work_.clear();
  for (auto s : x.idx) {
    const double v = x.dense[s];
    if (v != 0.0) work_.set(prow_[s], v);
  }
  std::swap(x, work_);
}

}  // namespace gridplan::milp::detail
