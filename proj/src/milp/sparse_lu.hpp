#pragma once

// Sparse LU machinery for the reference simplex: left-looking factorization
// with threshold partial pivoting and Gilbert-Peierls style sparse
// triangular solves. Everything is deterministic: ties break on the lowest
// index.

#include <cstdint>
#include <vector>

namespace gridplan::milp::detail {

// Dense vector with an explicit nonzero index list so sparse results can be
// traversed and cleared in O(nnz).
struct IndexedVector {
  std::vector<double> dense;
  std::vector<std::int32_t> idx;

  void resize(std::size_t n) {
    dense.assign(n, 0.0);
    idx.clear();
  }
  void clear() {
    for (auto i : idx) dense[i] = 0.0;
    idx.clear();
  }
  void set(std::int32_t i, double v) {
    if (dense[i] == 0.0 && v != 0.0) idx.push_back(i);
    dense[i] = v;
  }
  void add(std::int32_t i, double v) {
    if (dense[i] == 0.0 && v != 0.0) idx.push_back(i);
    dense[i] += v;
  }
};

// Compressed sparse column matrix; also used for CSR views of transposes.
struct Csc {
  std::int32_t rows = 0, cols = 0;
  std::vector<std::int32_t> ptr;  // size cols+1
  std::vector<std::int32_t> ind;
  std::vector<double> val;

  void clear(std::int32_t r, std::int32_t c) {
    rows = r;
    cols = c;
    ptr.assign(static_cast<std::size_t>(c) + 1, 0);
    ind.clear();
    val.clear();
  }
};

Csc transpose(const Csc& a);

// LU of a basis matrix B (m x m) given by columns. Produces, in "step"
// coordinates (step = input column position):
//   B[prow[k]][j] = (L U)[k][j],  L unit lower, U upper.
// Columns that cannot attain an acceptable pivot are reported in `rejected`
// and replaced by logical (identity) columns of the leftover rows.
class BasisLu {
 public:
  // cols: CSC with m columns over m rows (original row indices).
  // pivot_rel_tol: candidate must be >= tol * max|candidate| in its column.
  // Returns false when the factorization needed repairs (rejected nonempty).
  bool factorize(const Csc& cols, double pivot_rel_tol, double abs_tol);

  // x := B^-1 x (x indexed by original rows in, basis position out).
  void ftran(IndexedVector& x) const;
  // x := B^-T x (x indexed by basis position in, original rows out).
  void btran(IndexedVector& x) const;

  std::int32_t dim() const { return m_; }
  const std::vector<std::int32_t>& rejected() const { return rejected_; }
  const std::vector<std::int32_t>& leftover_rows() const { return leftover_rows_; }
  // fill-in statistic: nnz(L)+nnz(U)
  std::size_t factor_nnz() const { return lower_.ind.size() + upper_.ind.size() + m_; }

 private:
  // Topological reach of rhs pattern over graph cols; appends post-order.
  void reach(const Csc& g, const IndexedVector& rhs, std::vector<std::int32_t>& order) const;

  std::int32_t m_ = 0;
  Csc lower_, upper_;          // step coords; lower_ strictly lower, unit diag
  Csc lower_t_, upper_t_;      // transposes for btran
  std::vector<double> udiag_;
  std::vector<std::int32_t> prow_, pinv_;   // step <-> original row
  std::vector<std::int32_t> qcol_, qinv_;   // step <-> basis position
  std::vector<std::int32_t> rejected_;
  std::vector<std::int32_t> leftover_rows_;

  mutable std::vector<std::int32_t> mark_, stack_, stack_pos_, order_;
  mutable std::int32_t stamp_ = 0;
  mutable IndexedVector work_;
};

}  // namespace gridplan::milp::detail
