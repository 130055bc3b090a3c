#pragma once

// Bounded-variable revised primal simplex over the sparse LU kernel.
// Phase 1 minimizes total bound infeasibility of the basic variables
// (composite method); phase 2 prices with devex and falls back to Bland's
// rule after a streak of degenerate pivots so termination is guaranteed.

#include <chrono>
#include <cstdint>
#include <vector>

#include "gridplan/milp/instance.hpp"
#include "sparse_lu.hpp"

namespace gridplan::milp::detail {

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, time_limit };

// Scaled standard form: min c'x over  A x + s = b, lb <= (x,s) <= ub.
// Columns [0,n) are structural, [n, n+m) logicals with unit coefficients.
struct LpCore {
  std::int32_t m = 0, n = 0;
  Csc cols;                      // scaled structural columns
  Csc rows;                      // CSR view of cols (structural part only)
  std::vector<double> lb, ub;    // size n+m, scaled
  std::vector<double> cost;      // size n+m, scaled; logicals zero
  std::vector<double> rhs;       // size m, scaled
  std::vector<double> col_scale; // size n (structural); value scale x = col_scale*x'
  std::vector<double> row_scale; // size m
  double cost_shift = 0.0;

  std::int32_t total() const { return n + m; }
  std::int32_t logical(std::int32_t row) const { return n + row; }
};

// Builds the scaled core from an instance. When relax_integrality is false
// the caller still receives variable kinds via the instance itself; the core
// is kind-agnostic.
LpCore build_core(const MilpInstance& mi, bool scale);

enum : std::int8_t { kAtLower = 0, kAtUpper = 1, kFreeZero = 2, kBasic = 3 };

struct SimplexControls {
  double feas_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-9;
  std::int32_t refactor_interval = 100;
  std::int32_t bland_trigger = 80;
  std::int64_t max_iterations = -1;  // -1: derived from size
  std::chrono::steady_clock::time_point deadline{};
  bool has_deadline = false;
  int verbosity = 0;
};

struct SimplexState {
  std::vector<std::int32_t> basic;  // position -> variable
  std::vector<std::int8_t> vstate;  // variable -> kAtLower/... / kBasic
};

struct LpOutcome {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;  // unscaled, includes cost_shift
  std::int64_t iterations = 0;
};

class Simplex {
 public:
  Simplex(LpCore& core, const SimplexControls& controls);

  // Solves from a fresh logical basis, a caller-provided state, or a hint of
  // (row -> variable) assignments. `state` is both input (when warm=true)
  // and output.
  LpOutcome solve(SimplexState& state, bool warm);

  // Unscaled values for all structurals+logicals of the final point.
  std::vector<double> unscaled_values() const;

  // Installs (row, var) hint assignments into `state`.
  static SimplexState state_from_hint(const LpCore& core,
                                      const std::vector<std::pair<std::int32_t, std::int32_t>>& hint);
  static SimplexState logical_state(const LpCore& core);

  // Primal values of the final basis, scaled space, full n+m vector.
  const std::vector<double>& scaled_values() const { return x_; }

 private:
  struct RatioResult {
    std::int32_t block_pos = -1;  // -1: bound flip of the entering variable
    std::int8_t block_state = 0;
    double t = 0.0;
    bool unbounded = false;
  };

  bool refactorize();
  void assemble_basis(Csc& basis_cols) const;
  void recompute_primal();
  void recompute_duals();
  void ftran(IndexedVector& v) const;  // with eta file
  void btran(IndexedVector& v) const;
  double column_dot(std::int32_t var, const std::vector<double>& dense) const;
  void gather_column(std::int32_t var, IndexedVector& out) const;
  RatioResult ratio_test(std::int32_t q, int dir, bool phase1, double ftol) const;
  double infeasibility() const;
  bool prices_clean(double mult) const;
  void reset_devex();

  struct Eta {
    std::vector<std::pair<std::int32_t, double>> d;  // FTRANed entering column
    std::int32_t pivot_pos;
    double pivot_val;
  };

  LpCore& core_;
  SimplexControls ctl_;
  BasisLu lu_;
  std::vector<Eta> etas_;
  SimplexState* st_ = nullptr;
  std::vector<double> x_;       // current values, scaled, size n+m
  std::vector<double> z_;       // reduced costs (phase 2)
  std::vector<double> devex_;
  std::vector<std::int32_t> pos_of_;  // variable -> basis position or -1
  double dtol_ = 1e-7;
  std::int64_t iters_ = 0;
  std::int32_t degen_streak_ = 0;
  bool bland_ = false;
  mutable IndexedVector work_, work2_, alpha_;
};

}  // namespace gridplan::milp::detail
