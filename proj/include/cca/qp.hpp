#pragma once

// Dense strictly convex QP:
//
//   minimize    1/2 x' H x
//   subject to  Aeq x = beq,   Aineq x <= bineq
//
// solved with a dual active-set method (Goldfarb-Idnani). The dual method
// starts from the equality-constrained minimizer and adds violated
// inequalities one at a time, so no feasible starting point or auxiliary
// variables are needed. A previous working set can seed the solve.

#include "cca/types.hpp"

#include <vector>

namespace cca {

struct QpOptions {
  // 0 selects the default cap of 10 * (n + q).
  int max_iterations = 0;
  // Row i counts as satisfied when a_i x - b_i <= tol (1 + |b_i|). Commands
  // clipped onto the boundary leave a feasible set that is a single face, so
  // rounding alone can put the solution a few ulps outside.
  double feasibility_tolerance = 1e-9;
  // Inequality indices to treat as active at the start.
  std::vector<int> warm_start;
};

struct QpResult {
  VecX x;
  // Inequality indices active at the solution, in ascending order.
  std::vector<int> active_set;
  VecX eq_multipliers;
  // One entry per inequality; zero for inactive rows.
  VecX ineq_multipliers;
  int iterations = 0;
  double kkt_residual = 0.0;
};

class QpInfeasibleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class QpStalledError : public NumericalError {
 public:
  QpStalledError(const std::string& what, VecX last_iterate)
      : NumericalError(what), last_(std::move(last_iterate)) {}
  const VecX& last_iterate() const { return last_; }

 private:
  VecX last_;
};

// Pass 0 x n matrices (and empty vectors) for absent constraint blocks.
QpResult qp_solve(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
                  const VecX& bineq, const QpOptions& options = {});

// Max-norm of stationarity, equality, inequality violation and complementarity.
double kkt_residual(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
                    const VecX& bineq, const QpResult& r);

}  // namespace cca
