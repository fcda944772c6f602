#include "cca/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Equality-constrained subproblems over the rows currently held as equalities.
class WorkingSet {
 public:
  WorkingSet(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
             const VecX& bineq)
      : llt_(H), Aeq_(Aeq), beq_(beq), Aineq_(Aineq), bineq_(bineq) {
    if (llt_.info() != Eigen::Success) throw InputError("qp: H is not positive definite");
  }

  int n() const { return static_cast<int>(Aeq_.cols()); }
  int eq_count() const { return static_cast<int>(eq_.size()); }
  const std::vector<int>& ineq() const { return ineq_; }

  void set_equalities(std::vector<int> rows) { eq_ = std::move(rows); }
  void push(int row) { ineq_.push_back(row); }
  void erase(int pos) { ineq_.erase(ineq_.begin() + pos); }

  MatX rows() const {
    MatX N(eq_count() + static_cast<int>(ineq_.size()), n());
    for (int i = 0; i < eq_count(); ++i) N.row(i) = Aeq_.row(eq_[i]);
    for (std::size_t i = 0; i < ineq_.size(); ++i) {
      N.row(eq_count() + static_cast<int>(i)) = Aineq_.row(ineq_[i]);
    }
    return N;
  }

  VecX rhs() const {
    VecX c(eq_count() + static_cast<int>(ineq_.size()));
    for (int i = 0; i < eq_count(); ++i) c[i] = beq_[eq_[i]];
    for (std::size_t i = 0; i < ineq_.size(); ++i) c[eq_count() + static_cast<int>(i)] = bineq_[ineq_[i]];
    return c;
  }

  // Minimizer with every working row held at equality; nu satisfies H x + N' nu = 0.
  void solve(VecX& x, VecX& nu) const {
    const MatX N = rows();
    if (N.rows() == 0) {
      x = VecX::Zero(n());
      nu.resize(0);
      return;
    }
    const MatX J = llt_.matrixL().solve(N.transpose());
    const MatX S = J.transpose() * J;
    nu = -S.ldlt().solve(rhs());
    x = -llt_.solve(N.transpose() * nu);
  }

  // Step directions for adding constraint row a: H z + N' r = -a, N z = 0.
  void directions(const VecX& a, VecX& z, VecX& r) const {
    const MatX N = rows();
    if (N.rows() == 0) {
      r.resize(0);
      z = -llt_.solve(a);
      return;
    }
    const MatX J = llt_.matrixL().solve(N.transpose());
    const MatX S = J.transpose() * J;
    r = -S.ldlt().solve(N * llt_.solve(a));
    z = -llt_.solve(a + N.transpose() * r);
  }

  VecX unconstrained_step(const VecX& a) const { return llt_.solve(a); }

 private:
  Eigen::LLT<MatX> llt_;
  const MatX& Aeq_;
  const VecX& beq_;
  const MatX& Aineq_;
  const VecX& bineq_;
  std::vector<int> eq_;
  std::vector<int> ineq_;
};

int matrix_rank(const MatX& rows) {
  if (rows.rows() == 0) return 0;
  Eigen::FullPivLU<MatX> lu(rows);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

void check_dims(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
                const VecX& bineq) {
  const auto n = H.rows();
  if (H.cols() != n) throw InputError("qp: H must be square");
  if (Aeq.cols() != n || Aeq.rows() != beq.size()) {
    throw InputError("qp: equality block has inconsistent dimensions");
  }
  if (Aineq.cols() != n || Aineq.rows() != bineq.size()) {
    throw InputError("qp: inequality block has inconsistent dimensions");
  }
}

}  // namespace

double kkt_residual(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
                    const VecX& bineq, const QpResult& r) {
  VecX grad = H * r.x;
  if (Aeq.rows() > 0) grad += Aeq.transpose() * r.eq_multipliers;
  if (Aineq.rows() > 0) grad += Aineq.transpose() * r.ineq_multipliers;
  double res = grad.lpNorm<Eigen::Infinity>();
  if (Aeq.rows() > 0) res = std::max(res, (Aeq * r.x - beq).lpNorm<Eigen::Infinity>());
  if (Aineq.rows() > 0) {
    const VecX slack = Aineq * r.x - bineq;
    res = std::max(res, std::max(0.0, slack.maxCoeff()));
    res = std::max(res, std::max(0.0, -r.ineq_multipliers.minCoeff()));
    res = std::max(res, r.ineq_multipliers.cwiseProduct(slack).lpNorm<Eigen::Infinity>());
  }
  return res;
}

QpResult qp_solve(const MatX& H, const MatX& Aeq, const VecX& beq, const MatX& Aineq,
                  const VecX& bineq, const QpOptions& options) {
  check_dims(H, Aeq, beq, Aineq, bineq);
  const int n = static_cast<int>(H.rows());
  const int me = static_cast<int>(Aeq.rows());
  const int q = static_cast<int>(Aineq.rows());
  const int cap = options.max_iterations > 0 ? options.max_iterations : 10 * (n + q);
  const double eq_tol = 1e-8 * (1.0 + beq.lpNorm<Eigen::Infinity>());

  WorkingSet ws(H, Aeq, beq, Aineq, bineq);

  // Keep a linearly independent subset of the equality rows.
  std::vector<int> eq_rows;
  {
    MatX kept(0, n);
    for (int i = 0; i < me; ++i) {
      MatX trial(kept.rows() + 1, n);
      trial << kept, Aeq.row(i);
      if (matrix_rank(trial) == trial.rows()) {
        kept = trial;
        eq_rows.push_back(i);
      }
    }
  }
  ws.set_equalities(eq_rows);

  // Seed from the warm-start rows, skipping dependent ones.
  std::vector<bool> in_set(static_cast<std::size_t>(q), false);
  for (int row : options.warm_start) {
    if (row < 0 || row >= q || in_set[row]) continue;
    ws.push(row);
    if (matrix_rank(ws.rows()) < ws.eq_count() + static_cast<int>(ws.ineq().size())) {
      ws.erase(static_cast<int>(ws.ineq().size()) - 1);
      continue;
    }
    in_set[row] = true;
  }

  VecX x;
  VecX nu;
  for (;;) {
    ws.solve(x, nu);
    int worst = -1;
    double most_negative = 0.0;
    for (std::size_t i = 0; i < ws.ineq().size(); ++i) {
      const double lam = nu[ws.eq_count() + static_cast<int>(i)];
      if (lam < most_negative) {
        most_negative = lam;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;
    in_set[ws.ineq()[worst]] = false;
    ws.erase(worst);
  }

  if (me > 0 && (Aeq * x - beq).lpNorm<Eigen::Infinity>() > eq_tol) {
    throw QpInfeasibleError("qp: infeasible equality system");
  }

  int iterations = 0;
  for (;;) {
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < q; ++i) {
      if (in_set[i]) continue;
      const double norm = Aineq.row(i).norm();
      const double tol = options.feasibility_tolerance * (1.0 + std::abs(bineq[i]));
      if (norm == 0.0) {
        if (bineq[i] < -tol) {
          throw QpInfeasibleError("qp: zero inequality row " + std::to_string(i) +
                                  " with negative bound");
        }
        continue;
      }
      const double violation = Aineq.row(i).dot(x) - bineq[i];
      if (violation <= tol) continue;
      const double s = violation / norm;
      if (s > worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;

    const VecX a = Aineq.row(p).transpose();
    const double free_norm = ws.unconstrained_step(a).norm();
    double lambda_p = 0.0;
    for (;;) {
      if (++iterations > cap) {
        throw QpStalledError("QP stalled after " + std::to_string(cap) + " iterations", x);
      }
      VecX z;
      VecX r;
      ws.directions(a, z, r);
      const double slack = a.dot(x) - bineq[p];
      const double az = a.dot(z);
      const bool z_zero = z.norm() <= 1e-12 * free_norm;

      double t2 = kInf;
      if (!z_zero && az < 0.0) t2 = -slack / az;

      double t1 = kInf;
      int drop = -1;
      for (std::size_t i = 0; i < ws.ineq().size(); ++i) {
        const int k = ws.eq_count() + static_cast<int>(i);
        if (r[k] < 0.0) {
          const double ratio = -nu[k] / r[k];
          if (ratio < t1) {
            t1 = ratio;
            drop = static_cast<int>(i);
          }
        }
      }

      if (t1 == kInf && t2 == kInf) {
        throw QpInfeasibleError("qp: inequality " + std::to_string(p) +
                                " cannot be satisfied together with the working set");
      }

      const double t = std::min(t1, t2);
      if (t2 != kInf) x += t * z;
      if (r.size() > 0) nu += t * r;
      lambda_p += t;

      if (t2 <= t1) {
        ws.push(p);
        in_set[p] = true;
        nu.conservativeResize(nu.size() + 1);
        nu[nu.size() - 1] = lambda_p;
        break;
      }
      in_set[ws.ineq()[drop]] = false;
      const int k = ws.eq_count() + drop;
      VecX trimmed(nu.size() - 1);
      trimmed << nu.head(k), nu.tail(nu.size() - k - 1);
      nu = trimmed;
      ws.erase(drop);
    }
  }

  // Re-solve on the final working set to shed accumulated rounding.
  ws.solve(x, nu);

  QpResult result;
  result.x = x;
  result.iterations = iterations;
  result.eq_multipliers = VecX::Zero(me);
  for (int i = 0; i < ws.eq_count(); ++i) result.eq_multipliers[eq_rows[i]] = nu[i];
  result.ineq_multipliers = VecX::Zero(q);
  for (std::size_t i = 0; i < ws.ineq().size(); ++i) {
    result.ineq_multipliers[ws.ineq()[i]] = nu[ws.eq_count() + static_cast<int>(i)];
    result.active_set.push_back(ws.ineq()[i]);
  }
  std::sort(result.active_set.begin(), result.active_set.end());

  if (me > 0 && (Aeq * x - beq).lpNorm<Eigen::Infinity>() > eq_tol) {
    throw QpInfeasibleError("qp: infeasible equality system");
  }
  result.kkt_residual = kkt_residual(H, Aeq, beq, Aineq, bineq, result);
  return result;
}

}  // namespace cca
