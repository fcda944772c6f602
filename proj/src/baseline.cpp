#include "cca/baseline.hpp"

#include <algorithm>
#include <limits>

namespace cca {

VecX pseudo_inverse_allocate(const MatX& B, const VecX& tau) {
  if (tau.size() != B.rows()) throw InputError("pseudo-inverse: tau and B disagree in size");
  const MatX gram = B * B.transpose();
  Eigen::FullPivLU<MatX> lu(gram);
  if (lu.rank() < B.rows()) throw InputError("pseudo-inverse: B does not have full row rank");
  return B.transpose() * lu.solve(tau);
}

BaselineResult erpi_allocate(const AircraftModel& model, const Vec3& tau_cmd) {
  return erpi_allocate(model.B, model.position_limits, tau_cmd);
}

BaselineResult erpi_allocate(const MatX& B, const BoxLimits& limits, const Vec3& tau_cmd) {
  const int m = static_cast<int>(B.cols());
  if (B.rows() != 3 || limits.size() != m) throw InputError("erpi: dimension mismatch");
  if (!limits.contains(VecX::Zero(m))) throw InputError("erpi: zero deflection must be feasible");
  {
    Eigen::FullPivLU<MatX> lu(B);
    if (lu.rank() < 3) throw InputError("erpi: rank(B) < 3");
  }

  BaselineResult out;
  out.u = VecX::Zero(m);
  std::vector<int> free(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) free[j] = j;
  double remaining = 1.0;  // fraction of tau_cmd still to be produced

  while (remaining > 0.0 && !free.empty()) {
    const Vec3 demand = remaining * tau_cmd;
    MatX Bf(3, static_cast<int>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) Bf.col(static_cast<int>(k)) = B.col(free[k]);

    VecX step;
    Eigen::CompleteOrthogonalDecomposition<MatX> cod(Bf);
    if (cod.rank() == 3) {
      step = pseudo_inverse_allocate(Bf, demand);
    } else {
      step = cod.solve(demand);
      if ((Bf * step - demand).norm() > 1e-9 * demand.norm()) {
        out.rank_loss = true;
        break;
      }
    }
    ++out.iterations;

    double alpha = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const int j = free[k];
      const double d = step[static_cast<int>(k)];
      if (d > 0.0) alpha = std::min(alpha, (limits.upper[j] - out.u[j]) / d);
      if (d < 0.0) alpha = std::min(alpha, (limits.lower[j] - out.u[j]) / d);
    }
    alpha = std::max(alpha, 0.0);

    std::vector<int> still_free;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const int j = free[k];
      const double d = step[static_cast<int>(k)];
      out.u[j] += alpha * d;
      if (alpha < 1.0 && d > 0.0 && limits.upper[j] - out.u[j] <= kSaturationTolerance) {
        out.u[j] = limits.upper[j];
        out.saturated.push_back(j);
      } else if (alpha < 1.0 && d < 0.0 && out.u[j] - limits.lower[j] <= kSaturationTolerance) {
        out.u[j] = limits.lower[j];
        out.saturated.push_back(j);
      } else {
        still_free.push_back(j);
      }
    }
    free = std::move(still_free);
    remaining = alpha >= 1.0 ? 0.0 : remaining * (1.0 - alpha);
  }
  if (remaining > 0.0 && free.empty()) out.rank_loss = true;
  out.scale_applied = 1.0 - remaining;
  return out;
}

}  // namespace cca
