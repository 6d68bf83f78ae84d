#pragma once

#include "copar/stepper.hpp"

#include <Eigen/LU>

namespace copar {

inline constexpr int dense_oracle_cap = 200;

struct DenseOracleResult {
  Vector p;
  Vector z;
  bool cg_agrees = false;        ///< CG succeeded and matched to 1e-8 relative
  double cg_discrepancy = 0.0;   ///< relative distance to the CG solution (inf if CG failed)
};

/// Pivoted dense elimination of a step system, cross-checked against CG.
inline DenseOracleResult dense_oracle_step(const StepSystem& sys, double cg_tol = 1e-12) {
  const int n = sys.p_dofs + sys.z_dofs;
  if (n > dense_oracle_cap) throw DomainError("dense oracle is limited to 200 dofs");
  const DenseMatrix S(sys.matrix.matrix);
  const Vector x = S.partialPivLu().solve(sys.rhs);
  if (!x.allFinite()) throw SolverError("dense elimination produced non-finite values", sys.slice_index);
  DenseOracleResult out;
  std::tie(out.p, out.z) = sys.split(x);
  try {
    const StepSolution cg = solve_step(sys, cg_tol);
    const double scale = std::max(x.norm(), std::numeric_limits<double>::min());
    out.cg_discrepancy = (sys.join(cg.p, cg.z) - x).norm() / scale;
    if (x.norm() == 0.0) out.cg_discrepancy = sys.join(cg.p, cg.z).norm();
  } catch (const SolverError&) {
    out.cg_discrepancy = std::numeric_limits<double>::infinity();
  }
  out.cg_agrees = out.cg_discrepancy <= 1e-8;
  return out;
}

struct MinimizationOptions {
  int max_iterations = 200000;
  double gradient_tol = 1e-8;
  double armijo = 1e-4;
};

struct MinimizationResult {
  Vector p;
  Vector z;
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> energies;    ///< energy() at the start and every accepted iterate
  std::vector<double> increments;  ///< exact energy change of every accepted step
};

/// Steepest descent on the step energy with backtracking. The trial step is the exact
/// minimizer along the ray, from the quadrature-evaluated quadratic part of the energy.
inline MinimizationResult minimize_energy_oracle(const StepContext& ctx, const Vector& p0,
                                                 const Vector& z0,
                                                 const MinimizationOptions& opt = {}) {
  const StepSystem sys = assemble_step_system(ctx);
  MinimizationResult out;
  Vector p = p0, z = z0;
  out.energies.push_back(energy(p, z, ctx));
  for (int it = 0;; ++it) {
    const Vector g = energy_gradient(sys, p, z);
    const double gg = g.squaredNorm();
    out.gradient_norm = std::sqrt(gg);
    if (out.gradient_norm <= opt.gradient_tol) {
      out.iterations = it;
      break;
    }
    if (it >= opt.max_iterations)
      throw SolverError("energy minimization hit its iteration cap", ctx.index);
    const auto [dp, dz] = sys.split(-g);
    const double q = energy_quadratic(dp, dz, ctx);
    if (!(q > 0.0)) throw IndefiniteSystemError("energy is not coercive along the gradient", ctx.index);
    double alpha = gg / (2.0 * q);
    double inc = 0.0;
    for (int k = 0;; ++k) {
      inc = -alpha * gg + alpha * alpha * q;
      if (inc <= -opt.armijo * alpha * gg) break;
      if (k > 60) throw SolverError("line search failed", ctx.index);
      alpha *= 0.5;
    }
    p += alpha * dp;
    z += alpha * dz;
    out.increments.push_back(inc);
    out.energies.push_back(energy(p, z, ctx));
  }
  out.p = std::move(p);
  out.z = std::move(z);
  return out;
}

}  // namespace copar
