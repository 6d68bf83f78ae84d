#pragma once

#include "copar/coefficients.hpp"
#include "copar/slices.hpp"
#include "copar/spatial.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace copar {

struct CgResult {
  Vector x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients with a diagonal preconditioner.
///
/// Throws IndefiniteSystemError on a non-positive diagonal entry or a search
/// direction with non-positive curvature, SolverError after `max_iterations`.
inline CgResult conjugate_gradient(const SparseMatrix& A, const Vector& b, double tol,
                                   int max_iterations, const Vector* x0 = nullptr) {
  const Eigen::Index n = b.size();
  CgResult out;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.x = Vector::Zero(n);
    return out;
  }
  const Vector diag = A.diagonal();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(diag(i) > 0.0))
      throw IndefiniteSystemError("non-positive diagonal entry: step size beyond the stability bound");
  const Vector inv_diag = diag.cwiseInverse();

  Vector x = x0 ? *x0 : Vector::Zero(n);
  int it = 0;
  while (true) {
    Vector r = b - A * x;
    if (r.norm() <= tol * bnorm) break;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    double rz = r.dot(z);
    while (it < max_iterations) {
      const Vector Ap = A * p;
      const double curvature = p.dot(Ap);
      if (!(curvature > 0.0))
        throw IndefiniteSystemError(
            "negative curvature in conjugate gradients: step size beyond the stability bound");
      const double alpha = rz / curvature;
      x += alpha * p;
      r -= alpha * Ap;
      ++it;
      if (r.norm() <= tol * bnorm) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    const double true_res = (b - A * x).norm();
    if (true_res <= tol * bnorm) break;
    if (it >= max_iterations)
      throw SolverError("conjugate gradients did not converge in " +
                        std::to_string(max_iterations) + " iterations");
  }
  out.x = std::move(x);
  out.iterations = it;
  out.relative_residual = (b - A * out.x).norm() / bnorm;
  return out;
}

/// Everything one step of the scheme depends on.
struct StepContext {
  const DiscreteSpaces* spaces = nullptr;
  SliceCoefficients coeffs;
  ForcingSlice forcing;
  Vector p_prev;  ///< dofs of V_h
  Vector z_prev;  ///< dofs of V0,h
  double tau = 0.0;
  double nu = 1.0;
  int index = 1;
  double tau_star = std::numeric_limits<double>::infinity();
  bool override_tau_guard = false;
};

/// Block system [[M/tau + K + M_mu + M_lambda, B], [B^T, M_a/tau + M_b + K_A + nu K0]]
/// over (p-dofs, z-dofs) with its right side.
struct StepSystem {
  SparseOperator matrix;
  Vector rhs;
  Vector load_p;
  Vector load_z;
  double tau = 0.0;
  double nu = 0.0;
  int slice_index = 0;
  int p_dofs = 0;
  int z_dofs = 0;

  Vector join(const Vector& p, const Vector& z) const {
    Vector x(p_dofs + z_dofs);
    x << p, z;
    return x;
  }
  std::pair<Vector, Vector> split(const Vector& x) const {
    return {x.head(p_dofs), x.tail(z_dofs)};
  }
};

inline StepSystem assemble_step_system(const StepContext& ctx) {
  if (!ctx.spaces) throw StructuralError("step context without spaces");
  if (!(ctx.tau > 0.0)) throw DomainError("tau must be positive");
  if (ctx.tau >= ctx.tau_star && !ctx.override_tau_guard) throw TauGuardError(ctx.tau, ctx.tau_star);
  const DiscreteSpaces& sp = *ctx.spaces;
  const int np = sp.v().size();
  const int nz = sp.v0().size();
  if (ctx.p_prev.size() != np || ctx.z_prev.size() != nz)
    throw StructuralError("previous state does not match the spaces");

  const Forms f = assemble_forms(sp, ctx.coeffs, ctx.nu);
  const double inv_tau = 1.0 / ctx.tau;
  const SparseMatrix pp = inv_tau * f.M.matrix + f.K.matrix + f.M_mu.matrix + f.M_lambda.matrix;
  const SparseMatrix zz = inv_tau * f.M_a.matrix + f.M_b.matrix + f.K_z.matrix;

  std::vector<Triplet> t;
  t.reserve(pp.nonZeros() + zz.nonZeros() + 2 * f.B_omega.matrix.nonZeros());
  for (int r = 0; r < pp.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(pp, r); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int r = 0; r < zz.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(zz, r); it; ++it)
      t.emplace_back(np + it.row(), np + it.col(), it.value());
  const SparseMatrix& B = f.B_omega.matrix;
  for (int r = 0; r < B.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(B, r); it; ++it) {
      t.emplace_back(it.row(), np + it.col(), it.value());
      t.emplace_back(np + it.col(), it.row(), it.value());
    }
  }
  SparseMatrix full(np + nz, np + nz);
  full.setFromTriplets(t.begin(), t.end());

  StepSystem sys;
  sys.matrix = SparseOperator::make(std::move(full), Boundary::neumann, Boundary::neumann, true);
  sys.load_p = assemble_load(sp.v(), ctx.forcing.h, ctx.forcing.h_flux);
  sys.load_z = assemble_load(sp.v0(), ctx.forcing.k, ctx.forcing.k_flux);
  sys.rhs.resize(np + nz);
  sys.rhs << inv_tau * (f.M.matrix * ctx.p_prev) + sys.load_p,
      inv_tau * (f.M_a.matrix * ctx.z_prev) + sys.load_z;
  sys.tau = ctx.tau;
  sys.nu = ctx.nu;
  sys.slice_index = ctx.index;
  sys.p_dofs = np;
  sys.z_dofs = nz;
  return sys;
}

struct StepSolution {
  Vector p;
  Vector z;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves a step system by preconditioned CG (optionally from a starting guess).
inline StepSolution solve_step(const StepSystem& sys, double tol = 1e-10,
                               const Vector* start = nullptr) {
  if (!(tol > 0.0)) throw DomainError("solver tolerance must be positive");
  const int n = sys.p_dofs + sys.z_dofs;
  CgResult r;
  try {
    r = conjugate_gradient(sys.matrix.matrix, sys.rhs, tol, 10 * n, start);
  } catch (SolverError& e) {
    e.set_step(sys.slice_index);
    throw;
  }
  auto [p, z] = sys.split(r.x);
  return {std::move(p), std::move(z), r.iterations, r.relative_residual};
}

namespace detail {

/// Integral of the step energy density; `with_data` false keeps only the quadratic part.
inline double energy_integral(const Vector& p, const Vector& z, const StepContext& ctx,
                              bool with_data) {
  const DiscreteSpaces& sp = *ctx.spaces;
  const Mesh& mesh = sp.mesh();
  if (p.size() != sp.v().size() || z.size() != sp.v0().size())
    throw StructuralError("energy arguments do not match the spaces");
  const int dim = mesh.dim();
  const std::vector<double> pn = sp.v().extend(p);
  const std::vector<double> zn = sp.v0().extend(z);
  const std::vector<double> p0 = with_data ? sp.v().extend(ctx.p_prev) : std::vector<double>(pn.size(), 0.0);
  const std::vector<double> z0 = with_data ? sp.v0().extend(ctx.z_prev) : std::vector<double>(zn.size(), 0.0);
  const auto& c = ctx.coeffs;
  const auto& f = ctx.forcing;
  const double inv_tau = 1.0 / ctx.tau;
  return integrate(mesh, [&](int cell, const auto& bary) {
    const double pv = mesh.interpolate(cell, bary, pn);
    const double zv = mesh.interpolate(cell, bary, zn);
    const double dp = pv - mesh.interpolate(cell, bary, p0);
    const double dz = zv - mesh.interpolate(cell, bary, z0);
    const Point gp = mesh.cell_gradient(cell, pn);
    const Point gz = mesh.cell_gradient(cell, zn);
    const double a = mesh.interpolate(cell, bary, c.a);
    const double b = mesh.interpolate(cell, bary, c.b);
    const double mu = mesh.interpolate(cell, bary, c.mu);
    const double lam = mesh.interpolate(cell, bary, c.lambda);
    double om_gz = 0.0, agz_gz = 0.0, gp2 = 0.0, gz2 = 0.0;
    for (int r = 0; r < dim; ++r) {
      om_gz += mesh.interpolate(cell, bary, c.omega, dim, r) * gz[r];
      gp2 += gp[r] * gp[r];
      gz2 += gz[r] * gz[r];
      for (int s = 0; s < dim; ++s)
        agz_gz += gz[r] * mesh.interpolate(cell, bary, c.A, dim * dim, r * dim + s) * gz[s];
    }
    double e = 0.5 * inv_tau * (dp * dp + a * dz * dz) + 0.5 * (gp2 + agz_gz + ctx.nu * gz2) +
               0.5 * mu * pv * pv + pv * om_gz + 0.5 * (lam * pv * pv + b * zv * zv);
    if (with_data) {
      e -= mesh.interpolate(cell, bary, f.h) * pv + mesh.interpolate(cell, bary, f.k) * zv;
      for (int r = 0; r < dim; ++r) {
        if (!f.h_flux.empty()) e -= mesh.interpolate(cell, bary, f.h_flux, dim, r) * gp[r];
        if (!f.k_flux.empty()) e -= mesh.interpolate(cell, bary, f.k_flux, dim, r) * gz[r];
      }
    }
    return e;
  });
}

}  // namespace detail

/// Step energy E(p, z), evaluated by quadrature of its density (independent of the matrices).
inline double energy(const Vector& p, const Vector& z, const StepContext& ctx) {
  return detail::energy_integral(p, z, ctx, true);
}

/// Quadratic part of E: E(x + d) - E(x) = grad E(x) . d + energy_quadratic(d).
inline double energy_quadratic(const Vector& p, const Vector& z, const StepContext& ctx) {
  return detail::energy_integral(p, z, ctx, false);
}

inline Vector energy_gradient(const StepSystem& sys, const Vector& p, const Vector& z) {
  return sys.matrix.matrix * sys.join(p, z) - sys.rhs;
}

inline Vector energy_gradient(const Vector& p, const Vector& z, const StepContext& ctx) {
  return energy_gradient(assemble_step_system(ctx), p, z);
}

struct StepOptions {
  double tol = 1e-10;
  bool override_tau_guard = false;
};

struct StepDiagnostics {
  double energy = 0.0;
  int iterations = 0;
  double residual = 0.0;  ///< relative algebraic residual
};

/// States [p_i, z_i], i = 0..steps, as dof vectors with per-step diagnostics.
struct DiscreteTrajectory {
  double tau = 0.0;
  double T = 0.0;
  int steps = 0;
  bool partial_final_step = false;
  std::vector<Vector> p;
  std::vector<Vector> z;
  std::vector<StepDiagnostics> diagnostics;  ///< entry 0 describes the initial state

  double time(int i) const { return i * tau; }
  double interval_length(int i) const { return std::min(i * tau, T) - (i - 1) * tau; }
};

/// Marches the scheme from the projected initial data.
inline DiscreteTrajectory run_scheme(const DiscreteSpaces& spaces, const SextetSlices& coeffs,
                                     const ForcingSlices& forcing, const InitialData& initial,
                                     double nu, const StepOptions& opt = {}) {
  const double tau = coeffs.tau();
  if (forcing.h.tau != tau || forcing.k.tau != tau || forcing.h.steps != coeffs.steps())
    throw StructuralError("coefficient and forcing slices use different step sizes");
  if (coeffs.a.nodes != spaces.mesh().num_nodes() || forcing.h.nodes != spaces.mesh().num_nodes())
    throw StructuralError("slices and spaces live on different meshes");
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  const double ts = tau_star(coeffs.norms, nu);
  if (tau >= ts && !opt.override_tau_guard) throw TauGuardError(tau, ts);

  DiscreteTrajectory traj;
  traj.tau = tau;
  traj.T = coeffs.T();
  traj.steps = coeffs.steps();
  traj.partial_final_step = coeffs.a.partial_final_step;
  traj.p.reserve(traj.steps + 1);
  traj.z.reserve(traj.steps + 1);
  traj.p.push_back(spaces.v().restrict(initial.p0));
  traj.z.push_back(spaces.v0().restrict(initial.z0));
  traj.diagnostics.push_back({std::numeric_limits<double>::quiet_NaN(), 0, 0.0});

  StepContext ctx;
  ctx.spaces = &spaces;
  ctx.tau = tau;
  ctx.nu = nu;
  ctx.tau_star = ts;
  ctx.override_tau_guard = opt.override_tau_guard;
  for (int i = 1; i <= traj.steps; ++i) {
    ctx.index = i;
    ctx.coeffs = coeffs.at(i);
    ctx.forcing = forcing.at(i);
    ctx.p_prev = traj.p.back();
    ctx.z_prev = traj.z.back();
    const StepSystem sys = assemble_step_system(ctx);
    const Vector start = sys.join(ctx.p_prev, ctx.z_prev);
    StepSolution sol;
    try {
      sol = solve_step(sys, opt.tol, &start);
    } catch (SolverError& e) {
      e.set_step(i);
      throw;
    }
    traj.diagnostics.push_back({energy(sol.p, sol.z, ctx), sol.iterations, sol.relative_residual});
    traj.p.push_back(std::move(sol.p));
    traj.z.push_back(std::move(sol.z));
  }
  return traj;
}

/// [p, z] of the chosen interpolant of the state sequence at time t.
inline std::pair<Vector, Vector> trajectory_interpolants(const DiscreteTrajectory& traj,
                                                         InterpolantKind kind, double t) {
  const auto w = locate(traj.tau, traj.T, traj.steps, kind, t);
  return {w.w_hi * traj.p[w.hi] + w.w_lo * traj.p[w.lo], w.w_hi * traj.z[w.hi] + w.w_lo * traj.z[w.lo]};
}

/// CSV rows "i,t,p_H,z_H,energy,iterations" (energy blank for the initial state).
inline void write_trajectory_csv(const DiscreteTrajectory& traj, const DiscreteSpaces& spaces,
                                 std::ostream& out) {
  out << "i,t,p_H,z_H,energy,iterations\n";
  char buf[256];
  for (int i = 0; i <= traj.steps; ++i) {
    const double ph = spaces.norm_h(Boundary::neumann, traj.p[i]);
    const double zh = spaces.norm_h(Boundary::dirichlet0, traj.z[i]);
    if (i == 0) {
      std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%.12e,,%d\n", i, traj.time(i), ph, zh, 0);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%.12e,%.12e,%d\n", i, traj.time(i), ph, zh,
                    traj.diagnostics[i].energy, traj.diagnostics[i].iterations);
    }
    out << buf;
  }
}

/// Nodal state sequences as fields on the grid {i tau}.
inline std::pair<SpaceTimeField, SpaceTimeField> trajectory_fields(const DiscreteTrajectory& traj,
                                                                   const DiscreteSpaces& spaces) {
  std::vector<double> pv, zv;
  for (int i = 0; i <= traj.steps; ++i) {
    const auto pn = spaces.v().extend(traj.p[i]);
    const auto zn = spaces.v0().extend(traj.z[i]);
    pv.insert(pv.end(), pn.begin(), pn.end());
    zv.insert(zv.end(), zn.begin(), zn.end());
  }
  const TimeGrid grid{traj.steps * traj.tau, traj.steps};
  const int dim = spaces.mesh().dim();
  const int nodes = spaces.mesh().num_nodes();
  return {SpaceTimeField(FieldKind::scalar, dim, nodes, grid, std::move(pv)),
          SpaceTimeField(FieldKind::scalar, dim, nodes, grid, std::move(zv))};
}

}  // namespace copar
