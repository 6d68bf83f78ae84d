#pragma once

#include "copar/slices.hpp"
#include "copar/stepper.hpp"

#include <vector>

namespace copar {

/// Discrete element [p_bar, p, z_bar, z] of X: piecewise constant p_bar, z_bar (entries
/// 1..steps, entry 0 unused) and piecewise linear p, z (entries 0..steps).
struct Quadruple {
  double tau = 0.0;
  double T = 0.0;
  int steps = 0;
  std::vector<Vector> p_bar, p, z_bar, z;

  double interval_length(int i) const { return std::min(i * tau, T) - (i - 1) * tau; }

  /// [forward, linear, forward, linear] interpolants of a trajectory.
  static Quadruple from_trajectory(const DiscreteTrajectory& traj) {
    return {traj.tau, traj.T, traj.steps, traj.p, traj.p, traj.z, traj.z};
  }

  static Quadruple zero(const DiscreteSpaces& sp, double tau, double T) {
    const int n = step_count(T, tau);
    const Vector p = Vector::Zero(sp.v().size()), z = Vector::Zero(sp.v0().size());
    return {tau, T, n, std::vector<Vector>(n + 1, p), std::vector<Vector>(n + 1, p),
            std::vector<Vector>(n + 1, z), std::vector<Vector>(n + 1, z)};
  }
};

/// Per-step residual functionals of T applied to a quadruple, with their dual norms.
struct ResidualReport {
  double tau = 0.0;
  double T = 0.0;
  int steps = 0;
  std::vector<Vector> first;          ///< V_h* functionals, index 1..steps
  std::vector<Vector> second;         ///< V0,h* functionals, index 1..steps
  std::vector<double> first_dual;     ///< |first_i|_{V*}
  std::vector<double> second_dual;    ///< |second_i|_{V0*}
  double y_norm = 0.0;
};

namespace detail {

inline void require_quadruple(const DiscreteSpaces& sp, const Quadruple& q) {
  const auto n = static_cast<std::size_t>(q.steps + 1);
  if (q.p_bar.size() != n || q.p.size() != n || q.z_bar.size() != n || q.z.size() != n)
    throw StructuralError("quadruple sequences have inconsistent lengths");
  for (std::size_t i = 0; i < n; ++i) {
    if (q.p[i].size() != sp.v().size() || q.z[i].size() != sp.v0().size() ||
        (i > 0 && (q.p_bar[i].size() != sp.v().size() || q.z_bar[i].size() != sp.v0().size())))
      throw StructuralError("quadruple does not match the discrete spaces");
  }
}

inline std::pair<Vector, Vector> residual_step(const DiscreteSpaces& sp, const SextetSlices& cs,
                                               const Quadruple& q, double nu, int i) {
  const Forms f = assemble_forms(sp, cs.at(i), nu);
  const double inv_tau = 1.0 / q.tau;
  Vector first = inv_tau * (f.M.matrix * (q.p[i] - q.p[i - 1])) + f.K.matrix * q.p_bar[i] +
                 f.M_mu.matrix * q.p_bar[i] + f.M_lambda.matrix * q.p_bar[i] +
                 f.B_omega.matrix * q.z_bar[i];
  Vector second = inv_tau * (f.M_a.matrix * (q.z[i] - q.z[i - 1])) + f.M_b.matrix * q.z_bar[i] +
                  f.K_z.matrix * q.z_bar[i] + f.B_omega.matrix.transpose() * q.p_bar[i];
  return {std::move(first), std::move(second)};
}

/// Squared W^{1,2}(0,T;X*) norm of the linear interpolant of H-valued states, X* the dual of
/// the space on `b`; exact for linear-in-time Hilbert-valued functions.
inline double w12_dual_sq(const DiscreteSpaces& sp, Boundary b, const std::vector<Vector>& x,
                          double tau, double T, int steps) {
  const SparseMatrix& M = sp.mass(b).matrix;
  const GramSolver& g = sp.gram_solver(b);
  double total = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double len = std::min(i * tau, T) - (i - 1) * tau;
    const Vector mu = M * x[i - 1];
    const Vector mv = M * (x[i - 1] + (len / tau) * (x[i] - x[i - 1]));
    const Vector ru = g.solve(mu), rv = g.solve(mv);
    const double uu = mu.dot(ru), uv = mu.dot(rv), vv = mv.dot(rv);
    const double slope = g.dual_norm(M * (x[i] - x[i - 1])) / tau;
    total += len / 3.0 * (uu + uv + vv) + len * slope * slope;
  }
  return total;
}

}  // namespace detail

/// T applied on every step interval with the forward-interpolated coefficient slices.
inline ResidualReport apply_T(const DiscreteSpaces& sp, const SextetSlices& cs, const Quadruple& q,
                              double nu) {
  detail::require_quadruple(sp, q);
  if (cs.steps() != q.steps || cs.tau() != q.tau)
    throw StructuralError("coefficient slices and quadruple use different time grids");
  ResidualReport r;
  r.tau = q.tau;
  r.T = q.T;
  r.steps = q.steps;
  r.first.assign(q.steps + 1, Vector::Zero(sp.v().size()));
  r.second.assign(q.steps + 1, Vector::Zero(sp.v0().size()));
  r.first_dual.assign(q.steps + 1, 0.0);
  r.second_dual.assign(q.steps + 1, 0.0);
  double y2 = 0.0;
  for (int i = 1; i <= q.steps; ++i) {
    auto [f1, f2] = detail::residual_step(sp, cs, q, nu, i);
    r.first_dual[i] = sp.dual_norm(Boundary::neumann, f1);
    r.second_dual[i] = sp.dual_norm(Boundary::dirichlet0, f2);
    y2 += q.interval_length(i) * (r.first_dual[i] * r.first_dual[i] + r.second_dual[i] * r.second_dual[i]);
    r.first[i] = std::move(f1);
    r.second[i] = std::move(f2);
  }
  r.y_norm = std::sqrt(y2);
  return r;
}

/// T at a time strictly inside a step interval.
inline std::pair<Vector, Vector> apply_T_at(const DiscreteSpaces& sp, const SextetSlices& cs,
                                            const Quadruple& q, double nu, double t) {
  detail::require_quadruple(sp, q);
  const double s = t / q.tau;
  const int i = static_cast<int>(std::ceil(s));
  if (!(t > 0.0 && t < q.T) || std::abs(s - std::round(s)) <= 1e-9 || i < 1 || i > q.steps)
    throw DomainError("apply_T needs a time strictly inside a step interval");
  return detail::residual_step(sp, cs, q, nu, i);
}

/// Load functionals [h_i, k_i], i = 1..steps (entry 0 zero).
inline std::pair<std::vector<Vector>, std::vector<Vector>> forcing_functionals(
    const DiscreteSpaces& sp, const ForcingSlices& fs) {
  std::vector<Vector> h(fs.h.steps + 1, Vector::Zero(sp.v().size()));
  std::vector<Vector> k(fs.h.steps + 1, Vector::Zero(sp.v0().size()));
  for (int i = 1; i <= fs.h.steps; ++i) {
    const ForcingSlice f = fs.at(i);
    h[i] = assemble_load(sp.v(), f.h, f.h_flux);
    k[i] = assemble_load(sp.v0(), f.k, f.k_flux);
  }
  return {std::move(h), std::move(k)};
}

/// |[h_bar, k_bar]|_Y of sliced forcing.
inline double forcing_y_norm(const DiscreteSpaces& sp, const ForcingSlices& fs) {
  const auto [h, k] = forcing_functionals(sp, fs);
  double y2 = 0.0;
  for (int i = 1; i <= fs.h.steps; ++i) {
    const double a = sp.dual_norm(Boundary::neumann, h[i]);
    const double b = sp.dual_norm(Boundary::dirichlet0, k[i]);
    y2 += fs.h.interval_length(i) * (a * a + b * b);
  }
  return std::sqrt(y2);
}

/// |x|_X as the square root of the four squared component norms.
inline double x_norm(const DiscreteSpaces& sp, const Quadruple& q) {
  detail::require_quadruple(sp, q);
  double total = detail::w12_dual_sq(sp, Boundary::neumann, q.p, q.tau, q.T, q.steps) +
                 detail::w12_dual_sq(sp, Boundary::dirichlet0, q.z, q.tau, q.T, q.steps);
  for (int i = 1; i <= q.steps; ++i) {
    const double pv = sp.norm(Boundary::neumann, q.p_bar[i]);
    const double zv = sp.norm(Boundary::dirichlet0, q.z_bar[i]);
    total += q.interval_length(i) * (pv * pv + zv * zv);
  }
  return std::sqrt(total);
}

}  // namespace copar
