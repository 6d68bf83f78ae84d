#pragma once

#include "copar/slices.hpp"

#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace copar {

/// Value, time derivative, gradient and row-major Hessian of a closed-form function.
struct ExactValue {
  double v = 0.0;
  double dt = 0.0;
  Point grad{0.0, 0.0};
  std::array<double, 4> hess{0.0, 0.0, 0.0, 0.0};

  double laplacian(int dim) const { return dim == 1 ? hess[0] : hess[0] + hess[3]; }
};

using ExactFn = std::function<ExactValue(double t, const Point& x, int dim)>;

/// Manufactured pair [p, z]; z must vanish on the boundary.
struct MmsSolution {
  std::string name;
  ExactFn p;
  ExactFn z;
};

namespace detail {

inline ExactValue zero_value(double, const Point&, int) { return {}; }

/// e^{-t} prod cos(pi x_r) (cosine = true) or e^{-t} prod sin(pi x_r).
inline ExactValue trig_product(double t, const Point& x, int dim, bool cosine) {
  const double pi = std::numbers::pi;
  const double e = std::exp(-t);
  double f[2], df[2], ddf[2];
  for (int r = 0; r < 2; ++r) {
    if (r >= dim) {
      f[r] = 1.0, df[r] = 0.0, ddf[r] = 0.0;
      continue;
    }
    const double s = std::sin(pi * x[r]), c = std::cos(pi * x[r]);
    f[r] = cosine ? c : s;
    df[r] = cosine ? -pi * s : pi * c;
    ddf[r] = -pi * pi * f[r];
  }
  ExactValue out;
  out.v = e * f[0] * f[1];
  out.dt = -out.v;
  out.grad = {e * df[0] * f[1], e * f[0] * df[1]};
  out.hess = {e * ddf[0] * f[1], e * df[0] * df[1], e * df[0] * df[1], e * f[0] * ddf[1]};
  return out;
}

}  // namespace detail

inline std::vector<std::string> mms_catalog_names() { return {"zero", "cos_sin_exp", "z_only_sin_exp"}; }

/// Catalog of manufactured solutions on the unit interval or unit square.
inline MmsSolution mms_catalog(const std::string& name) {
  if (name == "zero") return {name, detail::zero_value, detail::zero_value};
  if (name == "cos_sin_exp")
    return {name, [](double t, const Point& x, int d) { return detail::trig_product(t, x, d, true); },
            [](double t, const Point& x, int d) { return detail::trig_product(t, x, d, false); }};
  if (name == "z_only_sin_exp")
    return {name, detail::zero_value,
            [](double t, const Point& x, int d) { return detail::trig_product(t, x, d, false); }};
  throw DomainError("unknown manufactured solution: " + name);
}

namespace detail {

/// Nodal values of a field at (t, node), from its closed form when it has one.
inline std::vector<double> field_at(const SpaceTimeField& f, double t, const Mesh& m, int node) {
  std::vector<double> out(f.components());
  if (f.has_analytic()) {
    f.analytic()(t, m.node(node), out);
  } else {
    const auto all = f.at_time(t);
    std::copy_n(all.begin() + static_cast<std::ptrdiff_t>(node) * f.components(), f.components(), out.begin());
  }
  return out;
}

inline void require_spatially_constant(const SpaceTimeField& f, const char* name) {
  for (int k = 0; k < f.grid().instants(); ++k) {
    const auto first = f.at(k, 0);
    for (int n = 1; n < f.num_nodes(); ++n) {
      const auto v = f.at(k, n);
      for (std::size_t c = 0; c < v.size(); ++c)
        if (std::abs(v[c] - first[c]) > 1e-12 * (1.0 + std::abs(first[c])))
          throw DomainError(std::string("manufactured forcing needs a spatially constant ") + name);
    }
  }
}

}  // namespace detail

/// Forcing [h, k] that makes the catalog pair an exact solution, sampled on `grid`.
inline Forcing mms_forcing(const MmsSolution& sol, const CoefficientSextet& s, double nu, TimeGrid grid) {
  const Mesh& m = s.mesh();
  const int dim = m.dim();
  detail::require_spatially_constant(s.omega(), "omega");
  detail::require_spatially_constant(s.A(), "A");
  for (int node : m.boundary_nodes())
    for (double t : {0.0, grid.T})
      if (std::abs(sol.z(t, m.node(node), dim).v) > 1e-12)
        throw DomainError("manufactured z does not vanish on the boundary");

  const int nodes = m.num_nodes();
  std::vector<double> h(static_cast<std::size_t>(grid.instants()) * nodes);
  std::vector<double> k(h.size());
  for (int step = 0; step < grid.instants(); ++step) {
    const double t = grid.time(step);
    for (int n = 0; n < nodes; ++n) {
      const Point& x = m.node(n);
      const ExactValue p = sol.p(t, x, dim), z = sol.z(t, x, dim);
      const double a = detail::field_at(s.a(), t, m, n)[0];
      const double b = detail::field_at(s.b(), t, m, n)[0];
      const double mu = detail::field_at(s.mu(), t, m, n)[0];
      const double lam = detail::field_at(s.lambda(), t, m, n)[0];
      const auto w = detail::field_at(s.omega(), t, m, n);
      const auto A = detail::field_at(s.A(), t, m, n);
      double w_gz = 0.0, w_gp = 0.0, a_hz = 0.0;
      for (int r = 0; r < dim; ++r) {
        w_gz += w[r] * z.grad[r];
        w_gp += w[r] * p.grad[r];
        for (int c = 0; c < dim; ++c) a_hz += A[r * dim + c] * z.hess[r * 2 + c];
      }
      const std::size_t idx = static_cast<std::size_t>(step) * nodes + n;
      h[idx] = p.dt - p.laplacian(dim) + (mu + lam) * p.v + w_gz;
      k[idx] = a * z.dt + b * z.v - a_hz - nu * z.laplacian(dim) - w_gp;
    }
  }
  return {SpaceTimeField(FieldKind::scalar, dim, nodes, grid, std::move(h)),
          SpaceTimeField(FieldKind::scalar, dim, nodes, grid, std::move(k)), std::nullopt, std::nullopt};
}

/// Nodal initial data of a catalog pair.
inline InitialData mms_initial(const MmsSolution& sol, const Mesh& m) {
  InitialData init = InitialData::zero(m);
  for (int n = 0; n < m.num_nodes(); ++n) {
    init.p0[n] = sol.p(0.0, m.node(n), m.dim()).v;
    init.z0[n] = m.on_boundary(n) ? 0.0 : sol.z(0.0, m.node(n), m.dim()).v;
  }
  return init;
}

/// Nodal interpolant of the catalog pair at time t, as dof vectors.
inline std::pair<Vector, Vector> mms_state(const MmsSolution& sol, const DiscreteSpaces& sp, double t) {
  const Mesh& m = sp.mesh();
  std::vector<double> p(m.num_nodes()), z(m.num_nodes());
  for (int n = 0; n < m.num_nodes(); ++n) {
    p[n] = sol.p(t, m.node(n), m.dim()).v;
    z[n] = sol.z(t, m.node(n), m.dim()).v;
  }
  return {sp.v().restrict(p), sp.v0().restrict(z)};
}

}  // namespace copar
