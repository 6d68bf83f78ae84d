#pragma once

#include "copar/copar.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

namespace copar::testing {

inline constexpr double pi = std::numbers::pi;

inline std::shared_ptr<const Mesh> unit_interval(int cells) { return build_mesh(Interval{0, 1}, cells); }
inline std::shared_ptr<const Mesh> unit_square(int cells) { return build_mesh(Rectangle{0, 1, 0, 1}, cells); }

inline SpaceTimeField scalar_field(const Mesh& mesh, TimeGrid grid,
                                   std::function<double(double, const Point&)> f) {
  return SpaceTimeField::sample(FieldKind::scalar, mesh.dim(), mesh, grid,
                                [f](double t, const Point& x, std::span<double> out) { out[0] = f(t, x); });
}

inline SpaceTimeField constant_scalar(const Mesh& mesh, TimeGrid grid, double c) {
  return SpaceTimeField::scalar_constant(mesh.dim(), mesh.num_nodes(), grid, c);
}

inline SpaceTimeField constant_vector(const Mesh& mesh, TimeGrid grid, double c) {
  std::vector<double> v(mesh.dim(), c);
  return SpaceTimeField::constant(FieldKind::vector, mesh.dim(), mesh.num_nodes(), grid, v);
}

inline SpaceTimeField scaled_identity(const Mesh& mesh, TimeGrid grid, double s) {
  const int n = mesh.dim();
  std::vector<double> v(n * n, 0.0);
  for (int i = 0; i < n; ++i) v[i * n + i] = s;
  return SpaceTimeField::constant(FieldKind::matrix, n, mesh.num_nodes(), grid, v);
}

/// Sextet with constant coefficients (omega has equal components, A = A_scale I).
inline CoefficientSextet constant_sextet(std::shared_ptr<const Mesh> mesh, TimeGrid grid, double a,
                                         double b, double mu, double lambda, double omega,
                                         double A_scale) {
  const Mesh& m = *mesh;
  return CoefficientSextet(mesh, constant_scalar(m, grid, a), constant_scalar(m, grid, b),
                           constant_scalar(m, grid, mu), constant_scalar(m, grid, lambda),
                           constant_vector(m, grid, omega), scaled_identity(m, grid, A_scale));
}

/// Smooth random admissible sextet: a in [0.6, 2.4], mu >= 0, A uniformly positive.
inline CoefficientSextet random_sextet(std::shared_ptr<const Mesh> mesh, TimeGrid grid,
                                       std::mt19937_64& rng, double strength = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mesh& m = *mesh;
  const int n = m.dim();
  const auto wave = [&] {
    const double kx = 1.0 + std::floor(3.0 * (u(rng) + 1.0) / 2.0);
    const double ky = 1.0 + std::floor(3.0 * (u(rng) + 1.0) / 2.0);
    const double kt = 0.5 + (u(rng) + 1.0);
    const double ph = pi * u(rng);
    return [=](double t, const Point& x) {
      return std::sin(kx * pi * x[0] + ph) * std::cos(ky * pi * x[1]) * std::cos(kt * t + ph);
    };
  };
  const double a0 = 1.5 + 0.5 * u(rng), a1 = 0.4 * u(rng);
  const double b0 = strength * u(rng), b1 = 0.5 * strength * u(rng);
  const double m0 = 0.5 * strength * (u(rng) + 1.0), m1 = 0.5 * strength * (u(rng) + 1.0);
  const double l0 = strength * u(rng), l1 = 0.5 * strength * u(rng);
  const auto wa = wave(), wb = wave(), wm = wave(), wl = wave();
  auto a = scalar_field(m, grid, [=](double t, const Point& x) { return a0 + a1 * wa(t, x); });
  auto b = scalar_field(m, grid, [=](double t, const Point& x) { return b0 + b1 * wb(t, x); });
  auto mu = scalar_field(m, grid, [=](double t, const Point& x) {
    const double w = wm(t, x);
    return m0 + m1 * w * w;
  });
  auto lambda = scalar_field(m, grid, [=](double t, const Point& x) { return l0 + l1 * wl(t, x); });

  std::vector<double> w0(n), w1(n);
  for (int r = 0; r < n; ++r) w0[r] = 0.6 * strength * u(rng), w1[r] = 0.3 * strength * u(rng);
  const auto ww = wave();
  auto omega = SpaceTimeField::sample(FieldKind::vector, n, m, grid,
                                      [=](double t, const Point& x, std::span<double> out) {
                                        for (int r = 0; r < n; ++r) out[r] = w0[r] + w1[r] * ww(t, x);
                                      });
  const double d1 = 0.8 + 0.5 * u(rng), d2 = 0.8 + 0.5 * u(rng), e = 0.25 * u(rng);
  const auto wA = wave();
  auto A = SpaceTimeField::sample(FieldKind::matrix, n, m, grid,
                                  [=](double t, const Point& x, std::span<double> out) {
                                    const double s = 1.0 + 0.3 * wA(t, x);
                                    if (n == 1) {
                                      out[0] = d1 * s;
                                    } else {
                                      out[0] = d1 * s;
                                      out[1] = out[2] = e * s;
                                      out[3] = d2 * s;
                                    }
                                  });
  return CoefficientSextet(std::move(mesh), std::move(a), std::move(b), std::move(mu),
                           std::move(lambda), std::move(omega), std::move(A));
}

/// Smooth random forcing (densities only unless `with_flux`).
inline Forcing random_forcing(const Mesh& m, TimeGrid grid, std::mt19937_64& rng,
                              double amplitude = 1.0, bool with_flux = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto make = [&] {
    const double c0 = amplitude * u(rng), c1 = amplitude * u(rng), kx = 1.0 + std::floor(2.5 * (u(rng) + 1.0));
    const double kt = 1.0 + 2.0 * (u(rng) + 1.0), ph = pi * u(rng);
    return scalar_field(m, grid, [=](double t, const Point& x) {
      return c0 + c1 * std::cos(kx * pi * x[0] + ph) * std::sin(kt * t + ph) * (1.0 + x[1]);
    });
  };
  Forcing f{make(), make(), std::nullopt, std::nullopt};
  if (with_flux) {
    const double g0 = amplitude * u(rng);
    const int n = m.dim();
    auto flux = SpaceTimeField::sample(FieldKind::vector, n, m, grid,
                                       [=](double t, const Point& x, std::span<double> out) {
                                         for (int r = 0; r < n; ++r) out[r] = g0 * std::sin(pi * x[r]) * (1.0 + t);
                                       });
    f.h_flux = flux;
    f.k_flux = flux.scaled(-0.5);
  }
  return f;
}

inline InitialData random_initial(const Mesh& m, std::mt19937_64& rng, double amplitude = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double p0 = amplitude * u(rng), p1 = amplitude * u(rng), z1 = amplitude * u(rng);
  InitialData init = InitialData::zero(m);
  for (int i = 0; i < m.num_nodes(); ++i) {
    const Point& x = m.node(i);
    init.p0[i] = p0 + p1 * std::cos(pi * x[0]) * std::cos(pi * x[1]);
    init.z0[i] = m.on_boundary(i) ? 0.0 : z1 * std::sin(pi * x[0]) * (m.dim() == 2 ? std::sin(pi * x[1]) : 1.0);
  }
  return init;
}

/// Scalar backward Euler for u_t - u_xx = f on a uniform 1D P1 mesh, coded without the library's assembly.
class HeatOracle {
 public:
  HeatOracle(int cells, bool dirichlet) : n_(cells + 1), h_(1.0 / cells), dirichlet_(dirichlet) {}

  std::vector<double> mass_times(const std::vector<double>& u) const {
    std::vector<double> out(n_, 0.0);
    for (int e = 0; e + 1 < n_; ++e) {
      out[e] += h_ / 6.0 * (2.0 * u[e] + u[e + 1]);
      out[e + 1] += h_ / 6.0 * (u[e] + 2.0 * u[e + 1]);
    }
    return out;
  }

  std::vector<double> step(const std::vector<double>& prev, const std::vector<double>& f, double tau) const {
    std::vector<double> rhs = mass_times(prev), load = mass_times(f);
    for (int j = 0; j < n_; ++j) rhs[j] = rhs[j] / tau + load[j];
    std::vector<double> lo(n_, 0.0), di(n_, 0.0), up(n_, 0.0);
    for (int e = 0; e + 1 < n_; ++e) {
      const double m_d = h_ / 3.0 / tau + 1.0 / h_, m_o = h_ / 6.0 / tau - 1.0 / h_;
      di[e] += m_d, di[e + 1] += m_d;
      up[e] += m_o, lo[e + 1] += m_o;
    }
    int first = 0, last = n_ - 1;
    std::vector<double> u(n_, 0.0);
    if (dirichlet_) first = 1, last = n_ - 2, lo[first] = 0.0, up[last] = 0.0;
    for (int j = first + 1; j <= last; ++j) {
      const double w = lo[j] / di[j - 1];
      di[j] -= w * up[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    u[last] = rhs[last] / di[last];
    for (int j = last - 1; j >= first; --j) u[j] = (rhs[j] - up[j] * u[j + 1]) / di[j];
    return u;
  }

 private:
  int n_;
  double h_;
  bool dirichlet_;
};

}  // namespace copar::testing
