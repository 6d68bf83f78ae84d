#pragma once

#include "copar/coefficients.hpp"
#include "copar/spatial.hpp"

#include <optional>
#include <vector>

namespace copar {

/// Forcing [h, k] as L2 densities plus optional fluxes g (functional -div g).
struct Forcing {
  SpaceTimeField h;
  SpaceTimeField k;
  std::optional<SpaceTimeField> h_flux;
  std::optional<SpaceTimeField> k_flux;

  static Forcing zero(const Mesh& mesh, TimeGrid grid) {
    return {SpaceTimeField::scalar_constant(mesh.dim(), mesh.num_nodes(), grid, 0.0),
            SpaceTimeField::scalar_constant(mesh.dim(), mesh.num_nodes(), grid, 0.0),
            std::nullopt, std::nullopt};
  }

  /// alpha * this + beta * other (fluxes present in either are combined).
  Forcing combined(double alpha, const Forcing& other, double beta) const {
    Forcing out{h.combined(alpha, other.h, beta), k.combined(alpha, other.k, beta), {}, {}};
    const auto mix = [&](const std::optional<SpaceTimeField>& x,
                         const std::optional<SpaceTimeField>& y) -> std::optional<SpaceTimeField> {
      if (x && y) return x->combined(alpha, *y, beta);
      if (x) return x->scaled(alpha);
      if (y) return y->scaled(beta);
      return std::nullopt;
    };
    out.h_flux = mix(h_flux, other.h_flux);
    out.k_flux = mix(k_flux, other.k_flux);
    return out;
  }
};

/// Nodal initial data; z0 is zeroed on the boundary when projected.
struct InitialData {
  std::vector<double> p0;
  std::vector<double> z0;

  static InitialData zero(const Mesh& mesh) {
    return {std::vector<double>(mesh.num_nodes(), 0.0), std::vector<double>(mesh.num_nodes(), 0.0)};
  }

  InitialData combined(double alpha, const InitialData& other, double beta) const {
    InitialData out{p0, z0};
    for (std::size_t j = 0; j < p0.size(); ++j) out.p0[j] = alpha * p0[j] + beta * other.p0[j];
    for (std::size_t j = 0; j < z0.size(); ++j) out.z0[j] = alpha * z0[j] + beta * other.z0[j];
    return out;
  }
};

/// Time slices of all six coefficients together with the sextet's norms.
struct SextetSlices {
  TimeSlices a, b, mu, lambda, omega, A;
  SextetNorms norms;

  double tau() const { return a.tau; }
  double T() const { return a.T; }
  int steps() const { return a.steps; }

  SliceCoefficients at(int i) const {
    return {a[i], b[i], mu[i], lambda[i], omega[i], A[i]};
  }
};

inline SextetSlices slice_sextet(const CoefficientSextet& s, double tau,
                                 SliceMode mode = SliceMode::average) {
  return {discretize_time(s.a(), tau, mode),      discretize_time(s.b(), tau, mode),
          discretize_time(s.mu(), tau, mode),     discretize_time(s.lambda(), tau, mode),
          discretize_time(s.omega(), tau, mode),  discretize_time(s.A(), tau, mode),
          s.norms()};
}

/// Nodal forcing arrays of one step (flux spans empty when absent).
struct ForcingSlice {
  std::span<const double> h, k, h_flux, k_flux;
};

struct ForcingSlices {
  TimeSlices h, k;
  std::optional<TimeSlices> h_flux, k_flux;

  ForcingSlice at(int i) const {
    return {h[i], k[i], h_flux ? (*h_flux)[i] : std::span<const double>{},
            k_flux ? (*k_flux)[i] : std::span<const double>{}};
  }
};

/// Forcing is always sliced by interval averages (forcing is only L2 in time).
inline ForcingSlices slice_forcing(const Forcing& f, double tau) {
  ForcingSlices out{discretize_time(f.h, tau, SliceMode::average),
                    discretize_time(f.k, tau, SliceMode::average), std::nullopt, std::nullopt};
  if (f.h_flux) out.h_flux = discretize_time(*f.h_flux, tau, SliceMode::average);
  if (f.k_flux) out.k_flux = discretize_time(*f.k_flux, tau, SliceMode::average);
  return out;
}

}  // namespace copar
