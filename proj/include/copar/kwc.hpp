#pragma once

#include "copar/coefficients.hpp"
#include "copar/slices.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace copar {

/// Value, gradient and hessian (row-major) of f_eps(xi) = sqrt(eps^2 + |xi|^2).
struct FEps {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;
};

inline FEps f_eps(std::span<const double> xi, double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("f_eps needs eps > 0");
  const std::size_t n = xi.size();
  double sq = eps * eps;
  for (double v : xi) sq += v * v;
  FEps out;
  out.value = std::sqrt(sq);
  out.gradient.resize(n);
  out.hessian.assign(n * n, 0.0);
  const double v3 = sq * out.value;
  for (std::size_t r = 0; r < n; ++r) {
    out.gradient[r] = xi[r] / out.value;
    for (std::size_t c = 0; c < n; ++c) out.hessian[r * n + c] = ((r == c ? sq : 0.0) - xi[r] * xi[c]) / v3;
  }
  return out;
}

using ScalarFn = std::function<double(double)>;

/// Model functions g, alpha (with derivatives), alpha0 and the regularization eps.
struct ModelFunctions {
  ScalarFn g, g_prime;
  ScalarFn alpha, alpha_prime, alpha_second;
  SpaceTimeField alpha0;
  std::optional<SpaceTimeField> alpha0_dt;  ///< lattice differences of alpha0 when absent
  double eps = 0.05;

  /// alpha(r) = 0.01 + r^2, g(r) = r, alpha0 = 1, eps = 0.05.
  static ModelFunctions defaults(const Mesh& mesh, TimeGrid grid) {
    ModelFunctions f;
    f.g = [](double r) { return r; };
    f.g_prime = [](double) { return 1.0; };
    f.alpha = [](double r) { return 0.01 + r * r; };
    f.alpha_prime = [](double r) { return 2.0 * r; };
    f.alpha_second = [](double) { return 2.0; };
    f.alpha0 = SpaceTimeField::scalar_constant(mesh.dim(), mesh.num_nodes(), grid, 1.0);
    f.alpha0_dt = SpaceTimeField::scalar_constant(mesh.dim(), mesh.num_nodes(), grid, 0.0);
    return f;
  }
};

/// Time derivative of a scalar field on its lattice: central differences inside, one-sided at the ends.
inline SpaceTimeField lattice_time_derivative(const SpaceTimeField& f) {
  if (f.kind() != FieldKind::scalar) throw StructuralError("time derivative needs a scalar field");
  const TimeGrid& g = f.grid();
  const int M = g.intervals, n = f.num_nodes();
  const double dt = g.step();
  std::vector<double> out(f.values().size());
  for (int k = 0; k <= M; ++k) {
    const int lo = std::max(k - 1, 0), hi = std::min(k + 1, M);
    const double span = (hi - lo) * dt;
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(k) * n + j] = (f.value(hi, j) - f.value(lo, j)) / span;
  }
  return SpaceTimeField(FieldKind::scalar, f.dim(), n, g, std::move(out));
}

/// Phase fields (eta, theta) on a common mesh and time grid.
class PhaseFieldPair {
 public:
  PhaseFieldPair(std::shared_ptr<const Mesh> mesh, SpaceTimeField eta, SpaceTimeField theta,
                 bool theta_dirichlet = false)
      : mesh_(std::move(mesh)), eta_(std::move(eta)), theta_(std::move(theta)), dirichlet_(theta_dirichlet) {
    if (!mesh_) throw StructuralError("phase-field pair needs a mesh");
    if (eta_.kind() != FieldKind::scalar || theta_.kind() != FieldKind::scalar)
      throw StructuralError("eta and theta must be scalar fields");
    eta_.require_same_shape(theta_);
    if (eta_.num_nodes() != mesh_->num_nodes() || eta_.dim() != mesh_->dim())
      throw StructuralError("phase fields do not match the mesh");
    if (dirichlet_)
      for (int k = 0; k < theta_.grid().instants(); ++k)
        for (int b : mesh_->boundary_nodes())
          if (std::abs(theta_.value(k, b)) > 1e-12)
            throw DomainError("theta must vanish on the boundary (instant " + std::to_string(k) + ", node " +
                              std::to_string(b) + ")");
    grad_theta_ = nodal_gradient(theta_);
  }

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const SpaceTimeField& eta() const { return eta_; }
  const SpaceTimeField& theta() const { return theta_; }
  bool theta_dirichlet() const { return dirichlet_; }
  const TimeGrid& grid() const { return eta_.grid(); }

  /// Cell gradients of theta averaged to nodes with cell-measure weights.
  const SpaceTimeField& grad_theta() const { return grad_theta_; }

  PhaseFieldPair time_reversed() const {
    return PhaseFieldPair(mesh_, eta_.time_reversed(), theta_.time_reversed(), dirichlet_);
  }

 private:
  SpaceTimeField nodal_gradient(const SpaceTimeField& f) const {
    const Mesh& m = *mesh_;
    const int n = m.dim(), nodes = m.num_nodes();
    std::vector<double> weight(nodes, 0.0);
    for (int c = 0; c < m.num_cells(); ++c)
      for (int v = 0; v <= n; ++v) weight[m.cell(c)[v]] += m.geometry(c).measure;
    std::vector<double> out(static_cast<std::size_t>(f.grid().instants()) * nodes * n, 0.0);
    for (int k = 0; k < f.grid().instants(); ++k) {
      const auto vals = f.instant(k);
      double* dst = out.data() + static_cast<std::size_t>(k) * nodes * n;
      for (int c = 0; c < m.num_cells(); ++c) {
        const Point g = m.cell_gradient(c, vals);
        const double w = m.geometry(c).measure;
        for (int v = 0; v <= n; ++v)
          for (int r = 0; r < n; ++r) dst[static_cast<std::size_t>(m.cell(c)[v]) * n + r] += w * g[r];
      }
      for (int j = 0; j < nodes; ++j)
        for (int r = 0; r < n; ++r) dst[static_cast<std::size_t>(j) * n + r] /= weight[j];
    }
    return SpaceTimeField(FieldKind::vector, n, nodes, f.grid(), std::move(out));
  }

  std::shared_ptr<const Mesh> mesh_;
  SpaceTimeField eta_, theta_, grad_theta_;
  bool dirichlet_ = false;
};

/// Sextet, zero initial data and the validation report of a builder.
struct KwcSystem {
  CoefficientSextet sextet;
  InitialData initial;
  ValidationReport report;
};

namespace detail {

inline std::string kwc_witness(const PhaseFieldPair& pair, int k, int node, const std::string& what) {
  std::ostringstream out;
  out.precision(17);
  out << "instant " << k << " (t = " << pair.grid().time(k) << "), node " << node << ": " << what;
  return out.str();
}

inline void require_model(const PhaseFieldPair& pair, const ModelFunctions& f) {
  if (!f.g || !f.g_prime || !f.alpha || !f.alpha_prime || !f.alpha_second)
    throw StructuralError("model functions are incomplete");
  if (!(f.eps > 0.0)) throw DomainError("eps must be positive");
  f.alpha0.require_same_shape(pair.eta());
  if (f.alpha0_dt) f.alpha0_dt->require_same_shape(pair.eta());
  const auto& eta = pair.eta();
  for (int k = 0; k < eta.grid().instants(); ++k)
    for (int j = 0; j < eta.num_nodes(); ++j) {
      const double r = eta.value(k, j);
      const double a = f.alpha(r), a2 = f.alpha_second(r), gp = f.g_prime(r), a0 = f.alpha0.value(k, j);
      if (!(a > 0.0) || !std::isfinite(a))
        throw DomainError("alpha must be positive: " + kwc_witness(pair, k, j, "alpha = " + std::to_string(a)));
      if (!(a0 > 0.0))
        throw DomainError("alpha0 must be positive: " + kwc_witness(pair, k, j, "alpha0 = " + std::to_string(a0)));
      if (!std::isfinite(gp) || !std::isfinite(f.alpha_prime(r)))
        throw DomainError("g' and alpha' must be finite: " + kwc_witness(pair, k, j, "eta = " + std::to_string(r)));
      if (a2 < 0.0)
        throw DomainError("μ ≥ 0 violated by alpha'' < 0: " +
                          kwc_witness(pair, k, j, "alpha''(eta) = " + std::to_string(a2)));
    }
}

struct KwcFields {
  SpaceTimeField mu, lambda, omega, A;
};

inline KwcFields kwc_fields(const PhaseFieldPair& pair, const ModelFunctions& f) {
  const auto& eta = pair.eta();
  const auto& grad = pair.grad_theta();
  const TimeGrid g = eta.grid();
  const int n = pair.mesh().dim(), nodes = eta.num_nodes();
  const std::size_t count = static_cast<std::size_t>(g.instants()) * nodes;
  std::vector<double> mu(count), lambda(count), omega(count * n), A(count * n * n);
  for (int k = 0; k < g.instants(); ++k)
    for (int j = 0; j < nodes; ++j) {
      const std::size_t s = static_cast<std::size_t>(k) * nodes + j;
      const double r = eta.value(k, j);
      const FEps fe = f_eps(grad.at(k, j), f.eps);
      mu[s] = f.alpha_second(r) * fe.value;
      lambda[s] = f.g_prime(r);
      const double ap = f.alpha_prime(r), a = f.alpha(r);
      for (int c = 0; c < n; ++c) omega[s * n + c] = ap * fe.gradient[c];
      for (int c = 0; c < n * n; ++c) A[s * n * n + c] = a * fe.hessian[c];
    }
  return {SpaceTimeField(FieldKind::scalar, n, nodes, g, std::move(mu)),
          SpaceTimeField(FieldKind::scalar, n, nodes, g, std::move(lambda)),
          SpaceTimeField(FieldKind::vector, n, nodes, g, std::move(omega)),
          SpaceTimeField(FieldKind::matrix, n, nodes, g, std::move(A))};
}

inline KwcSystem finish(const PhaseFieldPair& pair, CoefficientSextet s) {
  ValidationReport report = validate_sextet(s);
  return {std::move(s), InitialData::zero(pair.mesh()), std::move(report)};
}

}  // namespace detail

/// a = alpha0, b = 0, mu = alpha''(eta) f(grad theta), lambda = g'(eta),
/// omega = alpha'(eta) grad f(grad theta), A = alpha(eta) hess f(grad theta); zero initial data.
inline KwcSystem build_linearized(const PhaseFieldPair& pair, const ModelFunctions& f) {
  detail::require_model(pair, f);
  auto k = detail::kwc_fields(pair, f);
  const Mesh& m = pair.mesh();
  auto b = SpaceTimeField::scalar_constant(m.dim(), m.num_nodes(), pair.grid(), 0.0);
  return detail::finish(pair, CoefficientSextet(pair.mesh_ptr(), f.alpha0, std::move(b), std::move(k.mu),
                                                std::move(k.lambda), std::move(k.omega), std::move(k.A)));
}

/// Time reversal t -> T - t of the linearized fields with a = alpha0(T - t), b = d/dt alpha0(T - t).
inline KwcSystem build_adjoint(const PhaseFieldPair& pair, const ModelFunctions& f) {
  detail::require_model(pair, f);
  auto k = detail::kwc_fields(pair, f);
  const SpaceTimeField dt = f.alpha0_dt ? *f.alpha0_dt : lattice_time_derivative(f.alpha0);
  return detail::finish(pair, CoefficientSextet(pair.mesh_ptr(), f.alpha0.time_reversed(), dt.time_reversed(),
                                                k.mu.time_reversed(), k.lambda.time_reversed(),
                                                k.omega.time_reversed(), k.A.time_reversed()));
}

}  // namespace copar
