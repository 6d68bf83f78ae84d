#pragma once

#include "copar/core.hpp"
#include "copar/field.hpp"
#include "copar/integrals.hpp"
#include "copar/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace copar {

/// Lattice sup-norms of a sextet and the infimum of a.
struct SextetNorms {
  double a_sup = 0.0;       ///< max |a|
  double a_grad_sup = 0.0;  ///< max element |grad a|
  double a_dt_sup = 0.0;    ///< max difference quotient of a in time
  double a_w1inf = 0.0;     ///< a_sup + a_grad_sup + a_dt_sup
  double b_sup = 0.0;
  double mu_linf_h = 0.0;   ///< max over instants of the L2 norm of mu
  double lambda_sup = 0.0;
  double omega_sup = 0.0;   ///< max Euclidean norm
  double A_sup = 0.0;       ///< max spectral norm
  double delta_star = 0.0;  ///< min a
};

namespace detail {

inline double spectral_norm(std::span<const double> m, int n) {
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = m[i * n + j];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Minimum over the sampling lattice of a scalar field.
inline double delta_star(const SpaceTimeField& f) {
  if (f.kind() != FieldKind::scalar) throw StructuralError("delta_star needs a scalar field");
  const auto v = f.values();
  if (v.empty()) throw DomainError("delta_star of an empty sample set");
  return *std::min_element(v.begin(), v.end());
}

/// The data [a, b, mu, lambda, omega, A] on one mesh and one time grid.
///
/// Construction checks shapes only; admissibility is reported by validate_sextet.
class CoefficientSextet {
 public:
  CoefficientSextet(std::shared_ptr<const Mesh> mesh, SpaceTimeField a, SpaceTimeField b,
                    SpaceTimeField mu, SpaceTimeField lambda, SpaceTimeField omega,
                    SpaceTimeField A)
      : mesh_(std::move(mesh)),
        a_(std::move(a)),
        b_(std::move(b)),
        mu_(std::move(mu)),
        lambda_(std::move(lambda)),
        omega_(std::move(omega)),
        A_(std::move(A)) {
    if (!mesh_) throw StructuralError("sextet needs a mesh");
    const int n = mesh_->dim();
    const auto check = [&](const SpaceTimeField& f, FieldKind kind, const char* name) {
      if (f.kind() != kind) throw StructuralError(std::string("field ") + name + " has wrong kind");
      if (f.dim() != n)
        throw StructuralError(std::string("field ") + name + " dimension differs from mesh");
      if (f.num_nodes() != mesh_->num_nodes())
        throw StructuralError(std::string("field ") + name + " node count differs from mesh");
      if (f.grid().T != a_.grid().T || f.grid().intervals != a_.grid().intervals)
        throw StructuralError(std::string("field ") + name + " time grid differs from a");
    };
    check(a_, FieldKind::scalar, "a");
    check(b_, FieldKind::scalar, "b");
    check(mu_, FieldKind::scalar, "mu");
    check(lambda_, FieldKind::scalar, "lambda");
    check(omega_, FieldKind::vector, "omega");
    check(A_, FieldKind::matrix, "A");
    compute_norms();
  }

  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const Mesh& mesh() const { return *mesh_; }
  const SpaceTimeField& a() const { return a_; }
  const SpaceTimeField& b() const { return b_; }
  const SpaceTimeField& mu() const { return mu_; }
  const SpaceTimeField& lambda() const { return lambda_; }
  const SpaceTimeField& omega() const { return omega_; }
  const SpaceTimeField& A() const { return A_; }
  const SextetNorms& norms() const { return norms_; }
  const TimeGrid& grid() const { return a_.grid(); }
  double T() const { return a_.grid().T; }
  int dim() const { return mesh_->dim(); }

 private:
  void compute_norms() {
    const Mesh& m = *mesh_;
    const TimeGrid& g = a_.grid();
    SextetNorms s;
    s.a_sup = detail::max_abs(a_.values());
    s.delta_star = delta_star(a_);
    for (int k = 0; k < g.instants(); ++k) {
      const auto ak = a_.instant(k);
      for (int c = 0; c < m.num_cells(); ++c) {
        const Point gr = m.cell_gradient(c, ak);
        s.a_grad_sup = std::max(s.a_grad_sup, std::hypot(gr[0], gr[1]));
      }
      if (k + 1 < g.instants()) {
        const auto an = a_.instant(k + 1);
        const double dt = g.time(k + 1) - g.time(k);
        for (std::size_t j = 0; j < ak.size(); ++j)
          s.a_dt_sup = std::max(s.a_dt_sup, std::abs(an[j] - ak[j]) / dt);
      }
      s.mu_linf_h = std::max(s.mu_linf_h, l2_norm(m, mu_.instant(k)));
    }
    s.a_w1inf = s.a_sup + s.a_grad_sup + s.a_dt_sup;
    s.b_sup = detail::max_abs(b_.values());
    s.lambda_sup = detail::max_abs(lambda_.values());
    const int n = dim();
    for (int k = 0; k < g.instants(); ++k) {
      for (int node = 0; node < m.num_nodes(); ++node) {
        const auto w = omega_.at(k, node);
        double e = 0.0;
        for (double x : w) e += x * x;
        s.omega_sup = std::max(s.omega_sup, std::sqrt(e));
        s.A_sup = std::max(s.A_sup, detail::spectral_norm(A_.at(k, node), n));
      }
    }
    norms_ = s;
  }

  std::shared_ptr<const Mesh> mesh_;
  SpaceTimeField a_, b_, mu_, lambda_, omega_, A_;
  SextetNorms norms_;
};

struct ConditionResult {
  std::string name;
  bool pass = true;
  std::string witness;  ///< sample location and value on failure
};

struct ValidationReport {
  std::vector<ConditionResult> conditions;
  SextetNorms norms;

  bool passed() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return c.pass; });
  }

  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::string to_text() const {
    std::ostringstream out;
    out.precision(17);
    for (const auto& c : conditions) {
      out << "[condition]\nname = " << c.name << "\npass = " << (c.pass ? "true" : "false")
          << '\n';
      if (!c.pass) out << "witness = " << c.witness << '\n';
    }
    out << "[norms]\n"
        << "delta_star = " << norms.delta_star << "\na_w1inf = " << norms.a_w1inf
        << "\na_sup = " << norms.a_sup << "\na_grad_sup = " << norms.a_grad_sup
        << "\na_dt_sup = " << norms.a_dt_sup << "\nb_sup = " << norms.b_sup
        << "\nmu_linf_h = " << norms.mu_linf_h << "\nlambda_sup = " << norms.lambda_sup
        << "\nomega_sup = " << norms.omega_sup << "\nA_sup = " << norms.A_sup << '\n';
    out << "[result]\npass = " << (passed() ? "true" : "false") << '\n';
    return out.str();
  }
};

namespace detail {

inline std::string witness(const SpaceTimeField& f, const Mesh& mesh, int k, int node,
                           const std::string& what) {
  std::ostringstream out;
  out.precision(17);
  out << "instant " << k << " (t = " << f.grid().time(k) << "), node " << node << " (x = "
      << mesh.node(node)[0];
  if (mesh.dim() == 2) out << ", " << mesh.node(node)[1];
  out << "): " << what;
  return out.str();
}

}  // namespace detail

/// Checks every admissibility condition sample by sample and records the first
/// witnessing sample of each failure.
inline ValidationReport validate_sextet(const CoefficientSextet& s) {
  ValidationReport report;
  report.norms = s.norms();
  const Mesh& mesh = s.mesh();
  const int instants = s.grid().instants();
  const int nodes = mesh.num_nodes();
  const int n = s.dim();

  // Samples are finite by construction, so the boundedness conditions hold on the lattice.
  report.conditions.push_back({"a ∈ W^{1,∞}(Q)", true, {}});

  ConditionResult log_a{"log a ∈ L^∞(Q)", true, {}};
  ConditionResult mu_pos{"μ ≥ 0", true, {}};
  ConditionResult sym{"A symmetric", true, {}};
  ConditionResult pd{"A positive definite", true, {}};
  for (int k = 0; k < instants; ++k) {
    for (int node = 0; node < nodes; ++node) {
      const double a = s.a().value(k, node);
      if (log_a.pass && !(a > 0.0)) {
        log_a.pass = false;
        log_a.witness = detail::witness(s.a(), mesh, k, node, "a = " + std::to_string(a));
      }
      const double mu = s.mu().value(k, node);
      if (mu_pos.pass && mu < 0.0) {
        mu_pos.pass = false;
        mu_pos.witness = detail::witness(s.mu(), mesh, k, node, "mu = " + std::to_string(mu));
      }
      const auto A = s.A().at(k, node);
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = A[i * n + j];
      const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
      const double scale = m.cwiseAbs().maxCoeff();
      if (sym.pass && asym > 1e-12 * scale) {
        sym.pass = false;
        std::ostringstream w;
        w << "‖A−Aᵀ‖ = " << asym;
        sym.witness = detail::witness(s.A(), mesh, k, node, w.str());
      }
      const Eigen::MatrixXd h = 0.5 * (m + m.transpose());
      const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues()(0);
      if (pd.pass && !(min_eig > 0.0)) {
        pd.pass = false;
        pd.witness = detail::witness(s.A(), mesh, k, node,
                                     "smallest eigenvalue " + std::to_string(min_eig));
      }
    }
  }
  report.conditions.push_back(log_a);
  report.conditions.push_back({"b ∈ L^∞(Q)", true, {}});
  report.conditions.push_back({"μ ∈ L^∞(0,T;H)", true, {}});
  report.conditions.push_back(mu_pos);
  report.conditions.push_back({"λ ∈ L^∞(Q)", true, {}});
  report.conditions.push_back({"ω ∈ L^∞(Q)^N", true, {}});
  report.conditions.push_back({"A ∈ L^∞(Q)^{N×N}", true, {}});
  report.conditions.push_back(sym);
  report.conditions.push_back(pd);
  return report;
}

/// Discrete embedding constants of the finite element spaces (NaN until computed).
struct EmbeddingConstants {
  double cV4 = std::numeric_limits<double>::quiet_NaN();   ///< V_h into L4
  double cV04 = std::numeric_limits<double>::quiet_NaN();  ///< V0,h into L4
  double cV0H = std::numeric_limits<double>::quiet_NaN();  ///< V0,h into H
  double cVH = std::numeric_limits<double>::quiet_NaN();   ///< V_h into H
};

inline double min_coercivity(const SextetNorms& n, double nu) {
  return std::min({1.0, nu, n.delta_star});
}

inline double tau_star(const SextetNorms& n, double nu) {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (!(n.delta_star > 0.0)) throw DomainError("tau_star needs delta_*(a) > 0");
  const double w2 = n.omega_sup * n.omega_sup;
  return min_coercivity(n, nu) /
         (16.0 * (1.0 + nu + n.delta_star) * (1.0 + n.b_sup + n.lambda_sup + w2));
}

inline double tau_star(const CoefficientSextet& s, double nu) { return tau_star(s.norms(), nu); }

namespace detail {

inline void require_embedding(double c, const char* name) {
  if (!std::isfinite(c)) throw DomainError(std::string("embedding constant ") + name + " missing");
}

inline double c_star_impl(const SextetNorms& n, double nu, double cV4, double cV04,
                          bool with_a) {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (!(n.delta_star > 0.0)) throw DomainError("C* needs delta_*(a) > 0");
  const double c2 = cV4 * cV4;
  const double data = 1.0 + (with_a ? n.a_w1inf : 0.0) + n.b_sup + n.lambda_sup +
                      n.omega_sup * n.omega_sup;
  return 9.0 * (1.0 + nu) / min_coercivity(n, nu) * (1.0 + c2 + c2 * c2 + cV04 * cV04) * data;
}

}  // namespace detail

inline double c_star(const SextetNorms& n, double nu, const EmbeddingConstants& e) {
  detail::require_embedding(e.cV4, "cV4");
  detail::require_embedding(e.cV04, "cV04");
  return detail::c_star_impl(n, nu, e.cV4, e.cV04, true);
}

/// C* without the |a|_{W^{1,inf}} contribution.
inline double c_tilde_star(const SextetNorms& n, double nu, const EmbeddingConstants& e) {
  detail::require_embedding(e.cV4, "cV4");
  detail::require_embedding(e.cV04, "cV04");
  return detail::c_star_impl(n, nu, e.cV4, e.cV04, false);
}

struct OperatorBounds {
  double m0 = 0.0;
  double m1 = 0.0;
};

inline OperatorBounds operator_bounds(const SextetNorms& n, double nu,
                                      const EmbeddingConstants& e) {
  detail::require_embedding(e.cV4, "cV4");
  detail::require_embedding(e.cV0H, "cV0H");
  if (!(n.delta_star > 0.0)) throw DomainError("M1 needs delta_*(a) > 0");
  const double front = 2.0 * (1.0 + nu) * (1.0 + e.cV4 * e.cV4 + e.cV0H);
  const double rest = n.b_sup + n.mu_linf_h + n.lambda_sup + n.omega_sup + n.A_sup;
  OperatorBounds out;
  out.m0 = front * (1.0 + n.a_sup + n.a_grad_sup + rest);
  out.m1 = front *
           (1.0 + (1.0 + e.cV0H) * (n.a_sup + n.a_grad_sup) / (n.delta_star * n.delta_star)) *
           (1.0 + rest);
  return out;
}

/// Every explicit constant for one sextet, viscosity and horizon.
struct SchemeConstants {
  double nu = 0.0;
  double T = 0.0;
  double tau_star = 0.0;
  double delta0 = 0.0;
  double c_star = 0.0;
  double c_tilde_star = 0.0;
  double c0_star = 0.0;
  double log_c1_star = 0.0;  ///< natural log of C1*
  double c1_star = 0.0;      ///< may overflow to inf
  double m0 = 0.0;
  double m1 = 0.0;
  double cV4 = 0.0;
  double cV04 = 0.0;
  double cV0H = 0.0;
  double cVH = 0.0;
};

inline SchemeConstants scheme_constants(const SextetNorms& n, double nu, double T,
                                        const EmbeddingConstants& e) {
  if (!(T > 0.0)) throw DomainError("T must be positive");
  SchemeConstants k;
  k.nu = nu;
  k.T = T;
  k.tau_star = tau_star(n, nu);
  k.c_star = c_star(n, nu, e);
  k.c_tilde_star = c_tilde_star(n, nu, e);
  k.c0_star = k.c_star;
  k.delta0 = std::nextafter(std::min(k.tau_star, 1.0 / (6.0 * k.c0_star)), 0.0);
  k.log_c1_star = 0.5 * (std::log(2.0 * (1.0 + k.c0_star + n.a_sup)) + 6.0 * k.c0_star * T + 1.0 -
                         std::log(min_coercivity(n, nu)));
  k.c1_star = std::exp(k.log_c1_star);
  const auto mb = operator_bounds(n, nu, e);
  k.m0 = mb.m0;
  k.m1 = mb.m1;
  k.cV4 = e.cV4;
  k.cV04 = e.cV04;
  k.cV0H = e.cV0H;
  k.cVH = e.cVH;
  return k;
}

// ---------------------------------------------------------------------------
// Time slicing and interpolants

enum class SliceMode { average, point };
enum class InterpolantKind { forward, backward, linear };

/// Number of steps n = ceil(T / tau) (tolerant to round-off in T / tau).
inline int step_count(double T, double tau) {
  return std::max(1, static_cast<int>(std::ceil(T / tau - 1e-9)));
}

/// Per-index values gamma_i, i = 0..steps, of one field.
struct TimeSlices {
  double tau = 0.0;
  double T = 0.0;
  int steps = 0;
  FieldKind kind = FieldKind::scalar;
  int dim = 1;
  int nodes = 0;
  bool partial_final_step = false;
  std::vector<std::vector<double>> slices;

  int components() const { return component_count(kind, dim); }
  std::span<const double> operator[](int i) const { return slices[i]; }
  double time(int i) const { return i * tau; }
  /// Length of (t_{i-1}, t_i) intersected with (0, T).
  double interval_length(int i) const { return std::min(i * tau, T) - (i - 1) * tau; }
};

inline TimeSlices discretize_time(const SpaceTimeField& f, double tau, SliceMode mode) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
  TimeSlices s;
  s.tau = tau;
  s.T = f.grid().T;
  s.steps = step_count(s.T, tau);
  s.kind = f.kind();
  s.dim = f.dim();
  s.nodes = f.num_nodes();
  s.partial_final_step = s.steps * tau > s.T * (1.0 + 1e-12) + 1e-12;
  s.slices.reserve(s.steps + 1);
  const auto first = f.instant(0);
  s.slices.emplace_back(first.begin(), first.end());
  for (int i = 1; i <= s.steps; ++i) {
    const double t0 = (i - 1) * tau;
    const double t1 = std::min(i * tau, s.T);
    if (mode == SliceMode::average) {
      s.slices.push_back(t1 > t0 ? f.average(t0, t1) : f.at_time(s.T));
    } else {
      s.slices.push_back(f.at_time(std::min(i * tau, s.T)));
    }
  }
  return s;
}

/// Indices and weights of an interpolant at t: value = w_hi * seq[hi] + w_lo * seq[lo].
struct InterpolantWeights {
  int hi = 0;
  double w_hi = 1.0;
  int lo = 0;
  double w_lo = 0.0;
};

inline InterpolantWeights locate(double tau, double T, int steps, InterpolantKind kind, double t) {
  const double slack = 1e-12 * std::max(1.0, T);
  if (!(t >= -slack) || !(t <= T + slack)) throw DomainError("time outside [0, T]");
  t = std::clamp(t, 0.0, T);
  const double s = t / tau;
  const double r = std::round(s);
  const bool on_grid = std::abs(s - r) <= 1e-9;
  InterpolantWeights w;
  switch (kind) {
    case InterpolantKind::forward: {
      int i = t <= 0.0 ? 0 : (on_grid ? static_cast<int>(r) : static_cast<int>(std::ceil(s)));
      w.hi = std::min(i, steps);
      w.lo = w.hi;
      return w;
    }
    case InterpolantKind::backward: {
      int i = on_grid ? static_cast<int>(r) - 1 : static_cast<int>(std::floor(s));
      w.hi = std::clamp(i, 0, steps);
      w.lo = w.hi;
      return w;
    }
    case InterpolantKind::linear: {
      int i = on_grid ? static_cast<int>(r) : static_cast<int>(std::ceil(s));
      i = std::min(i, steps);
      if (i <= 0) return w;
      w.hi = i;
      w.lo = i - 1;
      w.w_hi = on_grid && i == static_cast<int>(r) ? 1.0 : (t - (i - 1) * tau) / tau;
      w.w_lo = 1.0 - w.w_hi;
      return w;
    }
  }
  return w;
}

inline std::vector<double> interpolant_eval(const TimeSlices& s, InterpolantKind kind, double t) {
  const auto w = locate(s.tau, s.T, s.steps, kind, t);
  std::vector<double> out(s.slices[w.hi].size());
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = w.w_hi * s.slices[w.hi][j] + w.w_lo * s.slices[w.lo][j];
  return out;
}

}  // namespace copar
