#pragma once

#include "copar/integrals.hpp"
#include "copar/residual.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace copar {

/// Data of one instance of the linear system.
struct Problem {
  std::shared_ptr<const Mesh> mesh;
  CoefficientSextet sextet;
  Forcing forcing;
  InitialData initial;
  double nu = 1.0;
};

/// Sliced data of a problem together with the scheme's trajectory.
struct RunRecord {
  SextetSlices coeffs;
  ForcingSlices forcing;
  DiscreteTrajectory traj;

  double tau() const { return traj.tau; }
};

inline RunRecord run_problem(const DiscreteSpaces& sp, const Problem& pb, double tau,
                             const StepOptions& opt = {}) {
  RunRecord r{slice_sextet(pb.sextet, tau), slice_forcing(pb.forcing, tau), {}};
  r.traj = run_scheme(sp, r.coeffs, r.forcing, pb.initial, pb.nu, opt);
  return r;
}

/// Discrete embedding constants of both spaces on one mesh.
inline EmbeddingConstants discrete_embedding_constants(const DiscreteSpaces& sp,
                                                       const EmbeddingOptions& opt = {}) {
  EmbeddingConstants e;
  e.cV4 = embedding_constant(sp.v(), EmbeddingTarget::L4, opt);
  e.cV04 = embedding_constant(sp.v0(), EmbeddingTarget::L4, opt);
  e.cV0H = embedding_constant(sp.v0(), EmbeddingTarget::H, opt);
  e.cVH = embedding_constant(sp.v(), EmbeddingTarget::H, opt);
  return e;
}

/// Evaluated sides of one inequality.
struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double log10_rhs = 0.0;
  bool pass = false;
  bool applicable = true;
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::string> notes;

  double constant(const std::string& key) const {
    for (const auto& [k, v] : constants)
      if (k == key) return v;
    throw StructuralError("report has no constant " + key);
  }

  std::string to_text() const {
    std::ostringstream out;
    char buf[64];
    const auto num = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    out << "name: " << name << "\n";
    out << "applicable: " << (applicable ? "true" : "false") << "\n";
    out << "pass: " << (pass ? "true" : "false") << "\n";
    out << "lhs: " << num(lhs) << "\n";
    out << "rhs: " << num(rhs) << "\n";
    out << "log10_rhs: " << num(log10_rhs) << "\n";
    out << "margin: " << num(margin) << "\n";
    for (const auto& [k, v] : constants) out << "constant." << k << ": " << num(v) << "\n";
    for (const auto& n : notes) out << "note: " << n << "\n";
    return out.str();
  }
};

namespace detail {

inline bool passes(double lhs, double rhs) {
  return rhs - lhs >= -1e-10 * std::max(1.0, rhs);
}

/// Fills rhs, margin, log10 and pass from lhs and the natural log of rhs.
inline void settle(EstimateReport& r, double lhs, double log_rhs) {
  r.lhs = lhs;
  r.log10_rhs = log_rhs / std::log(10.0);
  r.rhs = std::exp(log_rhs);
  r.margin = r.rhs - lhs;
  r.pass = r.applicable && passes(lhs, r.rhs);
}

/// log(x) with log(0) = -inf.
inline double safe_log(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

/// int w v^2 for nodal P1 w and v.
inline double weighted_sq(const Mesh& m, std::span<const double> w, std::span<const double> v) {
  return integrate(m, [&](int c, const auto& b) {
    const double x = m.interpolate(c, b, v);
    return m.interpolate(c, b, w) * x * x;
  });
}

inline std::vector<double> nodal_difference(std::span<const double> x, std::span<const double> y) {
  std::vector<double> d(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) d[j] = x[j] - y[j];
  return d;
}

inline void require_same_run_shape(const DiscreteSpaces& sp, const RunRecord& r) {
  if (r.coeffs.a.nodes != sp.mesh().num_nodes()) throw StructuralError("run and spaces live on different meshes");
}

}  // namespace detail

/// Discrete a-priori bound of the scheme (Gronwall form), plus its intermediate discrete line.
inline EstimateReport check_apriori(const DiscreteSpaces& sp, const Problem& pb, const RunRecord& run,
                                    const EmbeddingConstants& emb) {
  detail::require_same_run_shape(sp, run);
  const auto& traj = run.traj;
  const SextetNorms& n = pb.sextet.norms();
  const SchemeConstants k = scheme_constants(n, pb.nu, traj.T, emb);
  const double c0 = k.c0_star, tau = traj.tau;
  EstimateReport r;
  r.name = "apriori";
  r.constants = {{"tau", tau}, {"delta0", k.delta0}, {"C0*", c0}, {"log_C1*", k.log_c1_star},
                 {"delta_*", n.delta_star}, {"|a|_inf", n.a_sup}, {"T", traj.T}};
  if (!(tau < k.delta0)) {
    r.applicable = false;
    r.notes.push_back("tau >= delta0: the bound is not asserted");
    detail::settle(r, 0.0, 0.0);
    r.pass = false;
    return r;
  }
  const Mesh& m = sp.mesh();
  const auto [hf, kf] = forcing_functionals(sp, run.forcing);
  const auto zn0 = sp.v0().extend(traj.z[0]);
  const double p0h = std::pow(sp.norm_h(Boundary::neumann, traj.p[0]), 2);
  const double z0h = std::pow(sp.norm_h(Boundary::dirichlet0, traj.z[0]), 2);
  const double az0 = detail::weighted_sq(m, run.coeffs.a[0], zn0);

  double lhs = 0.0, cum_len = 0.0, cum_tau = 0.0, forcing_len = 0.0, forcing_tau = 0.0;
  double worst_line = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= traj.steps; ++i) {
    const double len = traj.interval_length(i);
    const double pv = std::pow(sp.norm(Boundary::neumann, traj.p[i]), 2);
    const double zv = std::pow(sp.norm(Boundary::dirichlet0, traj.z[i]), 2);
    const double ph = std::pow(sp.norm_h(Boundary::neumann, traj.p[i]), 2);
    const double zh = std::pow(sp.norm_h(Boundary::dirichlet0, traj.z[i]), 2);
    const double hd = std::pow(sp.dual_norm(Boundary::neumann, hf[i]), 2);
    const double kd = std::pow(sp.dual_norm(Boundary::dirichlet0, kf[i]), 2);
    cum_len += len * (pv + pb.nu * zv);
    cum_tau += tau * (pv + pb.nu * zv);
    forcing_len += len * (hd + kd);
    forcing_tau += tau * (hd + kd);
    lhs = std::max(lhs, ph + n.delta_star * zh + cum_len);

    const double azi = detail::weighted_sq(m, run.coeffs.a[i], sp.v0().extend(traj.z[i]));
    const double line_lhs = ph + (1.0 + c0 * tau) * azi + cum_tau;
    const double line_log = 3.0 * c0 * i * tau / (1.0 - 3.0 * c0 * tau) +
                            detail::safe_log(p0h + (1.0 + c0 * tau) * az0 + 2.0 * c0 * forcing_tau);
    const double line_rhs = std::exp(line_log);
    worst_line = std::min(worst_line, line_rhs - line_lhs + 1e-10 * std::max(1.0, line_rhs));
  }
  const double data = p0h + z0h + forcing_len;
  const double log_rhs = std::log(2.0 * (1.0 + c0 + n.a_sup)) + 6.0 * c0 * traj.T + 1.0 + detail::safe_log(data);
  detail::settle(r, lhs, log_rhs);
  r.constants.emplace_back("discrete_gronwall_slack", worst_line);
  if (traj.steps > 0 && worst_line < 0.0) {
    r.pass = false;
    r.notes.push_back("intermediate discrete Gronwall line violated");
  }
  if (traj.partial_final_step) r.notes.push_back("partial final step included");
  return r;
}

/// The six terms of R* at step i, with the reference trajectory [p2, z2].
struct RStarTerms {
  std::array<double, 6> terms{};
  double total() const { return terms[0] + terms[1] + terms[2] + terms[3] + terms[4] + terms[5]; }
};

/// Lattice maximum of |a1 - a2| over all samples.
inline double a_difference_sup(const CoefficientSextet& s1, const CoefficientSextet& s2) {
  s1.a().require_same_shape(s2.a());
  const auto x = s1.a().values(), y = s2.a().values();
  double m = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) m = std::max(m, std::abs(x[j] - y[j]));
  return m;
}

inline RStarTerms r_star(const DiscreteSpaces& sp, const SextetSlices& s1, const SextetSlices& s2,
                         const DiscreteTrajectory& traj2, int i, double a_diff_sup) {
  if (traj2.p.size() < 2) throw DomainError("R* needs a reference trajectory with a time derivative");
  if (i < 1 || i > traj2.steps) throw DomainError("R* step index out of range");
  if (s1.steps() != s2.steps() || s1.tau() != s2.tau() || s1.a.nodes != s2.a.nodes)
    throw StructuralError("R* needs both sextets on one mesh and time grid");
  const Mesh& m = sp.mesh();
  const int dim = m.dim();
  const auto c1 = s1.at(i), c2 = s2.at(i);
  const Vector dz = (traj2.z[i] - traj2.z[i - 1]) / traj2.tau;
  const double dz_dual = sp.dual_norm_of_h(Boundary::dirichlet0, dz);
  const auto pn = sp.v().extend(traj2.p[i]);
  const auto zn = sp.v0().extend(traj2.z[i]);
  const double pv2 = std::pow(sp.norm(Boundary::neumann, traj2.p[i]), 2);
  const double zv2 = std::pow(sp.norm(Boundary::dirichlet0, traj2.z[i]), 2);
  const auto da = detail::nodal_difference(c1.a, c2.a);
  const auto db = detail::nodal_difference(c1.b, c2.b);
  const auto dmu = detail::nodal_difference(c1.mu, c2.mu);
  const auto dl = detail::nodal_difference(c1.lambda, c2.lambda);
  const auto dw = detail::nodal_difference(c1.omega, c2.omega);
  const auto dA = detail::nodal_difference(c1.A, c2.A);

  RStarTerms r;
  r.terms[0] = dz_dual * dz_dual * (a_diff_sup * a_diff_sup + std::pow(l4_norm_gradient(m, da), 2));
  r.terms[1] = pv2 * (std::pow(l2_norm(m, dmu), 2) + std::pow(l4_norm(m, dw, dim), 2));
  r.terms[2] = zv2 * std::pow(l4_norm(m, db), 2);
  r.terms[3] = integrate(m, [&](int c, const auto& b) {
    const double v = m.interpolate(c, b, pn) * m.interpolate(c, b, dl);
    return v * v;
  });
  r.terms[4] = integrate(m, [&](int c, const auto& b) {
    const Point g = m.cell_gradient(c, zn);
    double v = 0.0;
    for (int k = 0; k < dim; ++k) v += g[k] * m.interpolate(c, b, dw, dim, k);
    return v * v;
  });
  r.terms[5] = integrate(m, [&](int c, const auto& b) {
    const Point g = m.cell_gradient(c, zn);
    double s = 0.0;
    for (int row = 0; row < dim; ++row) {
      double v = 0.0;
      for (int col = 0; col < dim; ++col) v += m.interpolate(c, b, dA, dim * dim, row * dim + col) * g[col];
      s += v * v;
    }
    return s;
  });
  return r;
}

/// Continuous-dependence estimate between two runs on one mesh and step size.
inline EstimateReport check_continuous_dependence(const DiscreteSpaces& sp, const Problem& pb1,
                                                  const RunRecord& r1, const Problem& pb2,
                                                  const RunRecord& r2, const EmbeddingConstants& emb) {
  detail::require_same_run_shape(sp, r1);
  detail::require_same_run_shape(sp, r2);
  if (r1.traj.tau != r2.traj.tau || r1.traj.steps != r2.traj.steps || r1.traj.T != r2.traj.T)
    throw StructuralError("continuous dependence needs runs on a common time grid");
  if (pb1.nu != pb2.nu) throw StructuralError("continuous dependence needs a common nu");
  const Mesh& m = sp.mesh();
  const auto& t1 = r1.traj;
  const auto& t2 = r2.traj;
  const double nu = pb1.nu, T = t1.T;
  const double cs = c_star(pb1.sextet.norms(), nu, emb);
  const double a_sup = a_difference_sup(pb1.sextet, pb2.sextet);

  const auto [h1, k1] = forcing_functionals(sp, r1.forcing);
  const auto [h2, k2] = forcing_functionals(sp, r2.forcing);
  const Vector dp0 = t1.p[0] - t2.p[0], dz0 = t1.z[0] - t2.z[0];
  const double init = std::pow(sp.norm_h(Boundary::neumann, dp0), 2) +
                      detail::weighted_sq(m, r1.coeffs.a[0], sp.v0().extend(dz0));
  double lhs = init, cum = 0.0, forcing = 0.0, rstar = 0.0;
  for (int i = 1; i <= t1.steps; ++i) {
    const double len = t1.interval_length(i);
    const Vector dp = t1.p[i] - t2.p[i], dz = t1.z[i] - t2.z[i];
    cum += len * (std::pow(sp.norm(Boundary::neumann, dp), 2) + nu * std::pow(sp.norm(Boundary::dirichlet0, dz), 2));
    const double at_t = std::pow(sp.norm_h(Boundary::neumann, dp), 2) +
                        detail::weighted_sq(m, r1.coeffs.a[i], sp.v0().extend(dz));
    lhs = std::max(lhs, at_t + cum);
    forcing += len * (std::pow(sp.dual_norm(Boundary::neumann, h1[i] - h2[i]), 2) +
                      std::pow(sp.dual_norm(Boundary::dirichlet0, k1[i] - k2[i]), 2));
    rstar += len * r_star(sp, r1.coeffs, r2.coeffs, t2, i, a_sup).total();
  }
  EstimateReport r;
  r.name = "continuous_dependence";
  r.constants = {{"C*", cs}, {"T", T}, {"tau", t1.tau}, {"initial_term", init},
                 {"forcing_integral", forcing}, {"R*_integral", rstar}, {"|a1-a2|_C", a_sup}};
  r.notes.push_back("discrete trajectories stand in for exact solutions");
  if (t1.partial_final_step) r.notes.push_back("partial final step included");
  const double log_rhs = 3.0 * cs * T + detail::safe_log(init + 2.0 * cs * (forcing + rstar));
  detail::settle(r, lhs, log_rhs);
  return r;
}

/// Norm sandwich of the data-to-solution map for one run; lhs is the solution norm, rhs the
/// upper bound and constant "lower_bound" the lower one.
inline EstimateReport check_isomorphism_sandwich(const DiscreteSpaces& sp, const Problem& pb,
                                                 const RunRecord& run, const EmbeddingConstants& emb) {
  detail::require_same_run_shape(sp, run);
  const auto& traj = run.traj;
  const SchemeConstants k = scheme_constants(pb.sextet.norms(), pb.nu, traj.T, emb);
  const Quadruple q = Quadruple::from_trajectory(traj);

  double zeta2 = detail::w12_dual_sq(sp, Boundary::neumann, q.p, q.tau, q.T, q.steps) +
                 detail::w12_dual_sq(sp, Boundary::dirichlet0, q.z, q.tau, q.T, q.steps);
  for (int i = 1; i <= q.steps; ++i)
    zeta2 += q.interval_length(i) * (std::pow(sp.norm(Boundary::neumann, q.p[i]), 2) +
                                      std::pow(sp.norm(Boundary::dirichlet0, q.z[i]), 2));
  double c_h = 0.0;
  for (int i = 0; i <= q.steps; ++i) {
    Vector p = q.p[i], z = q.z[i];
    if (i == q.steps && traj.partial_final_step) {
      const double s = q.interval_length(i) / q.tau;
      p = q.p[i - 1] + s * (q.p[i] - q.p[i - 1]);
      z = q.z[i - 1] + s * (q.z[i] - q.z[i - 1]);
    }
    c_h = std::max(c_h, std::hypot(sp.norm_h(Boundary::neumann, p), sp.norm_h(Boundary::dirichlet0, z)));
  }
  const double solution = std::sqrt(zeta2) + c_h;
  const double y = forcing_y_norm(sp, run.forcing);
  const double data = std::sqrt(std::pow(sp.norm_h(Boundary::neumann, traj.p[0]), 2) +
                                std::pow(sp.norm_h(Boundary::dirichlet0, traj.z[0]), 2) + y * y);
  const double m0_star = 1.0 / k.m0;
  const double c0 = k.c0_star, T = traj.T;
  const double log_m1_star = std::log(4.0 * k.m1 * (1.0 + T) * (1.0 + k.cVH + k.cV0H)) +
                             std::log1p(std::exp(std::log(c0) + 1.5 * c0 * T));
  const double lower = m0_star * data;

  EstimateReport r;
  r.name = "isomorphism_sandwich";
  r.constants = {{"M0*", m0_star},  {"log_M1*", log_m1_star}, {"M0", k.m0}, {"M1", k.m1},
                 {"C0*", c0},       {"data_norm", data},      {"lower_bound", lower},
                 {"C_H^V*", k.cVH}, {"C_H^V0*", k.cV0H}};
  detail::settle(r, solution, log_m1_star + detail::safe_log(data));
  if (!detail::passes(lower, solution)) {
    r.pass = false;
    r.notes.push_back("lower bound violated");
  }
  r.margin = std::min(r.margin, solution - lower);
  return r;
}

}  // namespace copar
