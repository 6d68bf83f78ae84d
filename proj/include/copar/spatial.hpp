#pragma once

#include "copar/core.hpp"
#include "copar/integrals.hpp"
#include "copar/mesh.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <span>
#include <vector>

namespace copar {

enum class Boundary { neumann, dirichlet0 };

/// P1 Lagrange space on a mesh; dirichlet0 drops the boundary nodes.
class FeSpace {
 public:
  FeSpace(std::shared_ptr<const Mesh> mesh, Boundary bc) : mesh_(std::move(mesh)), bc_(bc) {
    if (!mesh_) throw StructuralError("space needs a mesh");
    node_to_dof_.assign(mesh_->num_nodes(), -1);
    for (int n = 0; n < mesh_->num_nodes(); ++n) {
      if (bc_ == Boundary::dirichlet0 && mesh_->on_boundary(n)) continue;
      node_to_dof_[n] = static_cast<int>(dof_to_node_.size());
      dof_to_node_.push_back(n);
    }
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  Boundary bc() const { return bc_; }
  int size() const { return static_cast<int>(dof_to_node_.size()); }
  int dof(int node) const { return node_to_dof_[node]; }
  int node(int dof) const { return dof_to_node_[dof]; }

  /// Nodal values at dofs (boundary values are dropped for dirichlet0).
  Vector restrict(std::span<const double> nodal) const {
    if (static_cast<int>(nodal.size()) != mesh_->num_nodes())
      throw StructuralError("nodal array size differs from mesh node count");
    Vector x(size());
    for (int d = 0; d < size(); ++d) x(d) = nodal[dof_to_node_[d]];
    return x;
  }

  /// Nodal array of a dof vector, zero on eliminated nodes.
  std::vector<double> extend(const Vector& x) const {
    if (x.size() != size()) throw StructuralError("dof vector size differs from space");
    std::vector<double> nodal(mesh_->num_nodes(), 0.0);
    for (int d = 0; d < size(); ++d) nodal[dof_to_node_[d]] = x(d);
    return nodal;
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  Boundary bc_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
};

inline bool is_symmetric(const SparseMatrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const SparseMatrix t = m.transpose();
  const SparseMatrix d = m - t;
  double scale = 0.0, diff = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) diff = std::max(diff, std::abs(it.value()));
  return diff <= rel_tol * scale;
}

/// Sparse matrix in compressed row layout with the spaces of its rows and columns.
struct SparseOperator {
  SparseMatrix matrix;
  Boundary row_space = Boundary::neumann;
  Boundary col_space = Boundary::neumann;
  bool symmetric = false;  ///< verified, not merely claimed

  static SparseOperator make(SparseMatrix m, Boundary rows, Boundary cols, bool claim_symmetric) {
    SparseOperator op;
    op.matrix = std::move(m);
    op.matrix.makeCompressed();
    op.row_space = rows;
    op.col_space = cols;
    op.symmetric = claim_symmetric && is_symmetric(op.matrix);
    return op;
  }

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  Vector operator*(const Vector& x) const { return matrix * x; }
};

/// Coordinate text format: header "rows cols nnz", then "row col value" lines.
inline void write_matrix(const SparseOperator& op, std::ostream& out) {
  out.precision(17);
  out << op.rows() << ' ' << op.cols() << ' ' << op.matrix.nonZeros() << '\n';
  for (int k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

namespace detail {

/// Accumulates node-level local contributions into dof-level triplets.
class TripletSink {
 public:
  TripletSink(const FeSpace& rows, const FeSpace& cols) : rows_(rows), cols_(cols) {}

  void add(int node_i, int node_j, double v) {
    const int i = rows_.dof(node_i), j = cols_.dof(node_j);
    if (i >= 0 && j >= 0) triplets_.emplace_back(i, j, v);
  }

  SparseMatrix build() const {
    SparseMatrix m(rows_.size(), cols_.size());
    m.setFromTriplets(triplets_.begin(), triplets_.end());
    return m;
  }

 private:
  const FeSpace& rows_;
  const FeSpace& cols_;
  std::vector<Triplet> triplets_;
};

inline SparseOperator mass_and_stiffness(const FeSpace& space, double mass_w, double stiff_w) {
  const Mesh& mesh = space.mesh();
  const int nv = mesh.vertices_per_cell();
  const auto rule = cell_rule(mesh.dim());
  TripletSink sink(space, space);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& geo = mesh.geometry(c);
    const auto& cell = mesh.cell(c);
    for (int i = 0; i < nv; ++i) {
      for (int j = 0; j < nv; ++j) {
        double m = 0.0;
        for (const auto& q : rule) m += q.weight * q.bary[i] * q.bary[j];
        const double k = geo.grad[i][0] * geo.grad[j][0] + geo.grad[i][1] * geo.grad[j][1];
        sink.add(cell[i], cell[j], geo.measure * (mass_w * m + stiff_w * k));
      }
    }
  }
  return SparseOperator::make(sink.build(), space.bc(), space.bc(), true);
}

}  // namespace detail

inline SparseOperator assemble_mass(const FeSpace& space) {
  return detail::mass_and_stiffness(space, 1.0, 0.0);
}

inline SparseOperator assemble_stiffness(const FeSpace& space) {
  return detail::mass_and_stiffness(space, 0.0, 1.0);
}

/// Gram matrix of the H1 inner product (grad u, grad v) + (u, v) on the space.
inline SparseOperator assemble_gram(const FeSpace& space) {
  auto g = detail::mass_and_stiffness(space, 1.0, 1.0);
  if (!g.symmetric) throw StructuralError("Gram matrix failed the symmetry check");
  return g;
}

/// Cholesky factor of a Gram matrix, used for Riesz maps and dual norms.
class GramSolver {
 public:
  explicit GramSolver(const SparseOperator& gram) : gram_(gram.matrix) {
    Eigen::SparseMatrix<double> colmajor = gram.matrix;
    llt_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(colmajor);
    if (llt_->info() != Eigen::Success) throw SolverError("Gram matrix is not positive definite");
  }

  Vector solve(const Vector& f) const { return llt_->solve(f); }

  double dual_norm(const Vector& f) const {
    if (f.size() != gram_.rows()) throw StructuralError("functional size differs from space");
    const double s = f.dot(solve(f));
    return std::sqrt(std::max(s, 0.0));
  }

  double norm(const Vector& x) const { return std::sqrt(std::max(x.dot(gram_ * x), 0.0)); }

 private:
  SparseMatrix gram_;
  std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

inline double dual_norm(const Vector& f, const FeSpace& space) {
  return GramSolver(assemble_gram(space)).dual_norm(f);
}

/// V_h (neumann) and V0,h (dirichlet0) on one mesh with their fixed matrices.
class DiscreteSpaces {
 public:
  explicit DiscreteSpaces(std::shared_ptr<const Mesh> mesh)
      : mesh_(std::move(mesh)),
        v_(mesh_, Boundary::neumann),
        v0_(mesh_, Boundary::dirichlet0),
        mass_v_(assemble_mass(v_)),
        mass_v0_(assemble_mass(v0_)),
        stiff_v_(assemble_stiffness(v_)),
        stiff_v0_(assemble_stiffness(v0_)),
        gram_v_(assemble_gram(v_)),
        gram_v0_(assemble_gram(v0_)),
        solver_v_(gram_v_),
        solver_v0_(gram_v0_) {
    if (v0_.size() == 0) throw StructuralError("mesh has no interior nodes");
  }

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  const FeSpace& v() const { return v_; }
  const FeSpace& v0() const { return v0_; }
  const FeSpace& space(Boundary b) const { return b == Boundary::neumann ? v_ : v0_; }
  const SparseOperator& mass(Boundary b) const {
    return b == Boundary::neumann ? mass_v_ : mass_v0_;
  }
  const SparseOperator& stiffness(Boundary b) const {
    return b == Boundary::neumann ? stiff_v_ : stiff_v0_;
  }
  const SparseOperator& gram(Boundary b) const {
    return b == Boundary::neumann ? gram_v_ : gram_v0_;
  }
  const GramSolver& gram_solver(Boundary b) const {
    return b == Boundary::neumann ? solver_v_ : solver_v0_;
  }

  double norm_h(Boundary b, const Vector& x) const {
    return std::sqrt(std::max(x.dot(mass(b).matrix * x), 0.0));
  }
  double norm(Boundary b, const Vector& x) const { return gram_solver(b).norm(x); }
  double dual_norm(Boundary b, const Vector& f) const { return gram_solver(b).dual_norm(f); }
  /// Dual norm of the functional v -> (x, v)_H.
  double dual_norm_of_h(Boundary b, const Vector& x) const {
    return dual_norm(b, mass(b).matrix * x);
  }

 private:
  std::shared_ptr<const Mesh> mesh_;
  FeSpace v_, v0_;
  SparseOperator mass_v_, mass_v0_, stiff_v_, stiff_v0_, gram_v_, gram_v0_;
  GramSolver solver_v_, solver_v0_;
};

/// Nodal coefficient arrays of one time slice (over all mesh nodes).
struct SliceCoefficients {
  std::span<const double> a, b, mu, lambda, omega, A;
};

/// Matrices of every term of the two variational identities at one slice.
struct Forms {
  SparseOperator M, K, M_mu, M_lambda;  ///< on V_h
  SparseOperator M_a, M_b, K_A, K0;     ///< on V0,h
  SparseOperator K_z;                   ///< K_A + nu K0
  SparseOperator B_omega;               ///< rows V_h, columns V0,h: int phi omega . grad psi
};

inline Forms assemble_forms(const DiscreteSpaces& spaces, const SliceCoefficients& c, double nu) {
  const Mesh& mesh = spaces.mesh();
  const int dim = mesh.dim();
  const std::size_t nn = mesh.num_nodes();
  const auto need = [&](std::span<const double> s, std::size_t comps, const char* name) {
    if (s.size() != nn * comps)
      throw StructuralError(std::string("slice coefficient ") + name + " has wrong size");
  };
  need(c.a, 1, "a");
  need(c.b, 1, "b");
  need(c.mu, 1, "mu");
  need(c.lambda, 1, "lambda");
  need(c.omega, dim, "omega");
  need(c.A, dim * dim, "A");

  const FeSpace& V = spaces.v();
  const FeSpace& V0 = spaces.v0();
  detail::TripletSink mu_s(V, V), lam_s(V, V), a_s(V0, V0), b_s(V0, V0), ka_s(V0, V0),
      bw_s(V, V0);
  const int nv = mesh.vertices_per_cell();
  const auto rule = cell_rule(dim);
  double lmu[3][3], llam[3][3], la[3][3], lb[3][3], lka[3][3], lbw[3][3];
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const auto& geo = mesh.geometry(cell);
    const auto& vtx = mesh.cell(cell);
    for (int i = 0; i < nv; ++i)
      for (int j = 0; j < nv; ++j)
        lmu[i][j] = llam[i][j] = la[i][j] = lb[i][j] = lka[i][j] = lbw[i][j] = 0.0;
    for (const auto& q : rule) {
      const double w = geo.measure * q.weight;
      const double mu = mesh.interpolate(cell, q.bary, c.mu);
      const double lam = mesh.interpolate(cell, q.bary, c.lambda);
      const double a = mesh.interpolate(cell, q.bary, c.a);
      const double b = mesh.interpolate(cell, q.bary, c.b);
      double om[2] = {0.0, 0.0};
      double Am[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (int r = 0; r < dim; ++r) {
        om[r] = mesh.interpolate(cell, q.bary, c.omega, dim, r);
        for (int s = 0; s < dim; ++s) Am[r][s] = mesh.interpolate(cell, q.bary, c.A, dim * dim, r * dim + s);
      }
      for (int i = 0; i < nv; ++i) {
        for (int j = 0; j < nv; ++j) {
          const double pp = w * q.bary[i] * q.bary[j];
          lmu[i][j] += mu * pp;
          llam[i][j] += lam * pp;
          la[i][j] += a * pp;
          lb[i][j] += b * pp;
          const auto& gi = geo.grad[i];
          const auto& gj = geo.grad[j];
          double agj_gi = 0.0, om_gj = 0.0;
          for (int r = 0; r < dim; ++r) {
            om_gj += om[r] * gj[r];
            for (int s = 0; s < dim; ++s) agj_gi += gi[r] * Am[r][s] * gj[s];
          }
          lka[i][j] += w * agj_gi;
          lbw[i][j] += w * q.bary[i] * om_gj;
        }
      }
    }
    for (int i = 0; i < nv; ++i) {
      for (int j = 0; j < nv; ++j) {
        mu_s.add(vtx[i], vtx[j], lmu[i][j]);
        lam_s.add(vtx[i], vtx[j], llam[i][j]);
        a_s.add(vtx[i], vtx[j], la[i][j]);
        b_s.add(vtx[i], vtx[j], lb[i][j]);
        ka_s.add(vtx[i], vtx[j], lka[i][j]);
        bw_s.add(vtx[i], vtx[j], lbw[i][j]);
      }
    }
  }
  const auto N = Boundary::neumann;
  const auto D = Boundary::dirichlet0;
  Forms f;
  f.M = spaces.mass(N);
  f.K = spaces.stiffness(N);
  f.M_mu = SparseOperator::make(mu_s.build(), N, N, true);
  f.M_lambda = SparseOperator::make(lam_s.build(), N, N, true);
  f.M_a = SparseOperator::make(a_s.build(), D, D, true);
  f.M_b = SparseOperator::make(b_s.build(), D, D, true);
  f.K_A = SparseOperator::make(ka_s.build(), D, D, true);
  f.K0 = spaces.stiffness(D);
  f.K_z = SparseOperator::make(f.K_A.matrix + nu * f.K0.matrix, D, D, true);
  f.B_omega = SparseOperator::make(bw_s.build(), N, D, false);
  return f;
}

/// Load vector of the functional v -> int f v + int g . grad v (g may be empty).
inline Vector assemble_load(const FeSpace& space, std::span<const double> density,
                            std::span<const double> flux = {}) {
  const Mesh& mesh = space.mesh();
  const int dim = mesh.dim();
  if (density.size() != static_cast<std::size_t>(mesh.num_nodes()))
    throw StructuralError("load density has wrong size");
  if (!flux.empty() && flux.size() != static_cast<std::size_t>(mesh.num_nodes()) * dim)
    throw StructuralError("load flux has wrong size");
  Vector out = Vector::Zero(space.size());
  const int nv = mesh.vertices_per_cell();
  const auto rule = cell_rule(dim);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& geo = mesh.geometry(c);
    const auto& vtx = mesh.cell(c);
    double local[3] = {0.0, 0.0, 0.0};
    for (const auto& q : rule) {
      const double w = geo.measure * q.weight;
      const double f = mesh.interpolate(c, q.bary, density);
      double g[2] = {0.0, 0.0};
      if (!flux.empty())
        for (int r = 0; r < dim; ++r) g[r] = mesh.interpolate(c, q.bary, flux, dim, r);
      for (int i = 0; i < nv; ++i) {
        local[i] += w * f * q.bary[i];
        for (int r = 0; r < dim; ++r) local[i] += w * g[r] * geo.grad[i][r];
      }
    }
    for (int i = 0; i < nv; ++i) {
      const int d = space.dof(vtx[i]);
      if (d >= 0) out(d) += local[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrete embedding constants

enum class EmbeddingTarget { L4, H };

struct EmbeddingOptions {
  std::uint64_t seed = 0;
  int random_restarts = 10;
  double tolerance = 1e-8;
  int max_iterations = 10000;
};

namespace detail {

inline double quartic(const Mesh& mesh, std::span<const double> nodal) {
  return integrate(mesh, [&](int c, const auto& b) {
    const double v = mesh.interpolate(c, b, nodal);
    return v * v * v * v;
  });
}

/// d/dx_d of int v^4 for every dof d.
inline Vector quartic_gradient(const FeSpace& space, std::span<const double> nodal) {
  const Mesh& mesh = space.mesh();
  Vector g = Vector::Zero(space.size());
  const auto rule = cell_rule(mesh.dim());
  const int nv = mesh.vertices_per_cell();
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double m = mesh.geometry(c).measure;
    for (const auto& q : rule) {
      const double v = mesh.interpolate(c, q.bary, nodal);
      const double w = 4.0 * m * q.weight * v * v * v;
      for (int i = 0; i < nv; ++i) {
        const int d = space.dof(mesh.cell(c)[i]);
        if (d >= 0) g(d) += w * q.bary[i];
      }
    }
  }
  return g;
}

}  // namespace detail

/// |v|_{L4} / |v|_space for a dof vector.
inline double l4_quotient(const FeSpace& space, const SparseOperator& gram, const Vector& x) {
  const double n = std::sqrt(x.dot(gram.matrix * x));
  if (!(n > 0.0)) return 0.0;
  return std::pow(detail::quartic(space.mesh(), space.extend(x)), 0.25) / n;
}

/// Discrete constant of the embedding of the space into L4 or H.
///
/// L4: ascent of int v^4 on the unit Gram sphere, v <- G^{-1} grad / |.|_G, which
/// is monotone for this convex functional; started from the constant (neumann),
/// boundary or centre hats, and `random_restarts` Gaussian vectors.
/// H: power iteration on G^{-1} M; returns the square root of the top eigenvalue.
inline double embedding_constant(const FeSpace& space, EmbeddingTarget target,
                                 const EmbeddingOptions& opt = {}) {
  const SparseOperator gram = assemble_gram(space);
  const GramSolver solver(gram);
  const int n = space.size();
  if (n == 0) throw StructuralError("embedding constant of an empty space");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto random_vector = [&] {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = normal(rng);
    return x;
  };
  const auto normalize = [&](Vector x) { return Vector(x / solver.norm(x)); };

  if (target == EmbeddingTarget::H) {
    const SparseOperator mass = assemble_mass(space);
    Vector x = normalize(random_vector().cwiseAbs() + Vector::Ones(n));
    double lambda = x.dot(mass.matrix * x);
    for (int it = 0; it < opt.max_iterations; ++it) {
      x = normalize(solver.solve(mass.matrix * x));
      const double next = x.dot(mass.matrix * x);
      if (std::abs(next - lambda) <= 1e-13 * next) return std::sqrt(next);
      lambda = next;
    }
    throw SolverError("power iteration for the H embedding constant did not converge");
  }

  std::vector<Vector> starts;
  const Mesh& mesh = space.mesh();
  if (space.bc() == Boundary::neumann) {
    starts.push_back(Vector::Ones(n));
    double lo[2] = {mesh.node(0)[0], mesh.node(0)[1]}, hi[2] = {lo[0], lo[1]};
    for (const Point& p : mesh.nodes())
      for (int r = 0; r < 2; ++r) lo[r] = std::min(lo[r], p[r]), hi[r] = std::max(hi[r], p[r]);
    for (int node : mesh.boundary_nodes()) {
      const Point& x = mesh.node(node);
      const bool corner = mesh.dim() == 1 || ((x[0] == lo[0] || x[0] == hi[0]) &&
                                              (x[1] == lo[1] || x[1] == hi[1]));
      if (corner) {
        Vector e = Vector::Constant(n, 1e-3);
        e(space.dof(node)) = 1.0;
        starts.push_back(e);
      }
    }
  } else {
    Point centre{0.0, 0.0};
    for (const Point& p : mesh.nodes()) {
      centre[0] += p[0] / mesh.num_nodes();
      centre[1] += p[1] / mesh.num_nodes();
    }
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int d = 0; d < n; ++d) {
      const Point& p = mesh.node(space.node(d));
      const double dd = std::hypot(p[0] - centre[0], p[1] - centre[1]);
      if (dd < best_d) best_d = dd, best = d;
    }
    starts.push_back(Vector::Constant(n, 1.0));
    Vector e = Vector::Constant(n, 1e-3);
    e(best) = 1.0;
    starts.push_back(e);
  }
  for (int r = 0; r < opt.random_restarts; ++r) starts.push_back(random_vector());

  double best = 0.0;
  for (const Vector& s : starts) {
    Vector x = normalize(s);
    double q = l4_quotient(space, gram, x);
    bool converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
      const Vector g = detail::quartic_gradient(space, space.extend(x));
      if (!(g.norm() > 0.0)) {
        converged = true;
        break;
      }
      x = normalize(solver.solve(g));
      const double next = l4_quotient(space, gram, x);
      const bool done = std::abs(next - q) <= opt.tolerance * next;
      q = std::max(q, next);
      if (done) {
        converged = true;
        break;
      }
    }
    if (!converged) throw SolverError("L4 embedding ascent did not converge");
    best = std::max(best, q);
  }
  return best;
}

}  // namespace copar
