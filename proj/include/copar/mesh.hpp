#pragma once

#include "copar/core.hpp"
#include "copar/quadrature.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

namespace copar {

struct Interval {
  double x0 = 0.0;
  double x1 = 1.0;
};

struct Rectangle {
  double x0 = 0.0;
  double x1 = 1.0;
  double y0 = 0.0;
  double y1 = 1.0;
};

using Domain = std::variant<Interval, Rectangle>;

using Point = std::array<double, 2>;
using Cell = std::array<int, 3>;

/// Measure and (constant) gradients of the barycentric coordinates of one simplex.
struct CellGeometry {
  double measure = 0.0;
  std::array<Point, 3> grad{};
};

/// Simplicial mesh of an interval (dim 1) or a rectangle (dim 2).
///
/// Points are stored with two coordinates; the second is zero in 1D. Cells use
/// the first dim+1 entries of their vertex array.
class Mesh {
 public:
  Mesh(int dim, std::vector<Point> nodes, std::vector<Cell> cells, std::vector<int> boundary_nodes)
      : dim_(dim),
        nodes_(std::move(nodes)),
        cells_(std::move(cells)),
        boundary_(std::move(boundary_nodes)),
        on_boundary_(nodes_.size(), 0) {
    if (dim_ != 1 && dim_ != 2) throw StructuralError("mesh dimension must be 1 or 2");
    for (int n : boundary_) {
      if (n < 0 || n >= num_nodes()) throw StructuralError("boundary node index out of range");
      on_boundary_[n] = 1;
    }
    geometry_.reserve(cells_.size());
    for (const Cell& c : cells_) {
      for (int v = 0; v <= dim_; ++v)
        if (c[v] < 0 || c[v] >= num_nodes()) throw StructuralError("cell vertex out of range");
      geometry_.push_back(compute_geometry(c));
      if (!(geometry_.back().measure > 0.0)) throw StructuralError("cell with non-positive measure");
    }
  }

  int dim() const { return dim_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int vertices_per_cell() const { return dim_ + 1; }

  const Point& node(int n) const { return nodes_[n]; }
  const Cell& cell(int c) const { return cells_[c]; }
  const CellGeometry& geometry(int c) const { return geometry_[c]; }
  std::span<const Point> nodes() const { return nodes_; }
  std::span<const Cell> cells() const { return cells_; }

  std::span<const int> boundary_nodes() const { return boundary_; }
  bool on_boundary(int n) const { return on_boundary_[n] != 0; }

  double measure() const {
    double total = 0.0;
    for (const auto& g : geometry_) total += g.measure;
    return total;
  }

  /// Physical coordinates of a barycentric point of cell c.
  Point map(int c, const std::array<double, 3>& bary) const {
    Point x{0.0, 0.0};
    for (int v = 0; v <= dim_; ++v) {
      x[0] += bary[v] * nodes_[cells_[c][v]][0];
      x[1] += bary[v] * nodes_[cells_[c][v]][1];
    }
    return x;
  }

  /// Gradient on cell c of the P1 interpolant of `nodal` (stride = components, comp selects one).
  Point cell_gradient(int c, std::span<const double> nodal, int stride = 1, int comp = 0) const {
    Point g{0.0, 0.0};
    const auto& geo = geometry_[c];
    for (int v = 0; v <= dim_; ++v) {
      const double val = nodal[static_cast<std::size_t>(cells_[c][v]) * stride + comp];
      g[0] += val * geo.grad[v][0];
      g[1] += val * geo.grad[v][1];
    }
    return g;
  }

  /// Value at a barycentric point of cell c of the P1 interpolant of `nodal`.
  double interpolate(int c, const std::array<double, 3>& bary, std::span<const double> nodal,
                     int stride = 1, int comp = 0) const {
    double s = 0.0;
    for (int v = 0; v <= dim_; ++v)
      s += bary[v] * nodal[static_cast<std::size_t>(cells_[c][v]) * stride + comp];
    return s;
  }

 private:
  CellGeometry compute_geometry(const Cell& c) const {
    CellGeometry g;
    if (dim_ == 1) {
      const double h = nodes_[c[1]][0] - nodes_[c[0]][0];
      g.measure = std::abs(h);
      g.grad[0] = {-1.0 / h, 0.0};
      g.grad[1] = {1.0 / h, 0.0};
      return g;
    }
    const Point& p0 = nodes_[c[0]];
    const Point& p1 = nodes_[c[1]];
    const Point& p2 = nodes_[c[2]];
    const double j00 = p1[0] - p0[0], j01 = p2[0] - p0[0];
    const double j10 = p1[1] - p0[1], j11 = p2[1] - p0[1];
    const double det = j00 * j11 - j01 * j10;
    g.measure = 0.5 * det;
    g.grad[1] = {j11 / det, -j01 / det};
    g.grad[2] = {-j10 / det, j00 / det};
    g.grad[0] = {-g.grad[1][0] - g.grad[2][0], -g.grad[1][1] - g.grad[2][1]};
    return g;
  }

  int dim_;
  std::vector<Point> nodes_;
  std::vector<Cell> cells_;
  std::vector<int> boundary_;
  std::vector<char> on_boundary_;
  std::vector<CellGeometry> geometry_;
};

/// Uniform partition; rectangles are split into right triangles along the
/// (i,j)-(i+1,j+1) diagonal of every grid square.
inline std::shared_ptr<const Mesh> build_mesh(const Domain& domain, int resolution) {
  if (resolution < 2) throw DomainError("mesh resolution must be at least 2");
  const int n = resolution;
  if (const auto* iv = std::get_if<Interval>(&domain)) {
    if (!(iv->x1 > iv->x0) || !std::isfinite(iv->x1 - iv->x0))
      throw DomainError("degenerate interval extent");
    std::vector<Point> nodes(n + 1);
    for (int i = 0; i <= n; ++i) nodes[i] = {iv->x0 + (iv->x1 - iv->x0) * i / n, 0.0};
    std::vector<Cell> cells(n);
    for (int i = 0; i < n; ++i) cells[i] = {i, i + 1, -1};
    return std::make_shared<const Mesh>(1, std::move(nodes), std::move(cells),
                                        std::vector<int>{0, n});
  }
  const auto& r = std::get<Rectangle>(domain);
  if (!(r.x1 > r.x0) || !(r.y1 > r.y0) || !std::isfinite(r.x1 - r.x0) ||
      !std::isfinite(r.y1 - r.y0))
    throw DomainError("degenerate rectangle extent");
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<Point> nodes((n + 1) * (n + 1));
  std::vector<int> boundary;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      nodes[id(i, j)] = {r.x0 + (r.x1 - r.x0) * i / n, r.y0 + (r.y1 - r.y0) * j / n};
      if (i == 0 || j == 0 || i == n || j == n) boundary.push_back(id(i, j));
    }
  }
  std::vector<Cell> cells;
  cells.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<const Mesh>(2, std::move(nodes), std::move(cells), std::move(boundary));
}

/// Node table: "index x [y]" rows, then cell table: "index v0 v1 [v2]" rows.
inline void write_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "# nodes " << mesh.num_nodes() << " dim " << mesh.dim() << '\n';
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    out << n << ' ' << mesh.node(n)[0];
    if (mesh.dim() == 2) out << ' ' << mesh.node(n)[1];
    out << ' ' << (mesh.on_boundary(n) ? 1 : 0) << '\n';
  }
  out << "# cells " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) {
    out << c;
    for (int v = 0; v < mesh.vertices_per_cell(); ++v) out << ' ' << mesh.cell(c)[v];
    out << '\n';
  }
}

}  // namespace copar
