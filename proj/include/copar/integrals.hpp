#pragma once

#include "copar/mesh.hpp"
#include "copar/quadrature.hpp"

#include <cmath>
#include <span>

namespace copar {

/// Sum over cells and quadrature points of measure * weight * f(cell, bary).
template <class F>
double integrate(const Mesh& mesh, F&& f) {
  const auto rule = cell_rule(mesh.dim());
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double m = mesh.geometry(c).measure;
    double cell_sum = 0.0;
    for (const auto& q : rule) cell_sum += q.weight * f(c, q.bary);
    total += m * cell_sum;
  }
  return total;
}

/// L2 norm of the P1 interpolant of a nodal scalar (or one component).
inline double l2_norm(const Mesh& mesh, std::span<const double> nodal, int stride = 1,
                      int comp = 0) {
  return std::sqrt(integrate(mesh, [&](int c, const auto& b) {
    const double v = mesh.interpolate(c, b, nodal, stride, comp);
    return v * v;
  }));
}

/// L4 norm of the P1 interpolant of a nodal field with `stride` components,
/// using the Euclidean norm across components.
inline double l4_norm(const Mesh& mesh, std::span<const double> nodal, int stride = 1) {
  return std::pow(integrate(mesh,
                            [&](int c, const auto& b) {
                              double s = 0.0;
                              for (int k = 0; k < stride; ++k) {
                                const double v = mesh.interpolate(c, b, nodal, stride, k);
                                s += v * v;
                              }
                              return s * s;
                            }),
                  0.25);
}

/// L4 norm of the (piecewise constant) gradient of a nodal scalar.
inline double l4_norm_gradient(const Mesh& mesh, std::span<const double> nodal) {
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Point g = mesh.cell_gradient(c, nodal);
    const double s = g[0] * g[0] + g[1] * g[1];
    total += mesh.geometry(c).measure * s * s;
  }
  return std::pow(total, 0.25);
}

}  // namespace copar
