#pragma once

#include <array>
#include <cmath>
#include <span>

namespace copar {

/// Quadrature node in barycentric coordinates; weights sum to one over the cell.
struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

namespace detail {

inline const std::array<QuadPoint, 3>& gauss3_segment() {
  static const std::array<QuadPoint, 3> rule = [] {
    const double s = 0.5 * std::sqrt(3.0 / 5.0);
    return std::array<QuadPoint, 3>{{
        {{0.5 + s, 0.5 - s, 0.0}, 5.0 / 18.0},
        {{0.5, 0.5, 0.0}, 8.0 / 18.0},
        {{0.5 - s, 0.5 + s, 0.0}, 5.0 / 18.0},
    }};
  }();
  return rule;
}

// Dunavant degree-4 rule.
inline const std::array<QuadPoint, 6>& dunavant4_triangle() {
  static const std::array<QuadPoint, 6> rule = [] {
    const double a1 = 0.10810301816807022736, b1 = 0.44594849091596488632,
                 w1 = 0.22338158967801146570;
    const double a2 = 0.81684757298045851308, b2 = 0.09157621350977074346,
                 w2 = 0.10995174365532186764;
    return std::array<QuadPoint, 6>{{
        {{a1, b1, b1}, w1},
        {{b1, a1, b1}, w1},
        {{b1, b1, a1}, w1},
        {{a2, b2, b2}, w2},
        {{b2, a2, b2}, w2},
        {{b2, b2, a2}, w2},
    }};
  }();
  return rule;
}

}  // namespace detail

/// Cell rule exact for polynomials of degree 4 (5 on segments).
inline std::span<const QuadPoint> cell_rule(int dim) {
  if (dim == 1) return detail::gauss3_segment();
  return detail::dunavant4_triangle();
}

}  // namespace copar
