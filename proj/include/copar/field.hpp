#pragma once

#include "copar/core.hpp"
#include "copar/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <vector>

namespace copar {

enum class FieldKind { scalar, vector, matrix };

inline const char* to_string(FieldKind k) {
  switch (k) {
    case FieldKind::scalar: return "scalar";
    case FieldKind::vector: return "vector";
    case FieldKind::matrix: return "matrix";
  }
  return "?";
}

inline int component_count(FieldKind kind, int dim) {
  switch (kind) {
    case FieldKind::scalar: return 1;
    case FieldKind::vector: return dim;
    case FieldKind::matrix: return dim * dim;
  }
  return 0;
}

/// Uniform grid of `intervals + 1` instants covering [0, T].
struct TimeGrid {
  double T = 1.0;
  int intervals = 1;

  double step() const { return T / intervals; }
  double time(int k) const { return k == intervals ? T : T * k / intervals; }
  int instants() const { return intervals + 1; }
};

/// (t, x, out) with out sized to the field's component count.
using AnalyticFn = std::function<void(double, const Point&, std::span<double>)>;

/// Nodal samples on mesh nodes times a uniform time grid.
///
/// Values are laid out as [time][node][component]; matrices are row-major.
/// Evaluation between grid instants is piecewise linear in time.
class SpaceTimeField {
 public:
  SpaceTimeField() = default;

  SpaceTimeField(FieldKind kind, int dim, int nodes, TimeGrid grid, std::vector<double> values,
                 AnalyticFn analytic = {})
      : kind_(kind),
        dim_(dim),
        nodes_(nodes),
        grid_(grid),
        values_(std::move(values)),
        analytic_(std::move(analytic)) {
    if (dim_ < 1 || dim_ > 3) throw StructuralError("field dimension must be 1, 2 or 3");
    if (nodes_ < 1) throw StructuralError("field needs at least one node");
    if (grid_.intervals < 1 || !(grid_.T > 0.0) || !std::isfinite(grid_.T))
      throw StructuralError("field time grid needs T > 0 and at least one interval");
    const std::size_t expected =
        static_cast<std::size_t>(grid_.instants()) * nodes_ * components();
    if (values_.size() != expected)
      throw StructuralError("field sample count " + std::to_string(values_.size()) +
                            " does not match shape (expected " + std::to_string(expected) + ")");
    for (double v : values_)
      if (!std::isfinite(v)) throw StructuralError("field contains a non-finite sample");
  }

  /// Samples `fn` at every (grid instant, mesh node); keeps `fn` as the analytic evaluator.
  static SpaceTimeField sample(FieldKind kind, int dim, const Mesh& mesh, TimeGrid grid,
                               AnalyticFn fn) {
    const int comps = component_count(kind, dim);
    std::vector<double> values(static_cast<std::size_t>(grid.instants()) * mesh.num_nodes() *
                               comps);
    for (int k = 0; k < grid.instants(); ++k) {
      const double t = grid.time(k);
      for (int n = 0; n < mesh.num_nodes(); ++n) {
        const std::size_t off = (static_cast<std::size_t>(k) * mesh.num_nodes() + n) * comps;
        fn(t, mesh.node(n), std::span<double>(values.data() + off, comps));
      }
    }
    return SpaceTimeField(kind, dim, mesh.num_nodes(), grid, std::move(values), std::move(fn));
  }

  static SpaceTimeField constant(FieldKind kind, int dim, int nodes, TimeGrid grid,
                                 std::span<const double> value) {
    const int comps = component_count(kind, dim);
    if (static_cast<int>(value.size()) != comps)
      throw StructuralError("constant value has wrong component count");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(grid.instants()) * nodes * comps);
    for (int k = 0; k < grid.instants(); ++k)
      for (int n = 0; n < nodes; ++n) values.insert(values.end(), value.begin(), value.end());
    std::vector<double> v(value.begin(), value.end());
    return SpaceTimeField(kind, dim, nodes, grid, std::move(values),
                          [v](double, const Point&, std::span<double> out) {
                            std::copy(v.begin(), v.end(), out.begin());
                          });
  }

  static SpaceTimeField scalar_constant(int dim, int nodes, TimeGrid grid, double c) {
    const double v[1] = {c};
    return constant(FieldKind::scalar, dim, nodes, grid, v);
  }

  FieldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  int num_nodes() const { return nodes_; }
  const TimeGrid& grid() const { return grid_; }
  int components() const { return component_count(kind_, dim_); }
  std::span<const double> values() const { return values_; }
  bool has_analytic() const { return static_cast<bool>(analytic_); }
  const AnalyticFn& analytic() const { return analytic_; }

  /// All nodal values at grid instant k.
  std::span<const double> instant(int k) const {
    const std::size_t len = static_cast<std::size_t>(nodes_) * components();
    return std::span<const double>(values_.data() + k * len, len);
  }

  std::span<const double> at(int k, int node) const {
    const int c = components();
    return std::span<const double>(
        values_.data() + (static_cast<std::size_t>(k) * nodes_ + node) * c, c);
  }

  double value(int k, int node, int comp = 0) const { return at(k, node)[comp]; }

  /// Nodal array at time t of the piecewise-linear-in-time interpolant.
  std::vector<double> at_time(double t) const {
    const double dt = grid_.step();
    double s = std::clamp(t, 0.0, grid_.T) / dt;
    int k = std::min(static_cast<int>(std::floor(s)), grid_.intervals - 1);
    const double w = std::clamp(s - k, 0.0, 1.0);
    const auto lo = instant(k);
    const auto hi = instant(k + 1);
    std::vector<double> out(lo.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = (1.0 - w) * lo[j] + w * hi[j];
    return out;
  }

  /// Mean over [t0, t1] of the piecewise-linear interpolant: composite midpoint
  /// rule on the pieces cut by the grid, exact for this interpolant.
  std::vector<double> average(double t0, double t1) const {
    if (!(t1 > t0)) throw DomainError("averaging interval must have positive length");
    const double dt = grid_.step();
    std::vector<double> acc(static_cast<std::size_t>(nodes_) * components(), 0.0);
    double a = t0;
    while (a < t1) {
      int k = static_cast<int>(std::floor(a / dt + 1e-12));
      double b = std::min(t1, (k + 1) * dt);
      if (b <= a) b = t1;
      const auto mid = at_time(0.5 * (a + b));
      const double w = (b - a) / (t1 - t0);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * mid[j];
      a = b;
    }
    return acc;
  }

  /// Field with instant k holding instant (M - k) of this one.
  SpaceTimeField time_reversed() const {
    std::vector<double> values;
    values.reserve(values_.size());
    for (int k = grid_.intervals; k >= 0; --k) {
      const auto s = instant(k);
      values.insert(values.end(), s.begin(), s.end());
    }
    AnalyticFn fn;
    if (analytic_) {
      const double T = grid_.T;
      fn = [f = analytic_, T](double t, const Point& x, std::span<double> out) { f(T - t, x, out); };
    }
    return SpaceTimeField(kind_, dim_, nodes_, grid_, std::move(values), std::move(fn));
  }

  /// Pointwise combination `alpha * this + beta * other` (same shape); drops the analytic evaluator.
  SpaceTimeField combined(double alpha, const SpaceTimeField& other, double beta) const {
    require_same_shape(other);
    std::vector<double> v(values_.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = alpha * values_[j] + beta * other.values_[j];
    return SpaceTimeField(kind_, dim_, nodes_, grid_, std::move(v));
  }

  SpaceTimeField scaled(double alpha) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= alpha;
    return SpaceTimeField(kind_, dim_, nodes_, grid_, std::move(v));
  }

  void require_same_shape(const SpaceTimeField& other) const {
    if (kind_ != other.kind_ || dim_ != other.dim_ || nodes_ != other.nodes_ ||
        grid_.intervals != other.grid_.intervals || grid_.T != other.grid_.T)
      throw StructuralError("fields do not share kind, dimension, nodes and time grid");
  }

 private:
  FieldKind kind_ = FieldKind::scalar;
  int dim_ = 1;
  int nodes_ = 0;
  TimeGrid grid_{};
  std::vector<double> values_;
  AnalyticFn analytic_;
};

enum class FieldEncoding { text, binary };

/// Header lines "key value" up to a line "data"; then either text rows
/// "k node v..." per (instant, node) or raw little-endian doubles.
inline void write_field(const SpaceTimeField& f, std::ostream& out,
                        FieldEncoding enc = FieldEncoding::text) {
  out << "copar-field 1\n";
  out << "kind " << to_string(f.kind()) << '\n';
  out << "dim " << f.dim() << '\n';
  out << "nodes " << f.num_nodes() << '\n';
  out << "instants " << f.grid().instants() << '\n';
  out.precision(17);
  out << "T " << f.grid().T << '\n';
  out << "encoding " << (enc == FieldEncoding::text ? "text" : "binary") << '\n';
  out << "data\n";
  const int comps = f.components();
  if (enc == FieldEncoding::text) {
    for (int k = 0; k < f.grid().instants(); ++k) {
      for (int n = 0; n < f.num_nodes(); ++n) {
        out << k << ' ' << n;
        for (int c = 0; c < comps; ++c) out << ' ' << f.value(k, n, c);
        out << '\n';
      }
    }
    return;
  }
  for (double v : f.values()) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

inline SpaceTimeField read_field(std::istream& in) {
  std::string line;
  std::string kind_name = "scalar", encoding = "text";
  int dim = 1, nodes = 0, instants = 0;
  double T = 0.0;
  bool saw_magic = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "copar-field") { saw_magic = true; continue; }
    if (key == "data") break;
    if (key == "kind") ls >> kind_name;
    else if (key == "dim") ls >> dim;
    else if (key == "nodes") ls >> nodes;
    else if (key == "instants") ls >> instants;
    else if (key == "T") ls >> T;
    else if (key == "encoding") ls >> encoding;
    else throw StructuralError("unknown field header key '" + key + "'");
    if (ls.fail()) throw StructuralError("malformed field header line '" + line + "'");
  }
  if (!saw_magic) throw StructuralError("missing field header");
  FieldKind kind;
  if (kind_name == "scalar") kind = FieldKind::scalar;
  else if (kind_name == "vector") kind = FieldKind::vector;
  else if (kind_name == "matrix") kind = FieldKind::matrix;
  else throw StructuralError("unknown field kind '" + kind_name + "'");
  if (instants < 2 || nodes < 1) throw StructuralError("field header needs instants >= 2, nodes >= 1");
  const int comps = component_count(kind, dim);
  const std::size_t count = static_cast<std::size_t>(instants) * nodes * comps;
  std::vector<double> values(count);
  if (encoding == "binary") {
    for (std::size_t j = 0; j < count; ++j) {
      char bytes[8];
      if (!in.read(bytes, 8)) throw StructuralError("truncated binary field data");
      std::uint64_t bits;
      std::memcpy(&bits, bytes, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      values[j] = std::bit_cast<double>(bits);
    }
  } else if (encoding == "text") {
    for (std::size_t row = 0; row < static_cast<std::size_t>(instants) * nodes; ++row) {
      long k = -1, n = -1;
      if (!(in >> k >> n)) throw StructuralError("truncated text field data");
      if (k < 0 || k >= instants || n < 0 || n >= nodes)
        throw StructuralError("field row index out of range");
      for (int c = 0; c < comps; ++c)
        if (!(in >> values[(static_cast<std::size_t>(k) * nodes + n) * comps + c]))
          throw StructuralError("truncated text field row");
    }
  } else {
    throw StructuralError("unknown field encoding '" + encoding + "'");
  }
  return SpaceTimeField(kind, dim, nodes, TimeGrid{T, instants - 1}, std::move(values));
}

}  // namespace copar
