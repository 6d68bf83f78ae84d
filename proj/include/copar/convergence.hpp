#pragma once

#include "copar/estimates.hpp"
#include "copar/mms.hpp"

#include <algorithm>
#include <optional>
#include <ostream>

namespace copar {

/// Distances between two space-time states in L2(0,T;H), C([0,T];H) and L2(0,T;V) x L2(0,T;V0).
struct TrajectoryDistance {
  double h = 0.0;
  double c = 0.0;
  double v = 0.0;
};

using StateFn = std::function<std::pair<Vector, Vector>(double)>;

/// Linear interpolant of a trajectory as a state function.
inline StateFn linear_state(const DiscreteTrajectory& traj) {
  return [&traj](double t) { return trajectory_interpolants(traj, InterpolantKind::linear, t); };
}

/// Distance by 3-point Gauss quadrature on each piece between consecutive breakpoints; the
/// C(H) part takes the maximum over breakpoints and quadrature points.
inline TrajectoryDistance state_distance(const DiscreteSpaces& sp, const StateFn& x, const StateFn& y,
                                         std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double u, double w) { return std::abs(u - w) <= 1e-12 * std::max(1.0, std::abs(u)); }),
               breaks.end());
  const double g = std::sqrt(0.6);
  const double nodes[3] = {-g, 0.0, g};
  const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  TrajectoryDistance d;
  const auto h_norm = [&](const std::pair<Vector, Vector>& e) {
    return std::hypot(sp.norm_h(Boundary::neumann, e.first), sp.norm_h(Boundary::dirichlet0, e.second));
  };
  const auto diff = [&](double t) {
    auto a = x(t);
    const auto b = y(t);
    a.first -= b.first;
    a.second -= b.second;
    return a;
  };
  for (double t : breaks) d.c = std::max(d.c, h_norm(diff(t)));
  double h2 = 0.0, v2 = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double t0 = breaks[k], t1 = breaks[k + 1], half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
    for (int q = 0; q < 3; ++q) {
      const auto e = diff(mid + half * nodes[q]);
      const double hn = h_norm(e);
      const double pv = sp.norm(Boundary::neumann, e.first), zv = sp.norm(Boundary::dirichlet0, e.second);
      d.c = std::max(d.c, hn);
      h2 += half * weights[q] * hn * hn;
      v2 += half * weights[q] * (pv * pv + zv * zv);
    }
  }
  d.h = std::sqrt(h2);
  d.v = std::sqrt(v2);
  return d;
}

inline std::vector<double> trajectory_breaks(const DiscreteTrajectory& traj) {
  std::vector<double> b;
  for (int i = 0; i <= traj.steps; ++i) b.push_back(std::min(i * traj.tau, traj.T));
  return b;
}

struct ConvergenceRow {
  double tau = 0.0;
  int steps = 0;
  TrajectoryDistance error;   ///< against the exact solution or the finest run
  TrajectoryDistance ratio;   ///< previous row's error over this row's (NaN on the first row)
  TrajectoryDistance cauchy;  ///< distance to the next finer run (NaN on the last row)
};

struct ConvergenceTable {
  bool against_exact = false;
  std::vector<ConvergenceRow> rows;

  void write_csv(std::ostream& out) const {
    out << "tau,steps,err_H,err_CH,err_V,ratio_H,ratio_CH,ratio_V,cauchy_H,cauchy_CH,cauchy_V\n";
    const auto cell = [](double v) {
      if (std::isnan(v)) return std::string();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.12e", v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      out << cell(r.tau) << ',' << r.steps << ',' << cell(r.error.h) << ',' << cell(r.error.c) << ','
          << cell(r.error.v) << ',' << cell(r.ratio.h) << ',' << cell(r.ratio.c) << ',' << cell(r.ratio.v)
          << ',' << cell(r.cauchy.h) << ',' << cell(r.cauchy.c) << ',' << cell(r.cauchy.v) << '\n';
    }
  }
};

/// Runs the problem for every tau and tabulates errors, error ratios and Cauchy differences.
inline ConvergenceTable tau_refinement_study(const DiscreteSpaces& sp, const Problem& pb,
                                             const std::vector<double>& taus,
                                             const std::optional<MmsSolution>& exact = std::nullopt,
                                             const StepOptions& opt = {}) {
  if (taus.size() < 3) throw DomainError("a refinement study needs at least three step sizes");
  for (std::size_t j = 1; j < taus.size(); ++j)
    if (!(taus[j] < taus[j - 1])) throw DomainError("step sizes must be strictly decreasing");
  std::vector<DiscreteTrajectory> runs;
  runs.reserve(taus.size());
  for (double tau : taus) runs.push_back(run_problem(sp, pb, tau, opt).traj);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const TrajectoryDistance none{nan, nan, nan};
  ConvergenceTable table;
  table.against_exact = exact.has_value();
  const DiscreteTrajectory& finest = runs.back();
  for (std::size_t j = 0; j < runs.size(); ++j) {
    ConvergenceRow row;
    row.tau = taus[j];
    row.steps = runs[j].steps;
    if (exact) {
      const MmsSolution sol = *exact;
      const StateFn ref = [&sp, sol](double t) { return mms_state(sol, sp, t); };
      row.error = state_distance(sp, linear_state(runs[j]), ref, trajectory_breaks(runs[j]));
    } else {
      auto br = trajectory_breaks(runs[j]);
      const auto fb = trajectory_breaks(finest);
      br.insert(br.end(), fb.begin(), fb.end());
      row.error = state_distance(sp, linear_state(runs[j]), linear_state(finest), br);
    }
    row.ratio = none;
    if (j > 0) {
      const auto& prev = table.rows.back().error;
      row.ratio = {prev.h / row.error.h, prev.c / row.error.c, prev.v / row.error.v};
    }
    row.cauchy = none;
    if (j + 1 < runs.size()) {
      auto br = trajectory_breaks(runs[j]);
      const auto nb = trajectory_breaks(runs[j + 1]);
      br.insert(br.end(), nb.begin(), nb.end());
      row.cauchy = state_distance(sp, linear_state(runs[j]), linear_state(runs[j + 1]), br);
    }
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace copar
