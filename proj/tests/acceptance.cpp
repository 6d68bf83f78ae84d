#include "support.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

using namespace copar;
using namespace copar::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Vector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

Problem random_problem(std::shared_ptr<const Mesh> mesh, double T, std::mt19937_64& rng, double strength = 1.0) {
  const TimeGrid grid{T, 16};
  auto s = random_sextet(mesh, grid, rng, strength);
  auto f = random_forcing(*mesh, grid, rng, 1.0, true);
  auto init = random_initial(*mesh, rng);
  const double nu = 0.5 + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return Problem{mesh, std::move(s), std::move(f), std::move(init), nu};
}

double h_gap(const DiscreteSpaces& sp, const Vector& p1, const Vector& z1, const Vector& p2, const Vector& z2) {
  return std::hypot(sp.norm_h(Boundary::neumann, p1 - p2), sp.norm_h(Boundary::dirichlet0, z1 - z2));
}

StepContext random_step(const DiscreteSpaces& sp, const SextetSlices& cs, const ForcingSlices& fs, double tau,
                        double ts, double nu, std::mt19937_64& rng) {
  StepContext ctx{&sp, cs.at(1), fs.at(1), random_vector(sp.v().size(), rng), random_vector(sp.v0().size(), rng),
                  tau, nu, 1};
  ctx.tau_star = ts;
  return ctx;
}

Outcome criterion1() {
  std::mt19937_64 rng(101);
  auto mesh = unit_interval(24);
  DiscreteSpaces sp(mesh);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto pb = random_problem(mesh, 0.1, rng);
    const double ts = tau_star(pb.sextet.norms(), pb.nu), tau = 0.5 * ts;
    const auto cs = slice_sextet(pb.sextet, tau);
    const auto fs = slice_forcing(pb.forcing, tau);
    const auto ctx = random_step(sp, cs, fs, tau, ts, pb.nu, rng);
    const auto sys = assemble_step_system(ctx);
    const auto cg = solve_step(sys, 1e-12);
    const auto dense = dense_oracle_step(sys);
    const auto mini = minimize_energy_oracle(ctx, Vector::Zero(sp.v().size()), Vector::Zero(sp.v0().size()));
    worst = std::max({worst, h_gap(sp, cg.p, cg.z, dense.p, dense.z), h_gap(sp, cg.p, cg.z, mini.p, mini.z),
                      h_gap(sp, dense.p, dense.z, mini.p, mini.z)});
  }
  return {worst <= 1e-6, "10 systems with 48 dofs, max pairwise H gap " + sci(worst)};
}

Outcome criterion2() {
  std::mt19937_64 rng(102);
  const double tol = 1e-10;
  double worst_stat = 0.0, worst_fd = 0.0;
  int steps = 0;
  for (int trial = 0; trial < 6; ++trial) {
    auto mesh = trial % 2 ? unit_square(4) : unit_interval(20);
    DiscreteSpaces sp(mesh);
    const auto pb = random_problem(mesh, 0.05, rng);
    const double ts = tau_star(pb.sextet.norms(), pb.nu), tau = 0.5 * ts;
    const auto cs = slice_sextet(pb.sextet, tau);
    const auto fs = slice_forcing(pb.forcing, tau);
    Vector p = sp.v().restrict(pb.initial.p0), z = sp.v0().restrict(pb.initial.z0);
    for (int i = 1; i <= std::min(cs.steps(), 10); ++i, ++steps) {
      StepContext ctx{&sp, cs.at(i), fs.at(i), p, z, tau, pb.nu, i};
      ctx.tau_star = ts;
      const auto sys = assemble_step_system(ctx);
      const auto sol = solve_step(sys, tol);
      worst_stat = std::max(worst_stat, energy_gradient(sys, sol.p, sol.z).norm() / (10.0 * tol * sys.rhs.norm()));
      if (i == 1) {
        const Vector xp = random_vector(sp.v().size(), rng), xz = random_vector(sp.v0().size(), rng);
        const Vector g = energy_gradient(xp, xz, ctx);
        const double h = 1e-4;
        Vector fd(g.size());
        for (int j = 0; j < g.size(); ++j) {
          Vector e = Vector::Zero(g.size());
          e[j] = h;
          const auto [ep, ez] = sys.split(e);
          fd[j] = (energy(xp + ep, xz + ez, ctx) - energy(xp - ep, xz - ez, ctx)) / (2 * h);
        }
        worst_fd = std::max(worst_fd, (fd - g).norm() / g.norm());
      }
      p = sol.p;
      z = sol.z;
    }
  }
  return {worst_stat <= 1.0 && worst_fd <= 1e-6,
          std::to_string(steps) + " steps, max |grad E|/(10 tol |rhs|) " + sci(worst_stat) +
              ", finite-difference relative gap " + sci(worst_fd)};
}

double max_gap(const DiscreteTrajectory& a, const std::function<Vector(int, bool)>& b) {
  double m = 0.0;
  for (int i = 0; i <= a.steps; ++i)
    m = std::max({m, (a.p[i] - b(i, true)).cwiseAbs().maxCoeff(), (a.z[i] - b(i, false)).cwiseAbs().maxCoeff()});
  return m;
}

Outcome criterion3() {
  std::mt19937_64 rng(103);
  double zero = 0.0, sup = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    auto mesh = trial % 2 ? unit_square(4) : unit_interval(24);
    DiscreteSpaces sp(mesh);
    const auto base = random_problem(mesh, 0.05, rng);
    const auto& grid = base.sextet.grid();
    const double tau = 0.5 * tau_star(base.sextet.norms(), base.nu);
    const StepOptions opt{1e-13, false};
    Problem z0{mesh, base.sextet, Forcing::zero(*mesh, grid), InitialData::zero(*mesh), base.nu};
    const auto zt = run_problem(sp, z0, tau, opt).traj;
    zero = std::max(zero, max_gap(zt, [&](int i, bool p) { return p ? Vector::Zero(zt.p[i].size()) : Vector::Zero(zt.z[i].size()); }));
    const auto f2 = random_forcing(*mesh, grid, rng, 1.0, true);
    const auto i2 = random_initial(*mesh, rng);
    const double a = 0.7, b = -1.3;
    Problem d1 = base, d2{mesh, base.sextet, f2, i2, base.nu};
    Problem mix{mesh, base.sextet, base.forcing.combined(a, f2, b), base.initial.combined(a, i2, b), base.nu};
    const auto r1 = run_problem(sp, d1, tau, opt).traj, r2 = run_problem(sp, d2, tau, opt).traj;
    const auto rm = run_problem(sp, mix, tau, opt).traj;
    sup = std::max(sup, max_gap(rm, [&](int i, bool p) -> Vector {
      return p ? Vector(a * r1.p[i] + b * r2.p[i]) : Vector(a * r1.z[i] + b * r2.z[i]);
    }));
  }
  return {zero <= 1e-12 && sup <= 1e-9, "zero-data max " + sci(zero) + ", superposition max gap " + sci(sup)};
}

Outcome criterion4() {
  const int cells = 64, steps = 100;
  const double tau = 0.01;
  auto mesh = unit_interval(cells);
  const TimeGrid grid{tau * steps, steps};
  auto s = constant_sextet(mesh, grid, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  const auto gp = [](double t, const Point& x) { return std::sin(2.0 * x[0]) * (1.0 + t); };
  const auto gz = [](double t, const Point& x) { return 1.0 - x[0] + 0.5 * t; };
  Forcing f{scalar_field(*mesh, grid, gp), scalar_field(*mesh, grid, gz), std::nullopt, std::nullopt};
  InitialData init = InitialData::zero(*mesh);
  for (int j = 0; j <= cells; ++j) {
    const double x = mesh->node(j)[0];
    init.p0[j] = std::cos(pi * x);
    init.z0[j] = (j == 0 || j == cells) ? 0.0 : std::sin(2.0 * pi * x) + x * (1.0 - x);
  }
  DiscreteSpaces sp(mesh);
  const auto traj = run_scheme(sp, slice_sextet(s, tau), slice_forcing(f, tau), init, 1.0, {1e-13, false});
  HeatOracle hp(cells, false), hz(cells, true);
  std::vector<double> p = init.p0, z = init.z0;
  double worst = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double tm = (i - 0.5) * tau;
    std::vector<double> fp(cells + 1), fz(cells + 1);
    for (int j = 0; j <= cells; ++j) fp[j] = gp(tm, mesh->node(j)), fz[j] = gz(tm, mesh->node(j));
    p = hp.step(p, fp, tau);
    z = hz.step(z, fz, tau);
    const auto pn = sp.v().extend(traj.p[i]), zn = sp.v0().extend(traj.z[i]);
    for (int j = 0; j <= cells; ++j) worst = std::max({worst, std::abs(pn[j] - p[j]), std::abs(zn[j] - z[j])});
  }
  return {worst <= 1e-10, "64 cells, 100 steps, max nodal gap " + sci(worst)};
}

Outcome criterion5() {
  std::mt19937_64 rng(105);
  int passed = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    auto mesh = trial % 4 == 3 ? unit_square(4) : unit_interval(16);
    DiscreteSpaces sp(mesh);
    const auto emb = discrete_embedding_constants(sp);
    const auto pb = random_problem(mesh, 0.02, rng, 0.5 + trial % 3);
    const auto k = scheme_constants(pb.sextet.norms(), pb.nu, 0.02, emb);
    const auto r = check_apriori(sp, pb, run_problem(sp, pb, 0.5 * k.delta0), emb);
    passed += r.pass;
    worst = std::min(worst, r.margin);
  }
  return {passed == 20, std::to_string(passed) + "/20 pass, smallest margin " + sci(worst)};
}

Outcome criterion6() {
  std::mt19937_64 rng(106);
  auto mesh = unit_interval(32);
  DiscreteSpaces sp(mesh);
  const auto emb = discrete_embedding_constants(sp);
  const double T = 0.02;
  int passed = 0, total = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = random_problem(mesh, T, rng);
    const auto other = random_problem(mesh, T, rng);
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const auto blend = [&](const SpaceTimeField& x, const SpaceTimeField& y) { return x.combined(1.0 - eps, y, eps); };
      const auto& s = base.sextet;
      const auto& o = other.sextet;
      CoefficientSextet s2(mesh, blend(s.a(), o.a()), blend(s.b(), o.b()), blend(s.mu(), o.mu()),
                           blend(s.lambda(), o.lambda()), blend(s.omega(), o.omega()), blend(s.A(), o.A()));
      Problem pb2{mesh, s2, base.forcing.combined(1.0 - eps, other.forcing, eps),
                  base.initial.combined(1.0 - eps, other.initial, eps), base.nu};
      const double d1 = scheme_constants(s.norms(), base.nu, T, emb).delta0;
      const double d2 = scheme_constants(s2.norms(), base.nu, T, emb).delta0;
      const double tau = 0.5 * std::min(d1, d2);
      const auto r = check_continuous_dependence(sp, base, run_problem(sp, base, tau), pb2, run_problem(sp, pb2, tau), emb);
      passed += r.pass && validate_sextet(s2).passed();
      ++total;
    }
  }
  return {passed == total, std::to_string(passed) + "/" + std::to_string(total) + " perturbation pairs pass"};
}

Outcome criterion7() {
  auto mesh = unit_interval(128);
  DiscreteSpaces sp(mesh);
  const double T = 1.0;
  const TimeGrid grid{T, 1024};
  auto s = constant_sextet(mesh, grid, 1.5, 0.2, 0.3, 0.1, 0.5, 0.8);
  const auto sol = mms_catalog("cos_sin_exp");
  Problem pb{mesh, s, mms_forcing(sol, s, 1.0, grid), mms_initial(sol, *mesh), 1.0};
  const auto table =
      tau_refinement_study(sp, pb, {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128}, sol, {1e-12, true});
  bool ok = table.rows.size() == 4;
  double min_factor = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; ok && j < table.rows.size(); ++j)
    ok = table.rows[j].error.c < table.rows[j - 1].error.c && table.rows[j].error.v < table.rows[j - 1].error.v;
  for (std::size_t j = 1; j + 1 < table.rows.size(); ++j)
    for (double f : {table.rows[j - 1].cauchy.h / table.rows[j].cauchy.h,
                     table.rows[j - 1].cauchy.c / table.rows[j].cauchy.c,
                     table.rows[j - 1].cauchy.v / table.rows[j].cauchy.v})
      min_factor = std::min(min_factor, f);
  ok = ok && min_factor >= 1.5;
  return {ok, "C(H) errors " + sci(table.rows.front().error.c) + " -> " + sci(table.rows.back().error.c) +
                  ", smallest Cauchy factor " + sci(min_factor) + " (guard override, tau_* = " +
                  sci(tau_star(s.norms(), 1.0)) + ")"};
}

std::string run_cli(const std::string& args, int& code) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("copar_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cmd = std::string(COPAR_CLI_PATH) + " " + args + " --out " + (dir / "out").string() + " >" +
                          (dir / "stdout").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(dir / "stdout");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double constant_line(const std::string& text, const std::string& key) {
  const auto pos = ("\n" + text).find("\n" + key + " = ");
  if (pos == std::string::npos) return std::nan("");
  return std::stod(text.substr(pos + key.size() + 3));
}

Outcome criterion8() {
  namespace fs = std::filesystem;
  const fs::path cfg = fs::temp_directory_path() / ("copar_acceptance_unit_" + std::to_string(::getpid()) + ".toml");
  std::ofstream(cfg) << "cells = 8\nT = 1\nnu = 1\ncV4 = 1\ncV04 = 1\ncV0H = 1\ncVH = 1\n";
  int code = -1;
  const std::string out = run_cli("constants --config " + cfg.string(), code);
  fs::remove(cfg);
  const double ts = constant_line(out, "tau_star"), cs = constant_line(out, "C_star");
  return {code == 0 && ts == 1.0 / 48.0 && cs == 144.0,
          "constants subcommand: tau_* = " + sci(ts) + " (1/48), C* = " + sci(cs) + " (144), exit " +
              std::to_string(code)};
}

Outcome criterion9() {
  std::mt19937_64 rng(109);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    auto mesh = trial % 4 == 3 ? unit_square(4) : unit_interval(12 + trial);
    DiscreteSpaces sp(mesh);
    const auto emb = discrete_embedding_constants(sp);
    const auto pb = random_problem(mesh, 0.2, rng, 1.0 + trial % 3);
    const double tau = 0.2 / (4 + trial % 5);
    Quadruple q = Quadruple::zero(sp, tau, 0.2);
    for (int i = 0; i <= q.steps; ++i) {
      q.p[i] = random_vector(sp.v().size(), rng);
      q.z[i] = random_vector(sp.v0().size(), rng);
      if (i > 0) q.p_bar[i] = random_vector(sp.v().size(), rng), q.z_bar[i] = random_vector(sp.v0().size(), rng);
    }
    const double m0 = operator_bounds(pb.sextet.norms(), pb.nu, emb).m0;
    worst = std::max(worst, apply_T(sp, slice_sextet(pb.sextet, tau), q, pb.nu).y_norm / (m0 * x_norm(sp, q)));
  }
  int sandwich = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto mesh = trial % 3 == 2 ? unit_square(4) : unit_interval(20);
    DiscreteSpaces sp(mesh);
    const auto emb = discrete_embedding_constants(sp);
    const auto pb = random_problem(mesh, 0.05, rng);
    const auto r = check_isomorphism_sandwich(sp, pb, run_problem(sp, pb, 0.5 * tau_star(pb.sextet.norms(), pb.nu)), emb);
    sandwich += r.pass;
  }
  return {worst <= 1.0 && sandwich == 10,
          "max |Tx|_Y/(M0 |x|_X) " + sci(worst) + " over 20 quadruples, sandwich " + std::to_string(sandwich) + "/10"};
}

Outcome criterion10() {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int admissible = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto mesh = trial % 2 ? unit_square(5) : unit_interval(16);
    const TimeGrid grid{1.0, 8};
    const double e0 = u(rng), e1 = 0.5 * u(rng), kt = 1.0 + u(rng), t1 = 2.0 * u(rng), t2 = u(rng);
    PhaseFieldPair pair(mesh, scalar_field(*mesh, grid, [=](double t, const Point& x) {
                          return e0 + e1 * std::sin(pi * x[0] + kt * t) * std::cos(pi * x[1]);
                        }),
                        scalar_field(*mesh, grid, [=](double t, const Point& x) {
                          return (t1 * x[0] * x[0] + t2 * std::cos(2.0 * pi * x[1])) * std::cos(kt * t);
                        }));
    auto f = ModelFunctions::defaults(*mesh, grid);
    f.alpha0 = scalar_field(*mesh, grid, [=](double t, const Point& x) { return 1.0 + 0.3 * std::sin(kt * t + x[0]); });
    f.alpha0_dt.reset();
    const auto lin = build_linearized(pair, f);
    const auto adj = build_adjoint(pair, f);
    admissible += lin.report.passed() && adj.report.passed();
    const auto gap = [&](const SpaceTimeField& a, const SpaceTimeField& l) {
      const int M = l.grid().intervals;
      for (int k = 0; k <= M; ++k) {
        const auto x = a.instant(k), y = l.instant(M - k);
        for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(x[j] - y[j]));
      }
    };
    gap(adj.sextet.a(), lin.sextet.a());
    gap(adj.sextet.mu(), lin.sextet.mu());
    gap(adj.sextet.lambda(), lin.sextet.lambda());
    gap(adj.sextet.omega(), lin.sextet.omega());
    gap(adj.sextet.A(), lin.sextet.A());
  }
  return {admissible == 10 && worst <= 1e-12,
          std::to_string(admissible) + "/10 pairs admissible for both builders, max reversal gap " + sci(worst)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {"step uniqueness and equivalence", 10.0, criterion1},
      {"stationarity", 0.0, criterion2},
      {"zero data and superposition", 0.0, criterion3},
      {"decoupled heat oracle", 5.0, criterion4},
      {"a-priori bound", 0.0, criterion5},
      {"continuous dependence", 60.0, criterion6},
      {"convergence under step refinement", 30.0, criterion7},
      {"constants", 0.0, criterion8},
      {"operator bound and isomorphism sandwich", 0.0, criterion9},
      {"phase-field builders", 0.0, criterion10},
  };
  int failures = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.pass;
    std::string timing = std::to_string(secs).substr(0, 5) + " s";
    if (c.budget_s > 0.0) {
      timing += " of " + std::to_string(static_cast<int>(c.budget_s)) + " s";
      pass = pass && secs < c.budget_s;
    }
    failures += !pass;
    std::printf("criterion %2d %s: %s (%s; %s)\n", index, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
