#include "commands.hpp"

#include "problem.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace copar::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Context {
  const Invocation& inv;
  std::vector<RunConfig> configs;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;

  const RunConfig& config() const { return configs.front(); }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (out_dir / name).string() + "'");
    return f;
  }
};

void require_configs(const Context& ctx, std::size_t n) {
  if (ctx.configs.size() != n)
    throw ConfigError("'" + ctx.inv.command + "' needs exactly " + std::to_string(n) + " --config argument" +
                      (n == 1 ? "" : "s"));
}

bool report_validation(const Context& ctx, const ValidationReport& report, const std::string& file) {
  ctx.open(file) << report.to_text();
  for (const auto& c : report.conditions)
    if (!c.pass) ctx.err << "failed: " << c.name << " at " << c.witness << '\n';
  return report.passed();
}

void guard(const Context& ctx, double tau, const SextetNorms& n, double nu) {
  const double ts = tau_star(n, nu);
  if (tau >= ts && !ctx.inv.override_tau_guard) throw TauGuardError(tau, ts);
}

int cmd_validate(Context& ctx) {
  require_configs(ctx, 1);
  std::mt19937_64 rng(ctx.inv.seed);
  const auto& c = ctx.config();
  const auto sextet = load_sextet(c, make_mesh(c), rng);
  const auto report = validate_sextet(sextet);
  const bool ok = report_validation(ctx, report, "validation.txt");
  ctx.out << "validate: " << (ok ? "pass" : "fail") << '\n';
  return ok ? exit_ok : exit_validation;
}

int cmd_run(Context& ctx) {
  require_configs(ctx, 1);
  const auto& c = ctx.config();
  if (!c.tau) throw ConfigError("'run' needs tau");
  const auto loaded = load_problem(c, ctx.inv.seed);
  const auto& pb = loaded.problem;
  if (!report_validation(ctx, validate_sextet(pb.sextet), "validation.txt"))
    ctx.err << "warning: sextet is not admissible; stepping anyway\n";
  guard(ctx, *c.tau, pb.sextet.norms(), pb.nu);
  DiscreteSpaces sp(pb.mesh);
  const auto run = run_problem(sp, pb, *c.tau, {c.tolerance, ctx.inv.override_tau_guard});
  const auto& traj = run.traj;
  {
    auto f = ctx.open("trajectory.csv");
    write_trajectory_csv(traj, sp, f);
  }
  {
    auto f = ctx.open("diagnostics.csv");
    f << "i,t,energy,iterations,residual\n";
    char buf[160];
    for (int i = 1; i <= traj.steps; ++i) {
      const auto& d = traj.diagnostics[i];
      std::snprintf(buf, sizeof buf, "%d,%.12e,%.12e,%d,%.3e\n", i, std::min(traj.time(i), traj.T), d.energy,
                    d.iterations, d.residual);
      f << buf;
    }
  }
  const auto [p, z] = trajectory_fields(traj, sp);
  {
    auto f = ctx.open("p.field");
    write_field(p, f);
  }
  {
    auto f = ctx.open("z.field");
    write_field(z, f);
  }
  ctx.out << "run: " << traj.steps << " steps, tau = " << fmt(traj.tau)
          << (traj.partial_final_step ? " (partial final step)" : "") << '\n';
  return exit_ok;
}

int cmd_converge(Context& ctx) {
  require_configs(ctx, 1);
  const auto& c = ctx.config();
  if (c.taus.empty()) throw ConfigError("'converge' needs a taus list");
  const auto loaded = load_problem(c, ctx.inv.seed);
  const auto& pb = loaded.problem;
  if (!report_validation(ctx, validate_sextet(pb.sextet), "validation.txt"))
    ctx.err << "warning: sextet is not admissible; stepping anyway\n";
  for (double tau : c.taus) guard(ctx, tau, pb.sextet.norms(), pb.nu);
  DiscreteSpaces sp(pb.mesh);
  const auto table =
      tau_refinement_study(sp, pb, c.taus, loaded.exact, {c.tolerance, ctx.inv.override_tau_guard});
  {
    auto f = ctx.open("convergence.csv");
    table.write_csv(f);
  }
  table.write_csv(ctx.out);
  return exit_ok;
}

bool same_shape(const RunConfig& a, const RunConfig& b) {
  return a.domain == b.domain && a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0 && a.y1 == b.y1 &&
         a.cells == b.cells && a.T == b.T && a.time_samples == b.time_samples && a.nu == b.nu && a.tau == b.tau;
}

int cmd_depcheck(Context& ctx) {
  require_configs(ctx, 2);
  const auto& c1 = ctx.configs[0];
  const auto& c2 = ctx.configs[1];
  if (!same_shape(c1, c2))
    throw ConfigError("depcheck configs must share domain, cells, T, time_samples, nu and tau");
  const auto l1 = load_problem(c1, ctx.inv.seed);
  const auto l2 = load_problem(c2, ctx.inv.seed);
  const auto& pb1 = l1.problem;
  const auto& pb2 = l2.problem;
  const bool v1 = report_validation(ctx, validate_sextet(pb1.sextet), "validation_1.txt");
  const bool v2 = report_validation(ctx, validate_sextet(pb2.sextet), "validation_2.txt");
  if (!v1 || !v2) return exit_validation;
  DiscreteSpaces sp(pb1.mesh);
  const auto emb = embedding_constants(c1, sp);
  const double tau = c1.tau ? *c1.tau : 0.5 * scheme_constants(pb1.sextet.norms(), pb1.nu, c1.T, emb).delta0;
  guard(ctx, tau, pb1.sextet.norms(), pb1.nu);
  guard(ctx, tau, pb2.sextet.norms(), pb2.nu);
  const StepOptions opt{c1.tolerance, ctx.inv.override_tau_guard};
  const auto r = check_continuous_dependence(sp, pb1, run_problem(sp, pb1, tau, opt), pb2,
                                             run_problem(sp, pb2, tau, opt), emb);
  ctx.open("depcheck.txt") << r.to_text();
  ctx.out << r.to_text();
  return r.pass ? exit_ok : exit_validation;
}

int cmd_kwc_build(Context& ctx) {
  require_configs(ctx, 1);
  const auto& c = ctx.config();
  if (c.coefficients == "catalog") throw ConfigError("'kwc-build' needs coefficients = kwc-linearized or kwc-adjoint");
  std::mt19937_64 rng(ctx.inv.seed);
  const auto sextet = load_sextet(c, make_mesh(c), rng);
  const std::pair<const char*, const SpaceTimeField*> fields[] = {
      {"a", &sextet.a()},           {"b", &sextet.b()},         {"mu", &sextet.mu()},
      {"lambda", &sextet.lambda()}, {"omega", &sextet.omega()}, {"A", &sextet.A()}};
  for (const auto& [name, f] : fields) {
    auto file = ctx.open(std::string(name) + ".field");
    write_field(*f, file);
  }
  const bool ok = report_validation(ctx, validate_sextet(sextet), "validation.txt");
  ctx.out << "kwc-build: " << c.coefficients << ", " << (ok ? "admissible" : "not admissible") << '\n';
  return ok ? exit_ok : exit_validation;
}

int cmd_constants(Context& ctx) {
  require_configs(ctx, 1);
  const auto& c = ctx.config();
  std::mt19937_64 rng(ctx.inv.seed);
  auto mesh = make_mesh(c);
  const auto sextet = load_sextet(c, mesh, rng);
  if (!report_validation(ctx, validate_sextet(sextet), "validation.txt")) return exit_validation;
  DiscreteSpaces sp(mesh);
  const auto emb = embedding_constants(c, sp);
  const auto k = scheme_constants(sextet.norms(), c.nu, c.T, emb);
  const auto& n = sextet.norms();
  std::ostringstream s;
  const std::pair<const char*, double> rows[] = {
      {"nu", k.nu},           {"T", k.T},
      {"tau_star", k.tau_star}, {"delta0", k.delta0},
      {"C_star", k.c_star},   {"C_tilde_star", k.c_tilde_star},
      {"C0_star", k.c0_star}, {"C1_star", k.c1_star},
      {"log_C1_star", k.log_c1_star}, {"M0", k.m0},
      {"M1", k.m1},           {"cV4", k.cV4},
      {"cV04", k.cV04},       {"cV0H", k.cV0H},
      {"cVH", k.cVH},         {"delta_star", n.delta_star},
      {"a_w1inf", n.a_w1inf}, {"b_sup", n.b_sup},
      {"mu_linf_h", n.mu_linf_h}, {"lambda_sup", n.lambda_sup},
      {"omega_sup", n.omega_sup}, {"A_sup", n.A_sup}};
  for (const auto& [name, v] : rows) s << name << " = " << fmt(v) << '\n';
  ctx.open("constants.txt") << s.str();
  ctx.out << s.str();
  return exit_ok;
}

const char* status_name(int code) {
  switch (code) {
    case exit_ok: return "ok";
    case exit_validation: return "validation_failure";
    case exit_guard: return "guard_refusal";
    default: return "solver_failure";
  }
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"validate", "run", "converge", "depcheck", "kwc-build", "constants"};
  return names;
}

int run_command(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  static const std::map<std::string, std::function<int(Context&)>> table = {
      {"validate", cmd_validate}, {"run", cmd_run},             {"converge", cmd_converge},
      {"depcheck", cmd_depcheck}, {"kwc-build", cmd_kwc_build}, {"constants", cmd_constants}};
  int code = exit_ok;
  std::string message;
  fs::path out_dir = inv.out ? *inv.out : fs::path("copar-out");
  try {
    const auto it = table.find(inv.command);
    if (it == table.end()) throw ConfigError("unknown command '" + inv.command + "'");
    std::vector<RunConfig> configs;
    for (const auto& p : inv.configs) configs.push_back(load_config(p));
    if (!inv.out && !configs.empty() && !configs.front().output.empty()) out_dir = configs.front().output;
    fs::create_directories(out_dir);
    Context ctx{inv, std::move(configs), out_dir, out, err};
    code = it->second(ctx);
  } catch (const TauGuardError& e) {
    code = exit_guard;
    message = std::string(e.what()) + " (tau_* = " + fmt(e.tau_star()) + "); pass --override-tau-guard to force";
  } catch (const SolverError& e) {
    code = exit_solver;
    message = e.what();
    if (e.step() >= 0) message += " at step " + std::to_string(e.step());
  } catch (const Error& e) {
    code = exit_validation;
    message = e.what();
  } catch (const fs::filesystem_error& e) {
    code = exit_validation;
    message = e.what();
  }
  if (!message.empty()) err << "error: " << message << '\n';
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream summary(out_dir / "summary.txt");
  if (summary) {
    summary << "name = " << inv.command << "\nstatus = " << status_name(code) << "\nexit_code = " << code
            << "\nwall_time_s = " << fmt(wall) << '\n';
    if (!message.empty()) summary << "message = " << message << '\n';
  }
  return code;
}

}  // namespace copar::cli
