#include "problem.hpp"

#include <charconv>
#include <fstream>
#include <numbers>

namespace copar::cli {

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> numbers(const std::string& expr, const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const std::size_t end = std::min(list.find(',', pos), list.size());
    std::string tok = list.substr(pos, end - pos);
    tok.erase(0, tok.find_first_not_of(' '));
    tok.erase(tok.find_last_not_of(' ') + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
      throw ConfigError("bad number '" + tok + "' in expression '" + expr + "'");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

using ScalarExpr = std::function<double(double, const Point&)>;

std::optional<ScalarExpr> scalar_expression(const std::string& head, const std::vector<double>& v, int dim,
                                            const std::string& expr, std::mt19937_64& rng) {
  const auto need = [&](std::size_t n) {
    if (v.size() != n) throw ConfigError("expression '" + expr + "' needs " + std::to_string(n) + " numbers");
  };
  if (head == "poly") {
    need(4);
    return [v](double t, const Point& x) { return v[0] + v[1] * x[0] + v[2] * x[1] + v[3] * t; };
  }
  if (head == "trig") {
    need(6);
    return [v](double t, const Point& x) {
      return v[0] + v[1] * std::cos(v[2] * pi * x[0] + v[5]) * std::cos(v[3] * pi * x[1]) * std::cos(v[4] * t);
    };
  }
  if (head == "bump") {
    need(2);
    return [v, dim](double t, const Point& x) {
      return v[0] * std::sin(pi * x[0]) * (dim == 2 ? std::sin(pi * x[1]) : 1.0) * std::cos(v[1] * t);
    };
  }
  if (head == "random") {
    need(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double kx = 1.0 + std::floor(1.5 * (u(rng) + 1.0)), ky = 1.0 + std::floor(1.5 * (u(rng) + 1.0));
    const double kt = 0.5 + (u(rng) + 1.0), ph = pi * u(rng);
    return [v, kx, ky, kt, ph](double t, const Point& x) {
      return v[0] + v[1] * std::sin(kx * pi * x[0] + ph) * std::cos(ky * pi * x[1]) * std::cos(kt * t + ph);
    };
  }
  return std::nullopt;
}

}  // namespace

SpaceTimeField make_field(const std::string& expr, FieldKind kind, const Mesh& mesh, TimeGrid grid,
                          const std::filesystem::path& base_dir, std::mt19937_64& rng) {
  const std::size_t colon = expr.find(':');
  if (colon == std::string::npos) throw ConfigError("expression '" + expr + "' lacks a 'name:' prefix");
  const std::string head = expr.substr(0, colon), body = expr.substr(colon + 1);
  const int n = mesh.dim(), comps = component_count(kind, n);

  if (head == "file") {
    std::filesystem::path path(body);
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open field file '" + path.string() + "'");
    SpaceTimeField f = read_field(in);
    if (f.kind() != kind || f.dim() != n || f.num_nodes() != mesh.num_nodes())
      throw ConfigError("field file '" + path.string() + "' does not match the mesh or field kind");
    if (f.grid().T != grid.T || f.grid().intervals != grid.intervals)
      throw ConfigError("field file '" + path.string() + "' does not match T and time_samples");
    return f;
  }

  if (head == "const") {
    const auto v = numbers(expr, body);
    std::vector<double> value(comps, 0.0);
    if (static_cast<int>(v.size()) == comps) {
      value = v;
    } else if (v.size() == 1) {
      if (kind == FieldKind::matrix)
        for (int r = 0; r < n; ++r) value[r * n + r] = v[0];
      else
        std::fill(value.begin(), value.end(), v[0]);
    } else {
      throw ConfigError("expression '" + expr + "' needs 1 or " + std::to_string(comps) + " numbers");
    }
    return SpaceTimeField::constant(kind, n, mesh.num_nodes(), grid, value);
  }

  const auto fn = scalar_expression(head, numbers(expr, body), n, expr, rng);
  if (!fn) throw ConfigError("unknown expression '" + head + "' in '" + expr + "'");
  const ScalarExpr f = *fn;
  return SpaceTimeField::sample(kind, n, mesh, grid, [f, kind, n](double t, const Point& x, std::span<double> out) {
    const double s = f(t, x);
    if (kind == FieldKind::matrix) {
      std::fill(out.begin(), out.end(), 0.0);
      for (int r = 0; r < n; ++r) out[r * n + r] = s;
    } else {
      std::fill(out.begin(), out.end(), s);
    }
  });
}

std::shared_ptr<const Mesh> make_mesh(const RunConfig& c) {
  if (c.domain == "interval") return build_mesh(Interval{c.x0, c.x1}, c.cells);
  return build_mesh(Rectangle{c.x0, c.x1, c.y0, c.y1}, c.cells);
}

TimeGrid field_grid(const RunConfig& c) { return TimeGrid{c.T, c.time_samples}; }

CoefficientSextet load_sextet(const RunConfig& c, std::shared_ptr<const Mesh> mesh, std::mt19937_64& rng) {
  const TimeGrid grid = field_grid(c);
  const Mesh& m = *mesh;
  const auto field = [&](const std::string& name, FieldKind kind, const std::string& fallback) {
    return make_field(c.field(name, fallback), kind, m, grid, c.base_dir, rng);
  };
  if (c.coefficients == "catalog") {
    return CoefficientSextet(mesh, field("a", FieldKind::scalar, "const:1"), field("b", FieldKind::scalar, "const:0"),
                             field("mu", FieldKind::scalar, "const:0"), field("lambda", FieldKind::scalar, "const:0"),
                             field("omega", FieldKind::vector, "const:0"), field("A", FieldKind::matrix, "const:1"));
  }
  PhaseFieldPair pair(mesh, field("eta", FieldKind::scalar, "const:0"), field("theta", FieldKind::scalar, "const:0"),
                      c.theta_dirichlet);
  ModelFunctions f = ModelFunctions::defaults(m, grid);
  const double amin = c.kwc_alpha_min;
  f.alpha = [amin](double r) { return amin + r * r; };
  f.eps = c.kwc_eps;
  f.alpha0 = field("alpha0", FieldKind::scalar, "const:1");
  f.alpha0_dt.reset();
  KwcSystem sys = c.coefficients == "kwc-linearized" ? build_linearized(pair, f) : build_adjoint(pair, f);
  return std::move(sys.sextet);
}

LoadedProblem load_problem(const RunConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto mesh = make_mesh(c);
  const TimeGrid grid = field_grid(c);
  CoefficientSextet sextet = load_sextet(c, mesh, rng);
  if (!c.mms.empty()) {
    MmsSolution sol = mms_catalog(c.mms);
    Forcing f = mms_forcing(sol, sextet, c.nu, grid);
    InitialData init = mms_initial(sol, *mesh);
    return {Problem{mesh, std::move(sextet), std::move(f), std::move(init), c.nu}, std::move(sol)};
  }
  const auto field = [&](const std::string& name) {
    return make_field(c.field(name, "const:0"), FieldKind::scalar, *mesh, grid, c.base_dir, rng);
  };
  Forcing f{field("h"), field("k"), std::nullopt, std::nullopt};
  const auto p0 = field("p0"), z0 = field("z0");
  InitialData init{std::vector<double>(p0.instant(0).begin(), p0.instant(0).end()),
                   std::vector<double>(z0.instant(0).begin(), z0.instant(0).end())};
  return {Problem{mesh, std::move(sextet), std::move(f), std::move(init), c.nu}, std::nullopt};
}

EmbeddingConstants embedding_constants(const RunConfig& c, const DiscreteSpaces& sp) {
  EmbeddingConstants e;
  const bool all = c.cV4 && c.cV04 && c.cV0H && c.cVH;
  if (!all) e = discrete_embedding_constants(sp);
  if (c.cV4) e.cV4 = *c.cV4;
  if (c.cV04) e.cV04 = *c.cV04;
  if (c.cV0H) e.cV0H = *c.cV0H;
  if (c.cVH) e.cVH = *c.cVH;
  return e;
}

}  // namespace copar::cli
