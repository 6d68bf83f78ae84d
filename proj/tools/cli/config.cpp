#include "config.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace copar::cli {

namespace {

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError("key '" + key + "' expects a number, got '" + s + "'");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError("key '" + key + "' expects an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + s + "'");
}

const std::string& single(const std::string& key, const std::vector<std::string>& in) {
  if (in.size() != 1) throw ConfigError("key '" + key + "' expects a single value");
  return in.front();
}

void check(const RunConfig& c) {
  if (c.domain != "interval" && c.domain != "rectangle")
    throw ConfigError("domain must be 'interval' or 'rectangle'");
  if (!(c.x1 > c.x0) || (c.domain == "rectangle" && !(c.y1 > c.y0))) throw ConfigError("degenerate domain extent");
  if (c.cells < 2) throw ConfigError("cells must be at least 2");
  if (!(c.T > 0.0)) throw ConfigError("T must be positive");
  if (!(c.nu > 0.0)) throw ConfigError("nu must be positive");
  if (c.time_samples < 1) throw ConfigError("time_samples must be at least 1");
  if (c.tau && !(*c.tau > 0.0 && *c.tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  for (std::size_t j = 0; j < c.taus.size(); ++j) {
    if (!(c.taus[j] > 0.0 && c.taus[j] < 1.0)) throw ConfigError("taus entries must lie in (0, 1)");
    if (j > 0 && !(c.taus[j] < c.taus[j - 1])) throw ConfigError("taus must be strictly decreasing");
  }
  if (c.coefficients != "catalog" && c.coefficients != "kwc-linearized" && c.coefficients != "kwc-adjoint")
    throw ConfigError("coefficients must be 'catalog', 'kwc-linearized' or 'kwc-adjoint'");
  if (!(c.kwc_eps > 0.0)) throw ConfigError("kwc_eps must be positive");
  if (!(c.kwc_alpha_min > 0.0)) throw ConfigError("kwc_alpha_min must be positive");
  if (!(c.tolerance > 0.0 && c.tolerance < 1.0)) throw ConfigError("tolerance must lie in (0, 1)");
  if (!c.mms.empty())
    for (const char* k : {"h", "k", "p0", "z0"})
      if (c.fields.count(k)) throw ConfigError(std::string("key '") + k + "' conflicts with mms");
  for (const auto* e : {&c.cV4, &c.cV04, &c.cV0H, &c.cVH})
    if (*e && !(**e > 0.0)) throw ConfigError("embedding constant overrides must be positive");
}

}  // namespace

const std::vector<std::string>& field_keys() {
  static const std::vector<std::string> keys = {"a",  "b",  "mu",  "lambda", "omega", "A",     "h",
                                                "k",  "p0", "z0",  "eta",    "theta", "alpha0"};
  return keys;
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  std::set<std::string> seen;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    if (!it.parents.empty()) throw ConfigError("config sections are not supported (key '" + it.name + "')");
    const std::string& key = it.name;
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
    const auto& v = it.inputs;
    if (key == "domain") c.domain = single(key, v);
    else if (key == "x0") c.x0 = to_double(key, single(key, v));
    else if (key == "x1") c.x1 = to_double(key, single(key, v));
    else if (key == "y0") c.y0 = to_double(key, single(key, v));
    else if (key == "y1") c.y1 = to_double(key, single(key, v));
    else if (key == "cells") c.cells = to_int(key, single(key, v));
    else if (key == "T") c.T = to_double(key, single(key, v));
    else if (key == "tau") c.tau = to_double(key, single(key, v));
    else if (key == "taus") {
      if (v.empty()) throw ConfigError("taus must not be empty");
      for (const auto& s : v) c.taus.push_back(to_double(key, s));
    } else if (key == "time_samples") c.time_samples = to_int(key, single(key, v));
    else if (key == "nu") c.nu = to_double(key, single(key, v));
    else if (key == "coefficients") c.coefficients = single(key, v);
    else if (key == "mms") c.mms = single(key, v);
    else if (key == "kwc_eps") c.kwc_eps = to_double(key, single(key, v));
    else if (key == "kwc_alpha_min") c.kwc_alpha_min = to_double(key, single(key, v));
    else if (key == "theta_dirichlet") c.theta_dirichlet = to_bool(key, single(key, v));
    else if (key == "tolerance") c.tolerance = to_double(key, single(key, v));
    else if (key == "output") c.output = single(key, v);
    else if (key == "cV4") c.cV4 = to_double(key, single(key, v));
    else if (key == "cV04") c.cV04 = to_double(key, single(key, v));
    else if (key == "cV0H") c.cV0H = to_double(key, single(key, v));
    else if (key == "cVH") c.cVH = to_double(key, single(key, v));
    else if (std::find(field_keys().begin(), field_keys().end(), key) != field_keys().end())
      c.fields[key] = single(key, v);
    else
      throw ConfigError("unknown config key '" + key + "'");
  }
  check(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  auto dir = path.parent_path();
  return parse_config(in, dir.empty() ? std::filesystem::path(".") : dir);
}

}  // namespace copar::cli
