#pragma once

#include "copar/core.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace copar::cli {

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat key/value run configuration.
struct RunConfig {
  std::filesystem::path base_dir = ".";  ///< relative field-file paths resolve here

  std::string domain = "interval";  ///< interval | rectangle
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int cells = 32;

  double T = 1.0;
  std::optional<double> tau;
  std::vector<double> taus;
  int time_samples = 64;  ///< field lattice intervals
  double nu = 1.0;

  std::string coefficients = "catalog";  ///< catalog | kwc-linearized | kwc-adjoint
  std::map<std::string, std::string> fields;  ///< expression per field name
  std::string mms;                            ///< manufactured solution name (forcing and initial data)

  double kwc_eps = 0.05;
  double kwc_alpha_min = 0.01;
  bool theta_dirichlet = false;

  double tolerance = 1e-10;
  std::string output;

  std::optional<double> cV4, cV04, cV0H, cVH;

  std::string field(const std::string& name, const std::string& fallback) const {
    const auto it = fields.find(name);
    return it == fields.end() ? fallback : it->second;
  }
};

/// Field names accepted as expression keys.
const std::vector<std::string>& field_keys();

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

}  // namespace copar::cli
