#pragma once

// JSON run configuration. Unknown keys are rejected so that typos fail
// loudly instead of silently falling back to defaults.

#include "eprld/montecarlo.hpp"
#include "eprld/quadrature.hpp"
#include "eprld/verify.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eprld::cli {

struct Grid {
  double min = 0.0;
  double max = 0.0;
  int count = 1;

  [[nodiscard]] std::vector<double> points() const;
};

struct RunConfig {
  std::optional<SystemSpec> system;
  std::string system_label;
  double T = 1.0;
  std::optional<Grid> lambda_grid;
  std::optional<Grid> x_grid;

  int j_max = 200;
  int nystrom_nodes = 200;
  QuadratureRule rule = QuadratureRule::gauss_legendre;
  std::vector<double> spectral_lambdas{0.0};

  std::optional<Vector> mgf_x;        // default e_1
  std::optional<std::vector<double>> mgf_thetas;
  std::vector<double> mgf_lambdas{0.0};
  std::vector<double> finite_T_lambdas{0.1};
  std::optional<std::vector<double>> finite_T_horizons;  // default {T}

  SimConfig mc;
  bool mc_dt_set = false;
  std::vector<double> mc_lambdas;
  std::vector<double> mc_thresholds;

  std::string format = "csv";
  std::optional<std::string> output_path;

  VerifyOptions verify{VerifyScale::reduced, 20240917, 0};
  std::vector<int> verify_checks;

  std::string fingerprint;  // of the canonical config, output.path excluded

  /// Throws ConfigError when the config carries no system.
  [[nodiscard]] const SystemSpec& require_system() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
};

/// Reads and parses a JSON file; ConfigError when it cannot be read or parsed.
nlohmann::json read_json_file(const std::string& path);

RunConfig parse_config(nlohmann::json doc, const Overrides& overrides = {});

/// 16 hex digits of FNV-1a over `text`.
std::string fnv1a_hex(const std::string& text);

}  // namespace eprld::cli
