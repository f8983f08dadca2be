#include "eprld_cli/config.hpp"

#include "eprld/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

namespace eprld::cli {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + ": expected a finite number");
  return d;
}

long long get_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<long long>();
}

std::vector<double> get_numbers(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix get_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  if (v[0].is_array()) {
    const std::size_t rows = v.size();
    const std::size_t cols = v[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = get_numbers(v[i], where + "[" + std::to_string(i) + "]");
      if (row.size() != cols) throw ConfigError(where + ": ragged rows");
      for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    return m;
  }
  const auto flat = get_numbers(v, where);
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
  if (n * n != flat.size()) throw ConfigError(where + ": flat matrix length is not a perfect square");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < flat.size(); ++k) {
    m(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) = flat[k];
  }
  return m;
}

Grid get_grid(const json& v, const std::string& where) {
  require_keys(v, where, {"min", "max", "count"});
  if (!v.contains("min") || !v.contains("max") || !v.contains("count")) {
    throw ConfigError(where + ": min, max and count are required");
  }
  Grid g;
  g.min = get_number(v["min"], where + ".min");
  g.max = get_number(v["max"], where + ".max");
  const long long count = get_integer(v["count"], where + ".count");
  if (count < 1 || count > 10'000'000) throw ConfigError(where + ".count must lie in [1, 1e7]");
  if (g.max < g.min) throw ConfigError(where + ": max < min");
  g.count = static_cast<int>(count);
  return g;
}

void parse_system(const json& v, RunConfig& cfg) {
  require_keys(v, "system", {"matrix_A", "matrix_Q", "tol_validate", "example", "theta", "extended"});
  const bool has_matrix = v.contains("matrix_A");
  const bool has_example = v.contains("example");
  if (has_matrix == has_example) throw ConfigError("system: give exactly one of matrix_A and example");

  double tol = kDefaultValidateTol;
  if (v.contains("tol_validate")) {
    tol = get_number(v["tol_validate"], "system.tol_validate");
    if (tol < 0.0) throw ConfigError("system.tol_validate must be nonnegative");
  }

  if (has_example) {
    if (v.contains("matrix_Q")) throw ConfigError("system: matrix_Q cannot be combined with example");
    if (!v["example"].is_string() || v["example"].get<std::string>() != "magnetic") {
      throw ConfigError("system.example: only \"magnetic\" is available");
    }
    const double theta = v.contains("theta") ? get_number(v["theta"], "system.theta") : std::numbers::pi / 4.0;
    bool extended = false;
    if (v.contains("extended")) {
      if (!v["extended"].is_boolean()) throw ConfigError("system.extended: expected a boolean");
      extended = v["extended"].get<bool>();
    }
    try {
      cfg.system = magnetic_example(theta, extended);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("system.theta: ") + e.what());
    }
    cfg.system->tol_validate = tol;
    cfg.system_label = extended ? "magnetic (3-D)" : "magnetic";
    return;
  }

  if (v.contains("theta") || v.contains("extended")) {
    throw ConfigError("system: theta and extended only apply to example systems");
  }
  SystemSpec spec;
  spec.A = get_matrix(v["matrix_A"], "system.matrix_A");
  spec.Q = v.contains("matrix_Q") ? get_matrix(v["matrix_Q"], "system.matrix_Q")
                                  : Matrix::Identity(spec.A.rows(), spec.A.rows());
  spec.tol_validate = tol;
  cfg.system = std::move(spec);
  cfg.system_label = "matrix";
}

void parse_spectral(const json& v, RunConfig& cfg) {
  require_keys(v, "spectral", {"j_max", "nystrom_nodes", "rule", "lambdas"});
  if (v.contains("j_max")) {
    const long long j = get_integer(v["j_max"], "spectral.j_max");
    if (j < 1 || j > 1'000'000) throw ConfigError("spectral.j_max must lie in [1, 1e6]");
    cfg.j_max = static_cast<int>(j);
  }
  if (v.contains("nystrom_nodes")) {
    const long long n = get_integer(v["nystrom_nodes"], "spectral.nystrom_nodes");
    if (n < 8 || n > 4000) throw ConfigError("spectral.nystrom_nodes must lie in [8, 4000]");
    cfg.nystrom_nodes = static_cast<int>(n);
  }
  if (v.contains("rule")) {
    if (!v["rule"].is_string()) throw ConfigError("spectral.rule: expected a string");
    cfg.rule = parse_quadrature_rule(v["rule"].get<std::string>());
  }
  if (v.contains("lambdas")) {
    cfg.spectral_lambdas = get_numbers(v["lambdas"], "spectral.lambdas");
    if (cfg.spectral_lambdas.empty()) throw ConfigError("spectral.lambdas must be non-empty");
  }
}

void parse_mgf(const json& v, RunConfig& cfg) {
  require_keys(v, "mgf", {"x", "thetas", "lambdas", "finite_T_lambdas", "horizons"});
  if (v.contains("x")) {
    const auto x = get_numbers(v["x"], "mgf.x");
    cfg.mgf_x = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
  }
  if (v.contains("thetas")) cfg.mgf_thetas = get_numbers(v["thetas"], "mgf.thetas");
  if (v.contains("lambdas")) cfg.mgf_lambdas = get_numbers(v["lambdas"], "mgf.lambdas");
  if (v.contains("finite_T_lambdas")) cfg.finite_T_lambdas = get_numbers(v["finite_T_lambdas"], "mgf.finite_T_lambdas");
  if (v.contains("horizons")) {
    cfg.finite_T_horizons = get_numbers(v["horizons"], "mgf.horizons");
    for (double t : *cfg.finite_T_horizons) {
      if (!(t > 0.0)) throw ConfigError("mgf.horizons must be positive");
    }
  }
}

void parse_mc(const json& v, RunConfig& cfg) {
  require_keys(v, "mc", {"T", "dt", "n_traj", "seed", "scheme", "start", "lambdas", "thresholds"});
  if (v.contains("T")) cfg.mc.T = get_number(v["T"], "mc.T");
  if (!(cfg.mc.T > 0.0)) throw ConfigError("mc.T must be positive");
  if (v.contains("dt")) {
    cfg.mc.dt = get_number(v["dt"], "mc.dt");
    if (!(cfg.mc.dt > 0.0) || cfg.mc.dt > cfg.mc.T) throw ConfigError("mc.dt must lie in (0, mc.T]");
    cfg.mc_dt_set = true;
  }
  if (v.contains("n_traj")) {
    const long long n = get_integer(v["n_traj"], "mc.n_traj");
    if (n < 2) throw ConfigError("mc.n_traj must be at least 2");
    cfg.mc.n_traj = static_cast<std::size_t>(n);
  }
  if (v.contains("seed")) {
    if (!v["seed"].is_number_unsigned() && !(v["seed"].is_number_integer() && v["seed"].get<long long>() >= 0)) {
      throw ConfigError("mc.seed: expected a nonnegative integer");
    }
    cfg.mc.seed = v["seed"].get<std::uint64_t>();
  }
  if (v.contains("scheme")) {
    if (!v["scheme"].is_string()) throw ConfigError("mc.scheme: expected a string");
    cfg.mc.scheme = parse_scheme(v["scheme"].get<std::string>());
  }
  if (v.contains("start")) {
    const json& s = v["start"];
    if (s.is_string()) {
      if (s.get<std::string>() != "stationary") throw ConfigError("mc.start: expected \"stationary\" or a vector");
    } else {
      const auto x = get_numbers(s, "mc.start");
      cfg.mc.start = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    }
  }
  if (v.contains("lambdas")) cfg.mc_lambdas = get_numbers(v["lambdas"], "mc.lambdas");
  if (v.contains("thresholds")) cfg.mc_thresholds = get_numbers(v["thresholds"], "mc.thresholds");
}

void parse_output(const json& v, RunConfig& cfg) {
  require_keys(v, "output", {"format", "path"});
  if (v.contains("format")) {
    if (!v["format"].is_string()) throw ConfigError("output.format: expected a string");
    cfg.format = v["format"].get<std::string>();
    if (cfg.format != "csv" && cfg.format != "json") throw ConfigError("output.format must be csv or json");
  }
  if (v.contains("path")) {
    if (!v["path"].is_string() || v["path"].get<std::string>().empty()) {
      throw ConfigError("output.path: expected a non-empty string");
    }
    cfg.output_path = v["path"].get<std::string>();
  }
}

void parse_verify(const json& v, RunConfig& cfg) {
  require_keys(v, "verify", {"scale", "checks", "seed"});
  if (v.contains("scale")) {
    const std::string s = v["scale"].is_string() ? v["scale"].get<std::string>() : "";
    if (s == "full") {
      cfg.verify.scale = VerifyScale::full;
    } else if (s == "reduced") {
      cfg.verify.scale = VerifyScale::reduced;
    } else {
      throw ConfigError("verify.scale must be \"full\" or \"reduced\"");
    }
  }
  if (v.contains("checks")) {
    if (!v["checks"].is_array()) throw ConfigError("verify.checks: expected an array");
    for (const auto& c : v["checks"]) {
      const long long id = get_integer(c, "verify.checks");
      if (id < 1 || id > kAcceptanceCount) throw ConfigError("verify.checks: ids run from 1 to 10");
      cfg.verify_checks.push_back(static_cast<int>(id));
    }
  }
  if (v.contains("seed")) {
    if (!v["seed"].is_number_integer() || (!v["seed"].is_number_unsigned() && v["seed"].get<long long>() < 0)) {
      throw ConfigError("verify.seed: expected a nonnegative integer");
    }
    cfg.verify.seed = v["seed"].get<std::uint64_t>();
  }
}

}  // namespace

std::vector<double> Grid::points() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = min;
    return out;
  }
  const double h = (max - min) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = min + h * i;
  out.back() = max;
  return out;
}

const SystemSpec& RunConfig::require_system() const {
  if (!system) throw ConfigError("config: missing system (matrix_A or example)");
  return *system;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

RunConfig parse_config(nlohmann::json doc, const Overrides& overrides) {
  if (doc.is_null()) doc = nlohmann::json::object();
  require_keys(doc, "config", {"system", "T", "lambda_grid", "x_grid", "spectral", "mgf", "mc", "output", "verify"});

  if (overrides.seed) {
    doc["mc"]["seed"] = *overrides.seed;
    doc["verify"]["seed"] = *overrides.seed;
  }

  RunConfig cfg;
  if (doc.contains("system")) parse_system(doc["system"], cfg);
  if (doc.contains("T")) {
    cfg.T = get_number(doc["T"], "T");
    if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
  }
  if (doc.contains("lambda_grid")) cfg.lambda_grid = get_grid(doc["lambda_grid"], "lambda_grid");
  if (doc.contains("x_grid")) cfg.x_grid = get_grid(doc["x_grid"], "x_grid");
  if (doc.contains("spectral")) parse_spectral(doc["spectral"], cfg);
  if (doc.contains("mgf")) parse_mgf(doc["mgf"], cfg);
  if (doc.contains("mc")) parse_mc(doc["mc"], cfg);
  if (doc.contains("output")) parse_output(doc["output"], cfg);
  if (doc.contains("verify")) parse_verify(doc["verify"], cfg);

  if (overrides.jobs) {
    cfg.mc.jobs = *overrides.jobs;
    cfg.verify.jobs = *overrides.jobs;
  }

  // nlohmann objects keep keys sorted, so dump() is canonical.
  nlohmann::json canonical = doc;
  if (canonical.contains("output")) {
    canonical["output"].erase("path");
    if (canonical["output"].empty()) canonical.erase("output");
  }
  cfg.fingerprint = fnv1a_hex(canonical.dump());
  return cfg;
}

}  // namespace eprld::cli
