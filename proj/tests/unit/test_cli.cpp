#include "doctest.h"

#include "eprld/cramer.hpp"
#include "eprld/error.hpp"
#include "eprld_cli/commands.hpp"
#include "eprld_cli/config.hpp"
#include "eprld_cli/output.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace eprld;
using namespace eprld::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("eprld_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "eprld");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Csv {
  std::string fingerprint;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  Csv c;
  std::string line;
  std::getline(in, line);
  REQUIRE(line.rfind("# config_fingerprint=", 0) == 0);
  c.fingerprint = line.substr(21);
  std::getline(in, line);
  c.header = split(line);
  while (std::getline(in, line)) c.rows.push_back(split(line));
  return c;
}

const char* kMagnetic = R"({"system": {"example": "magnetic", "theta": 0.7853981633974483}, "T": 1})";

}  // namespace

TEST_CASE("shortest formatting round-trips doubles and non-finite literals") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isinf(parse_double("inf")));
  CHECK(std::isnan(parse_double("nan")));
  CHECK_THROWS(parse_double("1.0x"));
  CHECK(json_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("config parsing") {
  const RunConfig c = parse_config(nlohmann::json::parse(
      R"({"system": {"matrix_A": [-1, 1, -1, -1]}, "lambda_grid": {"min": -1, "max": 0, "count": 5},
          "mc": {"seed": 3, "start": [1, 0]}})"));
  REQUIRE(c.system);
  CHECK(c.system->A(0, 1) == 1.0);
  CHECK(c.system->Q == Matrix::Identity(2, 2));
  CHECK(c.lambda_grid->points() == std::vector<double>{-1, -0.75, -0.5, -0.25, 0});
  CHECK(c.mc.seed == 3);
  CHECK(c.mc.start->size() == 2);

  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"sytem": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"system": {}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"system": {"matrix_A": [1, 2, 3]}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"x_grid": {"min": 0, "max": 1, "count": 0}})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"output": {"format": "xml"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"mc": {"scheme": "rk4"}})")), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"system": {"example": "magnetic", "theta": 2}})")),
                  ConfigError);
}

TEST_CASE("fingerprint depends on content, seed override and not on output path or jobs") {
  const auto doc = nlohmann::json::parse(kMagnetic);
  const RunConfig a = parse_config(doc);
  auto with_path = doc;
  with_path["output"]["path"] = "/somewhere/else";
  CHECK(parse_config(with_path).fingerprint == a.fingerprint);
  CHECK(parse_config(doc, {std::nullopt, 4u}).fingerprint == a.fingerprint);
  CHECK(parse_config(doc, {7u, std::nullopt}).fingerprint != a.fingerprint);
  auto other = doc;
  other["T"] = 2;
  CHECK(parse_config(other).fingerprint != a.fingerprint);
}

TEST_CASE("validate exit codes") {
  TempDir tmp;
  const auto good = write_config(tmp.path, "good.json", kMagnetic);
  Run r = run({"validate", "--config", good.string(), "--out", (tmp.path / "o").string()});
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(slurp(tmp.path / "o" / "validate.json"));
  CHECK(report["usable"] == true);

  const auto nonnormal = write_config(tmp.path, "nn.json", R"({"system": {"matrix_A": [[-1, 2], [0, -1]]}})");
  r = run({"validate", "--config", nonnormal.string(), "--out", (tmp.path / "o").string()});
  CHECK(r.code == 1);
  const auto out = nlohmann::json::parse(r.out);
  bool saw = false;
  for (const auto& c : out["checks"]) {
    if (c["name"] == "normality") {
      saw = true;
      CHECK(c["passed"] == false);
      CHECK(c["residual"].get<double>() == doctest::Approx(std::sqrt(32.0)));
    }
  }
  CHECK(saw);

  const auto missing = write_config(tmp.path, "missing.json", R"({"T": 1})");
  CHECK(run({"validate", "--config", missing.string(), "--out", tmp.path.string()}).code == 2);
  const auto broken = write_config(tmp.path, "broken.json", R"({"T": )");
  CHECK(run({"validate", "--config", broken.string(), "--out", tmp.path.string()}).code == 2);
  CHECK(run({"validate", "--config", (tmp.path / "nope.json").string()}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("curves: domain flags, symmetry, zero at the mean, round trip") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "c.json", kMagnetic);
  const Run r = run({"curves", "--config", cfg.string(), "--out", tmp.path.string()});
  REQUIRE(r.code == 0);

  const Spectrum sp = spectral_decompose(magnetic_example(std::numbers::pi / 4), false);
  const CramerDomain dom = cramer_domain(sp);
  const Csv c = read_csv(tmp.path / "cramer.csv");
  CHECK(c.header == std::vector<std::string>{"lambda", "Lambda", "Lambda_prime", "in_domain"});
  REQUIRE(c.rows.size() == 201);
  for (const auto& row : c.rows) {
    const double l = parse_double(row[0]);
    const double v = parse_double(row[1]);
    CHECK((row[3] == "true") == (l >= dom.a && l <= dom.b));
    if (row[3] == "false") CHECK(row[1] == "inf");
    CHECK(v == cramer(l, sp));
  }
  // The default grid is symmetric about -1/2: row i pairs with row 200 - i.
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const double a = parse_double(c.rows[i][1]);
    const double b = parse_double(c.rows[200 - i][1]);
    if (std::isfinite(a) && std::isfinite(b)) CHECK(std::abs(a - b) <= 1e-12);
  }

  const Csv rt = read_csv(tmp.path / "rate.csv");
  CHECK(rt.header == std::vector<std::string>{"x", "I", "ell0", "residual"});
  CHECK(rt.fingerprint == c.fingerprint);
  // 61 points on [-3 m, 3 m] put the mean at index 40.
  CHECK(std::abs(parse_double(rt.rows[40][1])) <= 1e-12);
  for (const auto& row : rt.rows) CHECK(parse_double(row[1]) == rate(parse_double(row[0]), sp).I);
}

TEST_CASE("identical configs produce identical files; jobs does not matter") {
  TempDir tmp;
  const auto cfg = write_config(
      tmp.path, "s.json",
      R"({"system": {"example": "magnetic"}, "mc": {"T": 1, "dt": 0.01, "n_traj": 50, "seed": 4, "lambdas": [0.05], "thresholds": [2.2]}})");
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (tmp.path / "a").string(), "--jobs", "1"}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (tmp.path / "b").string(), "--jobs", "3"}).code == 0);
  for (const char* f : {"epr_samples.csv", "simulate_summary.json"}) {
    CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
  }
  REQUIRE(run({"simulate", "--config", cfg.string(), "--out", (tmp.path / "c").string(), "--seed", "5"}).code == 0);
  CHECK(slurp(tmp.path / "a" / "epr_samples.csv") != slurp(tmp.path / "c" / "epr_samples.csv"));
  const Csv s = read_csv(tmp.path / "a" / "epr_samples.csv");
  CHECK(s.rows.size() == 50);
}

TEST_CASE("spectrum: top gamma matches the Nystrom column") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "s.json",
                                R"({"system": {"example": "magnetic"}, "T": 1, "spectral": {"nystrom_nodes": 400}})");
  REQUIRE(run({"spectrum", "--config", cfg.string(), "--out", tmp.path.string()}).code == 0);
  const Csv s = read_csv(tmp.path / "spectrum.csv");
  CHECK(s.header == std::vector<std::string>{"k", "j", "omega", "gamma"});
  const Csv n = read_csv(tmp.path / "nystrom.csv");
  const double top = parse_double(s.rows[0][3]);
  CHECK(std::abs(parse_double(n.rows[0][2]) - top) <= 1e-4 * top);
  CHECK(parse_double(n.rows[0][3]) == top);
}

TEST_CASE("mgf: theta beyond 1/gamma_1 gives inf; json output parses back") {
  TempDir tmp;
  const auto cfg = write_config(
      tmp.path, "m.json",
      R"({"system": {"example": "magnetic"}, "T": 1, "mgf": {"thetas": [-0.5, 0.0, 1.1, 10.0], "horizons": [5, 50]},
          "output": {"format": "json"}})");
  REQUIRE(run({"mgf", "--config", cfg.string(), "--out", tmp.path.string()}).code == 0);
  const auto doc = nlohmann::json::parse(slurp(tmp.path / "mgf.json"));
  const auto& rows = doc["rows"];
  REQUIRE(rows.size() == 4);
  CHECK(rows[1]["mgf"].get<double>() == 1.0);
  CHECK(rows[2]["mgf"] == "inf");  // gamma_1 = 0.9527 at T = 1
  CHECK(rows[3]["log_mgf"] == "inf");
  CHECK(rows[0]["mgf"].get<double>() < 1.0);
  const auto ft = nlohmann::json::parse(slurp(tmp.path / "finite_T.json"));
  CHECK(ft["rows"][1]["divergent"] == false);
  CHECK(std::abs(ft["rows"][1]["Lambda_T"].get<double>() - 0.177957) < 0.01);
}

TEST_CASE("i/o failures exit 3; config path precedence") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "c.json", kMagnetic);
  const auto blocker = write_config(tmp.path, "file", "x");
  CHECK(run({"curves", "--config", cfg.string(), "--out", (blocker / "sub").string()}).code == 3);

  const auto with_path = write_config(
      tmp.path, "p.json",
      std::string(R"({"system": {"example": "magnetic"}, "output": {"path": ")") + (tmp.path / "from_cfg").string() +
          R"("}})");
  REQUIRE(run({"curves", "--config", with_path.string()}).code == 0);
  CHECK(fs::exists(tmp.path / "from_cfg" / "cramer.csv"));
}

TEST_CASE("commands refuse systems that fail validation") {
  TempDir tmp;
  const auto nn = write_config(tmp.path, "nn.json", R"({"system": {"matrix_A": [[-1, 2], [0, -1]]}})");
  const Run r = run({"curves", "--config", nn.string(), "--out", tmp.path.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("normality") != std::string::npos);
  const auto rev = write_config(tmp.path, "rev.json", R"({"system": {"matrix_A": [[-1, 0], [0, -2]]}})");
  CHECK(run({"curves", "--config", rev.string(), "--out", tmp.path.string()}).code == 1);
}

TEST_CASE("verify runs a subset and records the results") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, "v.json", R"({"verify": {"checks": [1, 2, 4]}})");
  const Run r = run({"verify", "--config", cfg.string(), "--out", tmp.path.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS") != std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(tmp.path / "verify.json"));
  CHECK(doc["all_passed"] == true);
  CHECK(doc["checks"].size() == 3);
  CHECK(doc["scale"] == "reduced");
}
