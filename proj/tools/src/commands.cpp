#include "eprld_cli/commands.hpp"

#include "eprld/chaos.hpp"
#include "eprld/cramer.hpp"
#include "eprld/error.hpp"
#include "eprld/montecarlo.hpp"
#include "eprld/spectral.hpp"
#include "eprld/verify.hpp"
#include "eprld_cli/config.hpp"
#include "eprld_cli/output.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>

namespace eprld::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr const char* kDefaultOutDir = "eprld_out";
constexpr const char* kOutDirEnv = "EPRLD_OUT_DIR";

struct Context {
  RunConfig cfg;
  fs::path out_dir;
  std::ostream& out;
  std::ostream& err;

  void wrote(const fs::path& p) const { out << "wrote " << p.string() << "\n"; }
};

json report_json(const ValidationReport& report, const std::string& fingerprint) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"residual", json_number(c.residual)},
                      {"threshold", json_number(c.threshold)},
                      {"severity", c.severity == Severity::error ? "error" : "warning"}});
  }
  return {{"config_fingerprint", fingerprint},
          {"usable", report.usable()},
          {"all_passed", report.all_passed()},
          {"checks", std::move(checks)}};
}

// Commands past `validate` refuse systems with failing error-severity checks.
const SystemSpec& usable_system(const Context& ctx) {
  const SystemSpec& spec = ctx.cfg.require_system();
  const ValidationReport report = validate_system(spec);
  if (!report.usable()) {
    std::string failed;
    for (const auto& c : report.checks) {
      if (!c.passed && c.severity == Severity::error) failed += (failed.empty() ? "" : ", ") + c.name;
    }
    throw DomainError("system failed validation: " + failed);
  }
  return spec;
}

int cmd_validate(Context& ctx) {
  const ValidationReport report = validate_system(ctx.cfg.require_system());
  const json doc = report_json(report, ctx.cfg.fingerprint);
  ctx.out << doc.dump(2) << "\n";
  write_json(ctx.out_dir, "validate", doc);
  return report.usable() ? kOk : kFailure;
}

int cmd_curves(Context& ctx) {
  const Spectrum sp = spectral_decompose(usable_system(ctx), false);
  const CramerDomain dom = cramer_domain(sp);

  const auto lambdas = ctx.cfg.lambda_grid ? ctx.cfg.lambda_grid->points()
                                           : Grid{dom.a - 0.1, dom.b + 0.1, 201}.points();
  Table ct{"cramer", {"lambda", "Lambda", "Lambda_prime", "in_domain"}, {}};
  for (double l : lambdas) {
    const double d = (l > dom.a && l < dom.b) ? cramer_derivative(l, sp) : kNaN;
    ct.add({l, cramer(l, sp), d, dom.contains(l)});
  }
  ctx.wrote(write_table(ctx.out_dir, ct, ctx.cfg.format, ctx.cfg.fingerprint));

  const double mbar = mean_epr(sp);
  const auto xs = ctx.cfg.x_grid ? ctx.cfg.x_grid->points() : Grid{-3.0 * mbar, 3.0 * mbar, 61}.points();
  Table rt{"rate", {"x", "I", "ell0", "residual"}, {}};
  for (double x : xs) {
    const RatePoint p = rate(x, sp);
    rt.add({p.x, p.I, p.ell0, p.residual});
  }
  ctx.wrote(write_table(ctx.out_dir, rt, ctx.cfg.format, ctx.cfg.fingerprint));
  return kOk;
}

int cmd_spectrum(Context& ctx) {
  const SystemSpec& spec = usable_system(ctx);
  const Spectrum sp = spectral_decompose(spec, false);
  const double T = ctx.cfg.T;
  const KernelSpectrum ks = kernel_spectrum(sp, T, ctx.cfg.j_max);

  std::vector<KernelEntry> entries = ks.entries;
  std::stable_sort(entries.begin(), entries.end(),
                   [](const KernelEntry& a, const KernelEntry& b) { return a.gamma > b.gamma; });
  Table st{"spectrum", {"k", "j", "omega", "gamma"}, {}};
  for (std::size_t i = 0; i < entries.size(); ++i) {
    st.add({static_cast<long long>(i + 1), static_cast<long long>(entries[i].j), entries[i].omega, entries[i].gamma});
  }
  ctx.wrote(write_table(ctx.out_dir, st, ctx.cfg.format, ctx.cfg.fingerprint));

  Table nt{"nystrom", {"lambda", "rank", "nystrom", "analytic", "rel_error"}, {}};
  for (double l : ctx.cfg.spectral_lambdas) {
    const auto ny = nystrom_spectrum(spec, l, T, ctx.cfg.nystrom_nodes, ctx.cfg.rule);
    const std::size_t ranks = std::min<std::size_t>({20, ny.size(), entries.size()});
    for (std::size_t r = 0; r < ranks; ++r) {
      const double g = entries[r].gamma;
      nt.add({l, static_cast<long long>(r + 1), ny[r], g, std::abs(ny[r] - g) / g});
    }
  }
  ctx.wrote(write_table(ctx.out_dir, nt, ctx.cfg.format, ctx.cfg.fingerprint));
  return kOk;
}

int cmd_mgf(Context& ctx) {
  const SystemSpec& spec = usable_system(ctx);
  const Spectrum sp = spectral_decompose(spec, false);
  const RunConfig& cfg = ctx.cfg;

  Vector x = Vector::Unit(spec.dim(), 0);
  if (cfg.mgf_x) {
    if (cfg.mgf_x->size() != spec.dim()) throw ConfigError("mgf.x has the wrong dimension");
    x = *cfg.mgf_x;
  }
  std::vector<double> thetas;
  if (cfg.mgf_thetas) {
    thetas = *cfg.mgf_thetas;
  } else {
    const double g1 = kernel_spectrum(sp, cfg.T, cfg.j_max).gamma_max;
    thetas = {-0.5, 0.0, 0.2 / g1, 0.5 / g1, 1.5 / g1};
  }

  Table mt{"mgf", {"theta", "lambda", "T", "log_mgf", "mgf"}, {}};
  for (double l : cfg.mgf_lambdas) {
    for (double th : thetas) {
      const double lm = conditional_log_mgf({x, th, l, cfg.T, cfg.j_max}, spec);
      mt.add({th, l, cfg.T, lm, std::exp(lm)});
    }
  }
  ctx.wrote(write_table(ctx.out_dir, mt, cfg.format, cfg.fingerprint));

  const std::vector<double> horizons = cfg.finite_T_horizons.value_or(std::vector<double>{cfg.T});
  Table ft{"finite_T", {"lambda", "T", "Lambda_T", "I1", "I2", "I3", "divergent", "Lambda", "divergence_horizon"}, {}};
  for (double l : cfg.finite_T_lambdas) {
    const double lim = cramer(l, sp);
    const double tstar = divergence_horizon(l, sp);
    for (double T : horizons) {
      const FiniteTCramer f = cramer_finite_T_terms(l, spec, T, cfg.j_max);
      ft.add({l, T, f.value, f.I1, f.I2, f.I3, f.divergent, lim, tstar});
    }
  }
  ctx.wrote(write_table(ctx.out_dir, ft, cfg.format, cfg.fingerprint));
  return kOk;
}

int cmd_simulate(Context& ctx) {
  const SystemSpec& spec = usable_system(ctx);
  const Spectrum sp = spectral_decompose(spec, false);
  SimConfig sim = ctx.cfg.mc;
  if (!ctx.cfg.mc_dt_set) sim.dt = std::min(default_dt(spec), sim.T);

  const EprEnsemble ens = simulate_epr(spec, sim);
  for (const auto& w : ens.warnings) ctx.err << "warning: " << w << "\n";

  Table samples{"epr_samples", {"trajectory", "e_p"}, {}};
  for (std::size_t i = 0; i < ens.samples.size(); ++i) samples.add({static_cast<long long>(i), ens.samples[i]});
  ctx.wrote(write_table(ctx.out_dir, samples, ctx.cfg.format, ctx.cfg.fingerprint));

  const Estimate mean = sample_mean(ens.samples);
  json mgfs = json::array();
  for (double l : ctx.cfg.mc_lambdas) {
    const Estimate e = empirical_mgf(ens, l);
    mgfs.push_back({{"lambda", l},
                    {"empirical", json_number(e.value)},
                    {"std_error", json_number(e.std_error)},
                    {"overflow", e.overflow},
                    {"Lambda", json_number(cramer(l, sp))}});
  }
  json tails = json::array();
  for (double x : ctx.cfg.mc_thresholds) {
    const TailEstimate t = tail_estimate(ens, x);
    tails.push_back({{"x", x},
                     {"probability", json_number(t.probability)},
                     {"log_rate", json_number(t.log_rate)},
                     {"upper", t.upper},
                     {"censored", t.censored},
                     {"I", json_number(rate(x, sp).I)}});
  }
  const json summary = {{"config_fingerprint", ctx.cfg.fingerprint},
                        {"simulation_fingerprint", ens.config_fingerprint},
                        {"T", sim.T},
                        {"dt", sim.dt},
                        {"n_traj", sim.n_traj},
                        {"seed", sim.seed},
                        {"scheme", to_string(sim.scheme)},
                        {"mean", json_number(mean.value)},
                        {"std_error", json_number(mean.std_error)},
                        {"mean_epr", json_number(mean_epr(sp))},
                        {"warnings", ens.warnings},
                        {"mgf", std::move(mgfs)},
                        {"tails", std::move(tails)}};
  ctx.wrote(write_json(ctx.out_dir, "simulate_summary", summary));
  return kOk;
}

int cmd_verify(Context& ctx) {
  const VerifyOptions& opts = ctx.cfg.verify;
  std::vector<int> ids = ctx.cfg.verify_checks;
  if (ids.empty()) {
    for (int i = 1; i <= kAcceptanceCount; ++i) ids.push_back(i);
  }
  json checks = json::array();
  bool all = true;
  for (int id : ids) {
    const CheckResult r = run_check(id, opts);
    ctx.out << format_result(r) << "\n" << std::flush;
    all = all && r.passed;
    // Timings stay on stdout so the JSON depends only on the config.
    checks.push_back({{"id", r.id},
                      {"name", r.name},
                      {"passed", r.passed},
                      {"measured", json_number(r.measured)},
                      {"tolerance", json_number(r.tolerance)},
                      {"detail", r.detail}});
  }
  const json doc = {{"config_fingerprint", ctx.cfg.fingerprint},
                    {"scale", opts.scale == VerifyScale::full ? "full" : "reduced"},
                    {"seed", opts.seed},
                    {"all_passed", all},
                    {"checks", std::move(checks)}};
  ctx.wrote(write_json(ctx.out_dir, "verify", doc));
  return all ? kOk : kFailure;
}

fs::path resolve_out_dir(const std::string& flag, const RunConfig& cfg) {
  if (!flag.empty()) return flag;
  if (cfg.output_path) return *cfg.output_path;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutDir;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy production large deviations for linear diffusions", "eprld"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_flag;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_flag, "Output directory (default: output.path, then $EPRLD_OUT_DIR, then ./eprld_out)");
  app.add_option("--seed", seed, "Overrides mc.seed and verify.seed");
  app.add_option("--jobs", jobs, "Worker threads, 0 = all cores; never changes results");

  using Handler = int (*)(Context&);
  const std::vector<std::pair<std::string, std::pair<std::string, Handler>>> commands = {
      {"validate", {"Check the structural assumptions on (A, Q)", cmd_validate}},
      {"curves", {"Cramer function and rate function over grids", cmd_curves}},
      {"spectrum", {"Kernel operator eigenvalues and the Nystrom comparison", cmd_spectrum}},
      {"mgf", {"Conditional exponential moments and finite-horizon Cramer function", cmd_mgf}},
      {"simulate", {"Monte Carlo ensemble of the entropy production rate", cmd_simulate}},
      {"verify", {"Cross-oracle acceptance checks (reduced scale by default)", cmd_verify}},
  };
  for (const auto& [name, desc] : commands) app.add_subcommand(name, desc.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const json doc = config_path.empty() ? json::object() : read_json_file(config_path);
    Context ctx{parse_config(doc, {seed, jobs}), {}, out, err};
    ctx.out_dir = resolve_out_dir(out_flag, ctx.cfg);
    ensure_writable(ctx.out_dir);
    for (const auto& [name, desc] : commands) {
      if (app.got_subcommand(name)) return desc.second(ctx);
    }
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace eprld::cli
