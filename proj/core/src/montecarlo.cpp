#include "eprld/montecarlo.hpp"

#include "eprld/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>

namespace eprld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix symmetric_function(const Matrix& S, double (*f)(double, double), double h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigensolver failed");
  Vector v = es.eigenvalues();
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = f(v(i), h);
  return es.eigenvectors() * v.asDiagonal() * es.eigenvectors().transpose();
}

double expm1_over(double m, double h) { return std::expm1(m * h) / m; }
double sqrt_of(double m, double /*h*/) { return std::sqrt(std::max(m, 0.0)); }
double inv_sqrt_of(double m, double /*h*/) { return 1.0 / std::sqrt(m); }

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix cholesky_factor(const Matrix& cov, const char* what) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericError(std::string(what) + ": covariance not positive definite");
  return llt.matrixL();
}

struct StepGrid {
  std::size_t n = 0;
  double h = 0.0;
};

StepGrid make_grid(double T, double dt) {
  if (!(T > 0.0)) throw DomainError("simulation horizon T must be positive");
  if (!(dt > 0.0) || dt > T) throw DomainError("step dt must lie in (0, T]");
  const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  return {n, T / static_cast<double>(n)};
}

void check_config(const SimConfig& c, const SystemSpec& spec) {
  if (c.n_traj < 1) throw DomainError("n_traj must be >= 1");
  if (c.start && c.start->size() != spec.dim()) throw DimensionError("start state has the wrong dimension");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "exact_ou" || name == "exact") return Scheme::exact_ou;
  if (name == "euler_maruyama" || name == "euler") return Scheme::euler_maruyama;
  throw ConfigError("unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::exact_ou ? "exact_ou" : "euler_maruyama";
}

double default_dt(const SystemSpec& spec) {
  Eigen::JacobiSVD<Matrix> svd(spec.A);
  const double norm = svd.singularValues()(0);
  return 1e-3 * std::min(1.0, norm > 0.0 ? 1.0 / norm : 1.0);
}

std::string fingerprint(const SimConfig& config) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "T=%.17g;dt=%.17g;n=%zu;seed=%llu;scheme=%s;", config.T, config.dt,
                config.n_traj, static_cast<unsigned long long>(config.seed), to_string(config.scheme).c_str());
  std::string text = buf;
  if (config.start) {
    text += "start=";
    for (Eigen::Index i = 0; i < config.start->size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,", (*config.start)(i));
      text += buf;
    }
  } else {
    text += "start=stationary";
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

TiltedSystem TiltedSystem::make(const SystemSpec& spec, double lambda) {
  require_well_formed(spec);
  return {lambda, spec.A + lambda * (spec.A - spec.A.transpose())};
}

ExactStepper::ExactStepper(const SystemSpec& spec, const TiltedSystem& tilted, double h) {
  if (!(h > 0.0)) throw DomainError("step size must be positive");
  const Matrix N = spec.A - spec.A.transpose();
  const Matrix expected = spec.A + tilted.lambda * N;
  if ((tilted.D - expected).norm() > 1e-12 * std::max(1.0, expected.norm())) {
    throw DomainError("tilted drift does not match A + lambda N");
  }
  const Spectrum sp = spectral_decompose(spec, true);
  const Eigen::Index d = spec.dim();
  Eigen::MatrixXcd prop = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t k = 0; k < sp.size(); ++k) {
    const auto [alpha, beta] = sp.pairs[k];
    const std::complex<double> e = std::exp(std::complex<double>(alpha, (1.0 + 2.0 * tilted.lambda) * beta) * h);
    prop += e * sp.channel_vectors[k] * sp.channel_vectors[k].adjoint();
  }
  propagator_ = prop.real();
  const Matrix M = spec.A + spec.A.transpose();
  covariance_ = symmetrize(symmetric_function(M, expm1_over, h) * spec.Q);
  chol_ = cholesky_factor(covariance_, "exact step");
  z_.resize(d);
}

void ExactStepper::step(const Vector& x, Vector& out, Engine& rng) {
  for (Eigen::Index i = 0; i < z_.size(); ++i) z_(i) = normal_(rng);
  out.noalias() = propagator_ * x;
  out.noalias() += chol_.triangularView<Eigen::Lower>() * z_;
}

Vector sample_stationary(const SystemSpec& spec, Engine& rng) {
  const DerivedMatrices dm = derived_matrices(spec);
  const Matrix root = symmetric_function(dm.Gamma, sqrt_of, 0.0);
  std::normal_distribution<double> normal;
  Vector z(spec.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  return root * z;
}

Vector ou_step_exact(const SystemSpec& spec, const TiltedSystem& tilted, const Vector& x, double h,
                     Engine& rng) {
  ExactStepper stepper(spec, tilted, h);
  Vector out(x.size());
  stepper.step(x, out, rng);
  return out;
}

double EprEnsemble::mean() const { return sample_mean(samples).value; }
double EprEnsemble::std_error() const { return sample_mean(samples).std_error; }

EprEnsemble simulate_epr(const SystemSpec& spec, const SimConfig& config) {
  const ValidationReport report = validate_system(spec);
  if (!report.usable()) throw DomainError("simulate_epr: system fails validation");
  check_config(config, spec);
  const StepGrid grid = make_grid(config.T, config.dt);

  EprEnsemble ens;
  ens.T = config.T;
  ens.config_fingerprint = fingerprint(config);
  {
    Eigen::JacobiSVD<Matrix> svd(spec.A);
    const double norm = svd.singularValues()(0);
    if (grid.h > 0.1 / norm) {
      ens.warnings.push_back("dt exceeds 0.1/||A||_2; discretization bias may dominate");
    }
  }

  const Eigen::Index d = spec.dim();
  const Matrix N = spec.A - spec.A.transpose();
  const Matrix Q_inv = spec.Q.inverse();
  const Matrix S = Q_inv * N;                        // Q^{-1} N
  const Matrix R = symmetrize(N.transpose() * S);    // N' Q^{-1} N
  const Matrix W = symmetric_function(symmetrize(spec.Q), inv_sqrt_of, 0.0) * N;  // Q^{-1/2} N
  const Matrix sqrtQ = symmetric_function(symmetrize(spec.Q), sqrt_of, 0.0);
  const DerivedMatrices dm = derived_matrices(spec);
  const Matrix gamma_root = symmetric_function(dm.Gamma, sqrt_of, 0.0);
  const TiltedSystem plain = TiltedSystem::make(spec, 0.0);
  const double h = grid.h;
  const double sqrt_h = std::sqrt(h);
  const ExactStepper prototype(spec, plain, h);

  ens.samples.assign(config.n_traj, 0.0);
  parallel_for(config.n_traj, config.jobs, [&](std::size_t i) {
    Engine rng = substream(config.seed, i);
    std::normal_distribution<double> normal;
    Vector x(d), next(d), mid(d), z(d), tmp(d), sm(d);
    if (config.start) {
      x = *config.start;
    } else {
      for (Eigen::Index r = 0; r < d; ++r) z(r) = normal(rng);
      x.noalias() = gamma_root * z;
    }
    double acc = 0.0;
    if (config.scheme == Scheme::exact_ou) {
      ExactStepper stepper = prototype;
      tmp.noalias() = R * x;
      double q_prev = x.dot(tmp);
      for (std::size_t n = 0; n < grid.n; ++n) {
        stepper.step(x, next, rng);
        mid = 0.5 * (x + next);
        // (Q^{-1} N X_mid)' (dX - A X_mid h): Stratonovich midpoint, equal to Ito here.
        tmp.noalias() = spec.A * mid;
        tmp = (next - x) - h * tmp;
        sm.noalias() = S * mid;
        acc += sm.dot(tmp);
        tmp.noalias() = R * next;
        const double q_next = next.dot(tmp);
        acc += 0.25 * h * (q_prev + q_next);
        q_prev = q_next;
        x.swap(next);
      }
    } else {
      for (std::size_t n = 0; n < grid.n; ++n) {
        for (Eigen::Index r = 0; r < d; ++r) z(r) = normal(rng);
        tmp.noalias() = W * x;
        acc += sqrt_h * tmp.dot(z) + 0.5 * h * tmp.squaredNorm();
        next = x;
        next.noalias() += h * (spec.A * x);
        next.noalias() += sqrt_h * (sqrtQ * z);
        x.swap(next);
      }
    }
    ens.samples[i] = acc / config.T;
  });
  return ens;
}

std::vector<double> simulate_z_integral(const SystemSpec& spec, double lambda, const Vector& x0,
                                        const SimConfig& config) {
  const SystemSpec reduced = reduce_to_identity_noise(spec);
  if (!validate_system(reduced).usable()) throw DomainError("simulate_z_integral: system fails validation");
  if (x0.size() != spec.dim()) throw DimensionError("start state has the wrong dimension");
  if (config.n_traj < 1) throw DomainError("n_traj must be >= 1");
  const StepGrid grid = make_grid(config.T, config.dt);
  const Matrix N = reduced.A - reduced.A.transpose();
  const TiltedSystem tilted = TiltedSystem::make(reduced, lambda);
  const ExactStepper prototype(reduced, tilted, grid.h);
  const Eigen::Index d = spec.dim();

  std::vector<double> out(config.n_traj, 0.0);
  parallel_for(config.n_traj, config.jobs, [&](std::size_t i) {
    Engine rng = substream(config.seed, i);
    ExactStepper stepper = prototype;
    Vector y = x0;
    Vector next(d), ny(d);
    ny.noalias() = N * y;
    double f_prev = ny.squaredNorm();
    double acc = 0.0;
    for (std::size_t n = 0; n < grid.n; ++n) {
      stepper.step(y, next, rng);
      ny.noalias() = N * next;
      const double f_next = ny.squaredNorm();
      acc += 0.5 * grid.h * (f_prev + f_next);
      f_prev = f_next;
      y.swap(next);
    }
    out[i] = acc;
  });
  return out;
}

Estimate sample_mean(const std::vector<double>& samples) {
  if (samples.empty()) throw DomainError("empty sample");
  const auto n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double var = samples.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), false};
}

Estimate exp_moment(const std::vector<double>& samples, double theta) {
  std::vector<double> e(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) e[i] = std::exp(theta * samples[i]);
  // For a plain mean the delete-one jackknife error equals the usual standard error.
  Estimate est = sample_mean(e);
  est.overflow = !std::isfinite(est.value);
  return est;
}

Estimate empirical_mgf(const EprEnsemble& ensemble, double lambda) {
  const auto& s = ensemble.samples;
  if (s.empty()) throw DomainError("empirical_mgf: empty ensemble");
  if (lambda == 0.0) return {0.0, 0.0, false};
  const double T = ensemble.T;
  const std::size_t n = s.size();
  std::vector<double> z(n);
  double zmax = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = lambda * T * s[i];
    zmax = std::max(zmax, z[i]);
  }
  if (!std::isfinite(zmax)) return {kInf, kInf, true};
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::exp(z[i] - zmax);
    total += w[i];
  }
  Estimate est;
  est.value = (zmax + std::log(total / static_cast<double>(n))) / T;
  if (n > 1) {
    std::vector<double> loo(n);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rest = std::max(total - w[i], std::numeric_limits<double>::min());
      loo[i] = (zmax + std::log(rest / static_cast<double>(n - 1))) / T;
      loo_mean += loo[i];
    }
    loo_mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    est.std_error = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return est;
}

TailEstimate tail_estimate(const EprEnsemble& ensemble, double x_threshold) {
  const auto& s = ensemble.samples;
  if (s.empty()) throw DomainError("tail_estimate: empty ensemble");
  TailEstimate t;
  t.upper = x_threshold >= ensemble.mean();
  const auto hits = static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](double v) {
    return t.upper ? v >= x_threshold : v <= x_threshold;
  }));
  t.probability = static_cast<double>(hits) / static_cast<double>(s.size());
  t.censored = hits == 0;
  t.log_rate = t.censored ? kInf : -std::log(t.probability) / ensemble.T;
  return t;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical_value(std::size_t n, std::size_t m, double alpha) {
  double c = 0.0;
  if (alpha == 0.1) {
    c = 1.224;
  } else if (alpha == 0.05) {
    c = 1.358;
  } else if (alpha == 0.01) {
    c = 1.628;
  } else if (alpha == 0.001) {
    c = 1.949;
  } else {
    throw DomainError("ks_critical_value: alpha must be one of 0.1, 0.05, 0.01, 0.001");
  }
  const auto nn = static_cast<double>(n);
  const auto mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace eprld
