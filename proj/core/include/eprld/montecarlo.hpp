#pragma once

// Monte Carlo simulation of the diffusion, the entropy production
// functional and the tilted quadratic functional, with the empirical
// statistics used as oracles for the closed forms.

#include "eprld/model.hpp"
#include "eprld/rng.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace eprld {

enum class Scheme { exact_ou, euler_maruyama };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct SimConfig {
  double T = 1.0;
  double dt = 1e-3;
  std::size_t n_traj = 10000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::exact_ou;
  std::optional<Vector> start;  // nullopt: independent stationary draw per trajectory
  unsigned jobs = 0;            // worker hint; never changes results
};

/// Default step 1e-3 min(1, 1/||A||_2).
double default_dt(const SystemSpec& spec);

/// FNV-1a digest of the result-relevant fields of a config (jobs excluded).
std::string fingerprint(const SimConfig& config);

struct TiltedSystem {
  double lambda = 0.0;
  Matrix D;  // A + lambda N

  static TiltedSystem make(const SystemSpec& spec, double lambda);
};

/// Exact Gaussian transition x -> e^{Dh} x + xi, xi ~ N(0, M^{-1}(e^{Mh} - I) Q).
class ExactStepper {
 public:
  ExactStepper(const SystemSpec& spec, const TiltedSystem& tilted, double h);

  /// Writes the next state into `out` (may not alias `x`).
  void step(const Vector& x, Vector& out, Engine& rng);

  [[nodiscard]] const Matrix& propagator() const { return propagator_; }
  [[nodiscard]] const Matrix& noise_covariance() const { return covariance_; }

 private:
  Matrix propagator_;
  Matrix covariance_;
  Matrix chol_;
  Vector z_;
  std::normal_distribution<double> normal_;
};

Vector sample_stationary(const SystemSpec& spec, Engine& rng);

Vector ou_step_exact(const SystemSpec& spec, const TiltedSystem& tilted, const Vector& x, double h,
                     Engine& rng);

struct EprEnsemble {
  std::vector<double> samples;
  double T = 0.0;
  std::string config_fingerprint;
  std::vector<std::string> warnings;

  [[nodiscard]] double mean() const;
  [[nodiscard]] double std_error() const;
};

/// e_p(T) = (1/T)[int (Q^{-1/2} N X)' dB + 1/2 int |Q^{-1/2} N X|^2 ds] per trajectory.
EprEnsemble simulate_epr(const SystemSpec& spec, const SimConfig& config);

/// int_0^T |N Y_{lambda,s}|^2 ds per trajectory, dY = D_lambda Y dt + dW, Y_0 = x.
/// Exact steps of size config.dt, trapezoid in time.
std::vector<double> simulate_z_integral(const SystemSpec& spec, double lambda, const Vector& x,
                                        const SimConfig& config);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool overflow = false;
};

/// Sample mean and its standard error.
Estimate sample_mean(const std::vector<double>& samples);

/// Mean of exp(theta s) over samples, with jackknife standard error.
Estimate exp_moment(const std::vector<double>& samples, double theta);

/// (1/T) log mean exp(lambda T e_p) via log-sum-exp, with delete-one jackknife error.
Estimate empirical_mgf(const EprEnsemble& ensemble, double lambda);

struct TailEstimate {
  double probability = 0.0;
  double log_rate = 0.0;  // -(1/T) log p
  bool upper = true;      // P(e_p >= x) when x is at or above the mean, else P(e_p <= x)
  bool censored = false;  // no sample beyond x
};

TailEstimate tail_estimate(const EprEnsemble& ensemble, double x_threshold);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value c(alpha) sqrt((n + m) / (n m)); alpha in {0.1, 0.05, 0.01, 0.001}.
double ks_critical_value(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace eprld
