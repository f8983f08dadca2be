#include "eprld/chaos.hpp"

#include "eprld/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace eprld {

namespace {

using Complex = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

Spectrum reduced_spectrum(const SystemSpec& spec) {
  return spectral_decompose(reduce_to_identity_noise(spec), true);
}

void check_state(const Vector& x, const SystemSpec& spec) {
  if (x.size() != spec.dim()) {
    throw DimensionError("initial state has dimension " + std::to_string(x.size()) + ", expected " +
                         std::to_string(spec.dim()));
  }
  if (!x.allFinite()) throw DataError("initial state has non-finite entries");
}

// int_0^T (e^{2 alpha T - alpha u} - e^{alpha u}) sin(omega u + phase) du, up to sign.
double projection_integral(double alpha, double omega, double phase, double T) {
  return (-2.0 * std::cos(phase) * std::sin(omega * T + phase) * std::exp(alpha * T) +
          std::sin(2.0 * phase)) /
         std::hypot(alpha, omega);
}

// Per-channel data needed by the first-chaos sums. Everything is per unit |<x, U_k>|^2.
struct ChannelChaos {
  std::vector<double> weights;  // |c_kj|^2 / |y_k|^2
  std::vector<double> gammas;
  double mass = 0.0;            // ||G_k||^2 / |y_k|^2
  double first_tail_gamma = 0.0;
};

double channel_mass(double alpha, double beta, double T) {
  const double b4 = beta * beta * beta * beta;
  return 16.0 * b4 / (alpha * alpha) *
         (std::expm1(4.0 * alpha * T) / (2.0 * alpha) - 2.0 * T * std::exp(2.0 * alpha * T));
}

std::vector<ChannelChaos> channel_chaos(const Spectrum& sp, const KernelSpectrum& ks) {
  std::vector<ChannelChaos> out(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k) {
    const auto [alpha, beta] = sp.pairs[k];
    if (beta == 0.0) continue;
    out[k].mass = channel_mass(alpha, beta, ks.T);
    const double omega = omega_asymptotic(alpha, ks.T, ks.j_max + 1);
    out[k].first_tail_gamma = 8.0 * beta * beta / (alpha * alpha + omega * omega);
  }
  for (const auto& e : ks.entries) {
    const auto [alpha, beta] = sp.pairs[e.channel];
    const double J = projection_integral(alpha, e.omega, e.phase, ks.T);
    const double pref = 4.0 * beta * beta / alpha;
    out[e.channel].weights.push_back(pref * pref * J * J / eigenfunction_norm_sq(e.omega, e.phase, ks.T));
    out[e.channel].gammas.push_back(e.gamma);
  }
  return out;
}

// sum_j w_j / (1 - theta gamma_j), with the mass beyond j_max taken from the closed-form norm.
double resolvent_sum(const ChannelChaos& c, double theta) {
  double sum = 0.0;
  double captured = 0.0;
  for (std::size_t j = 0; j < c.weights.size(); ++j) {
    sum += c.weights[j] / (1.0 - theta * c.gammas[j]);
    captured += c.weights[j];
  }
  const double rest = std::max(0.0, c.mass - captured);
  return sum + rest / (1.0 - theta * c.first_tail_gamma);
}

double s0_quadratic_coeff(double alpha, double beta, double T) {
  return 2.0 * beta * beta / alpha * std::expm1(2.0 * alpha * T);
}

double s0_trace_part(const Spectrum& sp, double T) {
  double sum = 0.0;
  for (const auto& p : sp.pairs) {
    if (p.beta == 0.0) continue;
    const double b2 = p.beta * p.beta;
    sum += b2 * std::expm1(2.0 * p.alpha * T) / (p.alpha * p.alpha) - 2.0 * T * b2 / p.alpha;
  }
  return sum;
}

std::vector<double> channel_weights_sq(const Vector& x, const Spectrum& sp) {
  std::vector<double> y2(sp.size());
  for (std::size_t k = 0; k < sp.size(); ++k) y2[k] = std::norm(sp.channel_vectors[k].dot(x.cast<Complex>()));
  return y2;
}

}  // namespace

double s0(const Vector& x, const SystemSpec& spec, double T) {
  check_state(x, spec);
  if (!(T > 0.0)) throw DomainError("s0: T must be positive");
  const Spectrum sp = reduced_spectrum(spec);
  const std::vector<double> y2 = channel_weights_sq(x, sp);
  double quad = 0.0;
  for (std::size_t k = 0; k < sp.size(); ++k) {
    if (sp.pairs[k].beta == 0.0) continue;
    quad += s0_quadratic_coeff(sp.pairs[k].alpha, sp.pairs[k].beta, T) * y2[k];
  }
  return quad + s0_trace_part(sp, T);
}

std::vector<double> g_coefficients(const Vector& x, const SystemSpec& spec, double /*lambda*/, double T,
                                   int j_max) {
  check_state(x, spec);
  const Spectrum sp = reduced_spectrum(spec);
  const KernelSpectrum ks = kernel_spectrum(sp, T, j_max);
  std::vector<double> g;
  g.reserve(ks.entries.size());
  for (const auto& e : ks.entries) {
    const auto [alpha, beta] = sp.pairs[e.channel];
    // Eigen's dot conjugates its left argument: U^* x = <x, U>.
    const Complex y = sp.channel_vectors[e.channel].dot(x.cast<Complex>());
    const double J = projection_integral(alpha, e.omega, e.phase, T);
    const Complex c = (-4.0 * beta * beta / alpha) * y * J / std::sqrt(eigenfunction_norm_sq(e.omega, e.phase, T));
    g.push_back(beta > 0.0 ? std::numbers::sqrt2 * c.real() : -std::numbers::sqrt2 * c.imag());
  }
  return g;
}

double g_norm_sq(const Vector& x, const SystemSpec& spec, double T) {
  check_state(x, spec);
  const Spectrum sp = reduced_spectrum(spec);
  const std::vector<double> y2 = channel_weights_sq(x, sp);
  double sum = 0.0;
  for (std::size_t k = 0; k < sp.size(); ++k) {
    if (sp.pairs[k].beta == 0.0) continue;
    sum += channel_mass(sp.pairs[k].alpha, sp.pairs[k].beta, T) * y2[k];
  }
  return sum;
}

ChaosTerms chaos_terms(const Vector& x, const SystemSpec& spec, double lambda, double T, int j_max) {
  ChaosTerms t;
  t.s0 = s0(x, spec, T);
  t.g_coeffs = g_coefficients(x, spec, lambda, T, j_max);
  t.spectrum = kernel_spectrum(reduced_spectrum(spec), T, j_max);
  t.x = x;
  t.lambda = lambda;
  t.T = T;
  return t;
}

double fredholm_log_det(const Spectrum& spectrum, const KernelSpectrum& ks, double theta) {
  if (ks.gamma_max > 0.0 && theta * ks.gamma_max >= 1.0) return -kInf;
  double sum = 0.0;
  for (const auto& e : ks.entries) sum += std::log1p(-theta * e.gamma);
  for (const auto& p : spectrum.pairs) {
    sum -= channel_tail(p.alpha, p.beta, ks.T, ks.j_max, theta).neg_log_sum;
  }
  return sum;
}

double conditional_log_mgf(const MgfQuery& q, const SystemSpec& spec) {
  check_state(q.x, spec);
  if (!(q.T > 0.0)) throw DomainError("conditional_mgf: T must be positive");
  if (q.j_max < 1) throw DomainError("conditional_mgf: j_max must be >= 1");
  if (q.theta == 0.0) return 0.0;
  const SystemSpec reduced = reduce_to_identity_noise(spec);
  const Spectrum sp = spectral_decompose(reduced, true);
  const KernelSpectrum ks = kernel_spectrum(sp, q.T, q.j_max);
  if (ks.gamma_max > 0.0 && q.theta * ks.gamma_max >= 1.0) return kInf;

  const double log_det = fredholm_log_det(sp, ks, q.theta);
  const std::vector<ChannelChaos> cc = channel_chaos(sp, ks);
  const std::vector<double> y2 = channel_weights_sq(q.x, sp);
  double g_term = 0.0;
  for (std::size_t k = 0; k < sp.size(); ++k) {
    if (sp.pairs[k].beta == 0.0) continue;
    g_term += y2[k] * resolvent_sum(cc[k], q.theta);
  }
  const double trace = trace_closed_form(reduced, q.T);
  return -0.5 * log_det + q.theta * s0(q.x, spec, q.T) - 0.5 * q.theta * trace +
         0.5 * q.theta * q.theta * g_term;
}

double conditional_mgf(const MgfQuery& q, const SystemSpec& spec) {
  return std::exp(conditional_log_mgf(q, spec));
}

FiniteTCramer cramer_finite_T_terms(double lambda, const SystemSpec& spec, double T, int j_max) {
  if (!(T > 0.0)) throw DomainError("cramer_finite_T: T must be positive");
  FiniteTCramer out;
  const double theta = 0.5 * lambda * (1.0 + lambda);
  if (theta == 0.0) return out;

  const SystemSpec reduced = reduce_to_identity_noise(spec);
  const Spectrum sp = spectral_decompose(reduced, true);
  const KernelSpectrum ks = kernel_spectrum(sp, T, j_max);
  if (ks.gamma_max > 0.0 && theta * ks.gamma_max >= 1.0) {
    out.value = kInf;
    out.divergent = true;
    out.reason = "theta >= 1/gamma_1";
    return out;
  }

  out.I1 = theta / T * (s0_trace_part(sp, T) - 0.5 * trace_closed_form(reduced, T));
  out.I3 = -0.5 / T * fredholm_log_det(sp, ks, theta);

  const std::vector<ChannelChaos> cc = channel_chaos(sp, ks);
  for (std::size_t k = 0; k < sp.size(); ++k) {
    const auto [alpha, beta] = sp.pairs[k];
    if (beta == 0.0) continue;
    const double qk = theta * s0_quadratic_coeff(alpha, beta, T) + 0.5 * theta * theta * resolvent_sum(cc[k], theta);
    if (qk >= std::abs(alpha)) {
      out.value = kInf;
      out.divergent = true;
      out.reason = "stationary average not integrable";
      return out;
    }
    out.I2 += -0.5 * std::log1p(-qk / std::abs(alpha)) / T;
  }
  out.value = out.I1 + out.I2 + out.I3;
  return out;
}

double cramer_finite_T(double lambda, const SystemSpec& spec, double T, int j_max) {
  return cramer_finite_T_terms(lambda, spec, T, j_max).value;
}

double divergence_horizon(double lambda, const Spectrum& spectrum) {
  const double theta = 0.5 * lambda * (1.0 + lambda);
  if (!(theta > 0.0)) return kInf;
  // theta * gamma_1(T) increases in T towards theta * 8 beta^2 / alpha^2.
  auto diverges = [&](double T) {
    for (const auto& p : spectrum.pairs) {
      if (p.beta == 0.0) continue;
      const double w = omega_root(p.alpha, T, 1);
      if (theta * 8.0 * p.beta * p.beta >= p.alpha * p.alpha + w * w) return true;
    }
    return false;
  };
  bool possible = false;
  for (const auto& p : spectrum.pairs) {
    if (p.beta != 0.0 && theta * 8.0 * p.beta * p.beta > p.alpha * p.alpha) possible = true;
  }
  if (!possible) return kInf;

  double lo = 1e-6;
  double hi = 1.0;
  while (!diverges(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) return kInf;
  }
  while (hi - lo > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (diverges(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace eprld
