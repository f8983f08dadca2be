#include "eprld/spectral.hpp"

#include "eprld/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>

namespace eprld {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = std::numbers::pi;

double pole_free(double alpha, double T, double omega) {
  return omega * std::cos(omega * T) - alpha * std::sin(omega * T);
}

double pole_free_derivative(double alpha, double T, double omega) {
  const double c = std::cos(omega * T);
  const double s = std::sin(omega * T);
  return c - omega * T * s - alpha * T * c;
}

// Sum_{j > J} 1/(j - 1/2)^2 and Sum_{j > J} 1/(j - 1/2)^4 via the
// asymptotic series of the polygamma functions at x = J + 1/2.
double inv_sq_tail(double x) {
  const double x2 = x * x;
  return 1.0 / x + 1.0 / (2.0 * x2) + 1.0 / (6.0 * x2 * x) - 1.0 / (30.0 * x2 * x2 * x);
}

double inv_quartic_tail(double x) {
  const double x3 = x * x * x;
  return 1.0 / (3.0 * x3) + 1.0 / (2.0 * x3 * x) + 1.0 / (2.0 * x3 * x * x);
}

constexpr int kTailWindow = 2000;

}  // namespace

std::pair<double, double> OmegaRoots::bracket(int j, double T) {
  return {(2.0 * j - 1.0) * kPi / (2.0 * T), (2.0 * j + 1.0) * kPi / (2.0 * T)};
}

double omega_residual(double alpha, double T, double omega) {
  return std::abs(pole_free(alpha, T, omega)) / std::hypot(alpha, omega);
}

double omega_root(double alpha, double T, int j) {
  if (!(alpha < 0.0)) throw DomainError("omega_root: alpha must be negative");
  if (!(T > 0.0)) throw DomainError("omega_root: T must be positive");
  if (j < 1) throw DomainError("omega_root: j must be >= 1");

  const auto [left, right] = OmegaRoots::bracket(j, T);
  const double inset = 1e-12 * (right - left);
  double lo = left + inset;
  double hi = right - inset;
  double g_lo = pole_free(alpha, T, lo);
  const double g_hi = pole_free(alpha, T, hi);
  if (!(g_lo * g_hi < 0.0)) {
    throw NumericError("omega_root: no sign change on bracket j=" + std::to_string(j));
  }

  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-14 * std::max(1.0, mid) || mid <= lo || mid >= hi) break;
    const double g_mid = pole_free(alpha, T, mid);
    if (g_mid == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }

  double omega = 0.5 * (lo + hi);
  for (int step = 0; step < 3; ++step) {
    const double g = pole_free(alpha, T, omega);
    const double dg = pole_free_derivative(alpha, T, omega);
    if (dg == 0.0) break;
    const double next = omega - g / dg;
    if (!(next > left && next < right)) break;
    if (std::abs(pole_free(alpha, T, next)) > std::abs(g)) break;
    omega = next;
  }
  return omega;
}

OmegaRoots omega_roots(double alpha, double T, int j_max) {
  if (j_max < 1) throw DomainError("omega_roots: j_max must be >= 1");
  OmegaRoots out;
  out.alpha = alpha;
  out.T = T;
  out.roots.reserve(static_cast<std::size_t>(j_max));
  for (int j = 1; j <= j_max; ++j) out.roots.push_back(omega_root(alpha, T, j));
  return out;
}

double omega_asymptotic(double alpha, double T, int j) {
  // omega T = mu + delta with tan(delta) = c / (mu + delta).
  const double mu = (j - 0.5) * kPi;
  const double c = std::abs(alpha) * T;
  return (mu + c / mu - (c * c + c * c * c / 3.0) / (mu * mu * mu)) / T;
}

KernelSpectrum kernel_spectrum(const Spectrum& spectrum, double T, int j_max) {
  if (!(T > 0.0)) throw DomainError("kernel_spectrum: T must be positive");
  if (j_max < 1) throw DomainError("kernel_spectrum: j_max must be >= 1");
  KernelSpectrum ks;
  ks.T = T;
  ks.j_max = j_max;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const auto [alpha, beta] = spectrum.pairs[k];
    if (beta == 0.0) continue;
    const OmegaRoots roots = omega_roots(alpha, T, j_max);
    for (int j = 1; j <= j_max; ++j) {
      const double omega = roots.roots[static_cast<std::size_t>(j - 1)];
      KernelEntry e;
      e.channel = k;
      e.j = j;
      e.omega = omega;
      e.gamma = 8.0 * beta * beta / (alpha * alpha + omega * omega);
      e.phase = std::atan2(omega, -alpha);
      ks.entries.push_back(e);
      if (j == 1) ks.gamma_max = std::max(ks.gamma_max, e.gamma);
    }
  }
  return ks;
}

std::vector<double> KernelSpectrum::sorted_gammas() const {
  std::vector<double> g;
  g.reserve(entries.size());
  for (const auto& e : entries) g.push_back(e.gamma);
  std::sort(g.begin(), g.end(), std::greater<>());
  return g;
}

double eigenfunction_norm_sq(double omega, double phase, double T) {
  if (!(omega > 0.0)) throw DomainError("eigenfunction_norm_sq: omega must be positive");
  return 0.5 * (T - (std::sin(2.0 * (omega * T + phase)) - std::sin(2.0 * phase)) / (2.0 * omega));
}

ChannelTail channel_tail(double alpha, double beta, double T, int j_max, double theta) {
  ChannelTail tail;
  if (beta == 0.0) return tail;
  const double c = std::abs(alpha) * T;
  for (int j = j_max + 1; j <= j_max + kTailWindow; ++j) {
    const double mu = (j - 0.5) * kPi;
    const double omega = (c / mu > 0.05) ? omega_root(alpha, T, j) : omega_asymptotic(alpha, T, j);
    const double gamma = 8.0 * beta * beta / (alpha * alpha + omega * omega);
    tail.gamma_sum += gamma;
    tail.neg_log_sum += -std::log1p(-theta * gamma);
  }
  // gamma_j ~ G / mu^2 - G (alpha^2 T^2 + 2c) / mu^4 with G = 8 beta^2 T^2.
  const double x = j_max + kTailWindow + 0.5;
  const double G = 8.0 * beta * beta * T * T;
  const double s2 = inv_sq_tail(x) / (kPi * kPi);
  const double s4 = inv_quartic_tail(x) / (kPi * kPi * kPi * kPi);
  const double far_gamma = G * s2 - G * (alpha * alpha * T * T + 2.0 * c) * s4;
  tail.gamma_sum += far_gamma;
  tail.neg_log_sum += theta * far_gamma + 0.5 * theta * theta * G * G * s4;
  return tail;
}

double spectrum_trace_estimate(const Spectrum& spectrum, const KernelSpectrum& ks) {
  double sum = 0.0;
  for (const auto& e : ks.entries) sum += e.gamma;
  for (const auto& p : spectrum.pairs) {
    sum += channel_tail(p.alpha, p.beta, ks.T, ks.j_max).gamma_sum;
  }
  return sum;
}

KernelEvaluator::KernelEvaluator(const SystemSpec& spec, double lambda, double T)
    : KernelEvaluator(spectral_decompose(spec, true), lambda, T) {}

KernelEvaluator::KernelEvaluator(Spectrum spectrum, double lambda, double T)
    : spectrum_(std::move(spectrum)), lambda_(lambda), T_(T), dim_(0) {
  if (!spectrum_.has_vectors()) {
    throw DomainError("KernelEvaluator: spectrum must carry channel vectors");
  }
  if (!(T > 0.0)) throw DomainError("KernelEvaluator: T must be positive");
  dim_ = spectrum_.channel_vectors.front().size();
  projectors_.reserve(spectrum_.size());
  for (const auto& u : spectrum_.channel_vectors) projectors_.push_back(u * u.adjoint());
}

Matrix KernelEvaluator::operator()(double u1, double u2) const {
  if (!(u1 >= 0.0 && u1 <= T_ && u2 >= 0.0 && u2 <= T_)) {
    throw DomainError("kernel_eval: arguments must lie in [0, T]");
  }
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (std::size_t k = 0; k < spectrum_.size(); ++k) {
    const auto [alpha, beta] = spectrum_.pairs[k];
    if (beta == 0.0) continue;
    // e^{-conj(d) u1 - d u2} (e^{2 alpha max(u1,u2)} - e^{2 alpha T}), d = alpha + i(1+2 lambda) beta,
    // regrouped so every exponent is nonpositive.
    const double magnitude =
        std::exp(alpha * std::abs(u1 - u2)) - std::exp(alpha * (2.0 * T_ - u1 - u2));
    const double angle = (1.0 + 2.0 * lambda_) * beta * (u1 - u2);
    const Complex h = (-4.0 * beta * beta / alpha) * magnitude * std::polar(1.0, angle);
    acc += h * projectors_[k];
  }
  return acc.real();
}

Matrix kernel_eval(const SystemSpec& spec, double lambda, double T, double u1, double u2) {
  return KernelEvaluator(spec, lambda, T)(u1, u2);
}

std::vector<double> nystrom_spectrum(const SystemSpec& spec, double lambda, double T, int n_nodes,
                                     QuadratureRule rule) {
  if (n_nodes < 8) throw DomainError("nystrom_spectrum: n_nodes must be >= 8");
  const KernelEvaluator kernel(spec, lambda, T);
  const QuadratureNodes q = make_rule(rule, n_nodes, 0.0, T);
  const Eigen::Index d = kernel.dim();
  const Eigen::Index n = n_nodes;
  Matrix big(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ti = q.nodes[static_cast<std::size_t>(i)];
    const double wi = q.weights[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double tj = q.nodes[static_cast<std::size_t>(j)];
      const double wj = q.weights[static_cast<std::size_t>(j)];
      const Matrix block = std::sqrt(wi * wj) * kernel(ti, tj);
      big.block(i * d, j * d, d, d) = block;
      big.block(j * d, i * d, d, d) = block.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(big, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericError("nystrom_spectrum: eigensolver failed");
  }
  std::vector<double> eig(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

double trace_closed_form(const SystemSpec& spec, double T) {
  require_well_formed(spec);
  const Matrix M = spec.A + spec.A.transpose();
  const Matrix N = spec.A - spec.A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  const Vector m = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  Vector f1(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) f1(i) = std::expm1(m(i) * T) / (m(i) * m(i));
  const Matrix F1 = V * f1.asDiagonal() * V.transpose();
  const Matrix F2 = V * m.cwiseInverse().asDiagonal() * V.transpose();
  return 2.0 * ((N.transpose() * F1 * N).trace() - T * (N.transpose() * F2 * N).trace());
}

}  // namespace eprld
