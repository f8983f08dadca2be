#pragma once

// Spectrum of the second-chaos kernel operator K_{lambda,T}.
//
// On the channel spanned by the eigenvector U_k of A (eigenvalue
// alpha_k + i beta_k, beta_k != 0) the eigenvalues of K are
//
//     gamma_j = 8 beta_k^2 / (alpha_k^2 + omega_j^2),
//
// where omega_j is the unique root of omega / alpha_k = tan(omega T) in
// ((2j-1) pi / 2T, (2j+1) pi / 2T). Eigenfunctions are
// exp(i (1 + 2 lambda) beta_k u) sin(omega_j u + phase_j) U_k with
// exp(i phase_j) = (-alpha_k + i omega_j) / sqrt(alpha_k^2 + omega_j^2).
// Nothing here depends on lambda; the Nystrom discretization is kept as an
// independent numerical check of that fact.

#include "eprld/model.hpp"
#include "eprld/quadrature.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace eprld {

inline constexpr int kDefaultJMax = 200;

struct OmegaRoots {
  std::size_t channel = 0;
  double alpha = 0.0;
  double T = 0.0;
  std::vector<double> roots;  // roots[j-1] = omega_j

  /// Open bracket ((2j-1) pi / 2T, (2j+1) pi / 2T) containing omega_j.
  [[nodiscard]] static std::pair<double, double> bracket(int j, double T);
};

struct KernelEntry {
  std::size_t channel = 0;
  int j = 0;
  double omega = 0.0;
  double gamma = 0.0;
  double phase = 0.0;  // in [0, pi/2)
};

struct KernelSpectrum {
  std::vector<KernelEntry> entries;
  double gamma_max = 0.0;
  double T = 0.0;
  int j_max = 0;

  /// All gammas sorted in descending order.
  [[nodiscard]] std::vector<double> sorted_gammas() const;
};

/// Pole-free residual |omega cos(omega T) - alpha sin(omega T)| / sqrt(alpha^2 + omega^2).
double omega_residual(double alpha, double T, double omega);

/// j-th root of omega / alpha = tan(omega T); bisection on the pole-free
/// form followed by Newton polish.
double omega_root(double alpha, double T, int j);

OmegaRoots omega_roots(double alpha, double T, int j_max);

/// Three-term large-j expansion of omega_j, used for the analytic tails.
double omega_asymptotic(double alpha, double T, int j);

KernelSpectrum kernel_spectrum(const Spectrum& spectrum, double T, int j_max = kDefaultJMax);

/// int_0^T sin^2(omega u + phase) du.
double eigenfunction_norm_sq(double omega, double phase, double T);

/// Tail sums over j > j_max for one channel: sum of gamma_j and of
/// -log(1 - theta gamma_j). Exact-shape expansion of the roots for a
/// window of indices, then the trigamma asymptotics beyond it.
struct ChannelTail {
  double gamma_sum = 0.0;
  double neg_log_sum = 0.0;
};
ChannelTail channel_tail(double alpha, double beta, double T, int j_max, double theta = 0.0);

/// Sum over all entries of the spectrum plus the analytic tail of every channel.
double spectrum_trace_estimate(const Spectrum& spectrum, const KernelSpectrum& ks);

/// Evaluates the real d x d kernel H_{lambda,T}(u1, u2) through the channel
/// decomposition of A.
class KernelEvaluator {
 public:
  KernelEvaluator(const SystemSpec& spec, double lambda, double T);
  KernelEvaluator(Spectrum spectrum, double lambda, double T);

  [[nodiscard]] Matrix operator()(double u1, double u2) const;
  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] double horizon() const { return T_; }

 private:
  Spectrum spectrum_;
  double lambda_;
  double T_;
  Eigen::Index dim_;
  std::vector<Eigen::MatrixXcd> projectors_;
};

Matrix kernel_eval(const SystemSpec& spec, double lambda, double T, double u1, double u2);

/// Eigenvalues (descending) of the symmetric Nystrom matrix with blocks
/// sqrt(w_i w_j) H(t_i, t_j). Requires n_nodes >= 8.
std::vector<double> nystrom_spectrum(const SystemSpec& spec, double lambda, double T, int n_nodes,
                                     QuadratureRule rule = QuadratureRule::gauss_legendre);

/// 2 [tr(N' M^-1 (e^{MT} - I) M^-1 N) - T tr(N' M^-1 N)], evaluated with
/// matrix functions of the symmetric M.
double trace_closed_form(const SystemSpec& spec, double T);

}  // namespace eprld
