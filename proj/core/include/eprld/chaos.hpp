#pragma once

// Finite-horizon statistics of int_0^T |Z_{lambda,s}|^2 ds, Z = N Y_lambda,
// where dY = D_lambda Y dt + dW. The integral splits into a constant S0,
// a first chaos with kernel G and a second chaos with kernel H, whose
// operator has the spectrum computed in spectral.hpp. Every function
// works on the identity-noise reduction of the system and so reads only A.

#include "eprld/model.hpp"
#include "eprld/spectral.hpp"

#include <vector>

namespace eprld {

struct ChaosTerms {
  double s0 = 0.0;
  std::vector<double> g_coeffs;  // aligned with spectrum.entries
  KernelSpectrum spectrum;
  Vector x;
  double lambda = 0.0;
  double T = 0.0;
};

struct MgfQuery {
  Vector x;
  double theta = 0.0;
  double lambda = 0.0;
  double T = 1.0;
  int j_max = kDefaultJMax;
};

/// |(int_0^T e^{sM} ds)^{1/2} N x|^2 + int_0^T tr[N' e^{uM} N] (T - u) du.
double s0(const Vector& x, const SystemSpec& spec, double T);

/// Real coefficients of G^x_{lambda,T} on the normalized real eigenfunctions
/// of the kernel operator, one per entry of kernel_spectrum(T, j_max).
/// With f the complex eigenfunction of an entry and c = <G, f> / ||f||, the
/// entry carries sqrt2 Re c when beta > 0 (eigenfunction sqrt2 Re f / ||f||)
/// and -sqrt2 Im c when beta < 0 (eigenfunction sqrt2 Im f / ||f||). The
/// values do not depend on lambda.
std::vector<double> g_coefficients(const Vector& x, const SystemSpec& spec, double lambda, double T,
                                   int j_max = kDefaultJMax);

/// ||G^x_{lambda,T}||^2 in L^2([0, T]; R^d), closed form.
double g_norm_sq(const Vector& x, const SystemSpec& spec, double T);

ChaosTerms chaos_terms(const Vector& x, const SystemSpec& spec, double lambda, double T,
                       int j_max = kDefaultJMax);

/// sum over all eigenvalues of log(1 - theta gamma), analytic tail included.
/// Returns -inf when theta >= 1 / gamma_1.
double fredholm_log_det(const Spectrum& spectrum, const KernelSpectrum& ks, double theta);

/// log E exp(theta int_0^T |Z_{lambda,s}|^2 ds) for Y_0 = x; +inf when theta >= 1 / gamma_1.
double conditional_log_mgf(const MgfQuery& q, const SystemSpec& spec);

/// exp of conditional_log_mgf.
double conditional_mgf(const MgfQuery& q, const SystemSpec& spec);

struct FiniteTCramer {
  double value = 0.0;  // I1 + I2 + I3, +inf when divergent
  double I1 = 0.0;
  double I2 = 0.0;
  double I3 = 0.0;
  bool divergent = false;
  /// "" when finite, otherwise "theta >= 1/gamma_1" or "stationary average not integrable".
  const char* reason = "";
};

/// (1/T) log E^mu exp(theta int_0^T |Z_{lambda,s}|^2 ds) with theta = lambda (1 + lambda) / 2.
FiniteTCramer cramer_finite_T_terms(double lambda, const SystemSpec& spec, double T,
                                    int j_max = kDefaultJMax);

double cramer_finite_T(double lambda, const SystemSpec& spec, double T, int j_max = kDefaultJMax);

/// Smallest horizon T at which theta = lambda (1 + lambda) / 2 reaches 1 / gamma_1(T),
/// to relative accuracy 1e-10. +inf when that never happens, i.e. for lambda in [a, b].
double divergence_horizon(double lambda, const Spectrum& spectrum);

}  // namespace eprld
