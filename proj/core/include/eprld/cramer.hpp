#pragma once

// Asymptotic Cramer function of the entropy production rate and its
// Legendre dual, the rate function.

#include "eprld/model.hpp"

#include <vector>

namespace eprld {

struct CramerDomain {
  double m = 0.0;  // min over beta_k != 0 of alpha_k^2 / beta_k^2
  double a = 0.0;
  double b = 0.0;

  [[nodiscard]] bool contains(double lambda) const { return lambda >= a && lambda <= b; }
};

/// Throws ReversibilityError when every beta_k vanishes.
CramerDomain cramer_domain(const Spectrum& spectrum);

/// Lambda(lambda); +infinity outside [a, b].
double cramer(double lambda, const Spectrum& spectrum);

/// Lambda'(lambda) on the open interval (a, b); DomainError elsewhere.
double cramer_derivative(double lambda, const Spectrum& spectrum);

struct CramerCurve {
  std::vector<double> lambda_grid;
  std::vector<double> values;      // +inf outside the domain
  std::vector<double> derivative;  // NaN where undefined (outside or on the boundary)
};

CramerCurve cramer_curve(const Spectrum& spectrum, const std::vector<double>& lambda_grid);

enum class Branch { positive, negative };

/// F(ell) = 1/2 sum_k (sqrt(alpha_k^2 - ell beta_k^2) + alpha_k), ell <= m.
double F_of_ell(double ell, const Spectrum& spectrum);

/// Inverse of ell = 4 lambda (1 + lambda) on the chosen branch, ell >= -1.
double lambda_of_ell(double ell, Branch branch);

struct Ell0Solution {
  double ell0 = -1.0;
  double residual = 0.0;  // (rhs(ell0) - |x|) / max(1, |x|)
};

inline constexpr double kDefaultEll0Tol = 1e-13;

/// Unique root in [-1, m) of |x| = sqrt(1 + ell) sum_k beta_k^2 / sqrt(alpha_k^2 - ell beta_k^2).
Ell0Solution ell0_solve(double x, const Spectrum& spectrum, double tol = kDefaultEll0Tol);

struct RatePoint {
  double x = 0.0;
  double ell0 = -1.0;
  double I = 0.0;
  double residual = 0.0;
};

RatePoint rate(double x, const Spectrum& spectrum);

/// sup over [a, b] of lambda x - Lambda(lambda) by grid search and golden
/// section polish. Never exceeds the true supremum.
double legendre_oracle(double x, const Spectrum& spectrum, int n_grid = 2000);

struct SymmetryResiduals {
  double cramer = 0.0;  // max |Lambda(l) - Lambda(-1 - l)|
  double rate = 0.0;    // max |I(x) - I(-x) + x|
};

SymmetryResiduals symmetry_residuals(const Spectrum& spectrum, const std::vector<double>& lambda_grid,
                                     const std::vector<double>& x_grid);

}  // namespace eprld
