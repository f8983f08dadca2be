#include "eprld/cramer.hpp"

#include "eprld/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eprld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// alpha^2 - ell beta^2, snapped to zero within 1e-14 alpha^2 of zero so that
// boundary evaluations do not inherit the square-root amplification of rounding.
double radicand(const EigenPair& p, double ell) {
  const double r = p.alpha * p.alpha - ell * p.beta * p.beta;
  if (std::abs(r) <= 1e-14 * p.alpha * p.alpha) return 0.0;
  return r;
}

double ell0_rhs(double ell, const Spectrum& spectrum) {
  double sum = 0.0;
  for (const auto& p : spectrum.pairs) {
    if (p.beta == 0.0) continue;
    sum += p.beta * p.beta / std::sqrt(radicand(p, ell));
  }
  return std::sqrt(1.0 + ell) * sum;
}

void require_irreversible(const Spectrum& spectrum) {
  if (spectrum.is_reversible()) {
    throw ReversibilityError("every eigenvalue of A is real; the entropy production vanishes");
  }
}

}  // namespace

CramerDomain cramer_domain(const Spectrum& spectrum) {
  require_irreversible(spectrum);
  double m = kInf;
  for (const auto& p : spectrum.pairs) {
    if (p.beta != 0.0) m = std::min(m, (p.alpha * p.alpha) / (p.beta * p.beta));
  }
  const double half_width = 0.5 * std::sqrt(1.0 + m);
  return {m, -0.5 - half_width, -0.5 + half_width};
}

double cramer(double lambda, const Spectrum& spectrum) {
  const CramerDomain dom = cramer_domain(spectrum);
  // Membership is decided on ell = 4 lambda (1 + lambda), which is invariant
  // under lambda -> -1 - lambda, so both endpoints round the same way.
  const double ell = 4.0 * lambda * (1.0 + lambda);
  if (!(ell <= dom.m + 1e-14 * std::max(1.0, dom.m))) return kInf;
  return -F_of_ell(std::min(ell, dom.m), spectrum);
}

double cramer_derivative(double lambda, const Spectrum& spectrum) {
  const CramerDomain dom = cramer_domain(spectrum);
  if (!(lambda > dom.a && lambda < dom.b)) {
    throw DomainError("cramer_derivative: lambda must lie strictly inside (a, b)");
  }
  const double ell = 4.0 * lambda * (1.0 + lambda);
  double sum = 0.0;
  for (const auto& p : spectrum.pairs) {
    if (p.beta == 0.0) continue;
    sum += p.beta * p.beta / std::sqrt(radicand(p, ell));
  }
  return (1.0 + 2.0 * lambda) * sum;
}

CramerCurve cramer_curve(const Spectrum& spectrum, const std::vector<double>& lambda_grid) {
  const CramerDomain dom = cramer_domain(spectrum);
  CramerCurve curve;
  curve.lambda_grid = lambda_grid;
  curve.values.reserve(lambda_grid.size());
  curve.derivative.reserve(lambda_grid.size());
  for (double l : lambda_grid) {
    curve.values.push_back(cramer(l, spectrum));
    curve.derivative.push_back((l > dom.a && l < dom.b) ? cramer_derivative(l, spectrum) : kNaN);
  }
  return curve;
}

double F_of_ell(double ell, const Spectrum& spectrum) {
  double m = kInf;
  for (const auto& p : spectrum.pairs) {
    if (p.beta != 0.0) m = std::min(m, (p.alpha * p.alpha) / (p.beta * p.beta));
  }
  if (!(ell <= m)) throw DomainError("F_of_ell: ell exceeds m");
  double sum = 0.0;
  for (const auto& p : spectrum.pairs) {
    if (p.beta == 0.0) continue;
    sum += std::sqrt(radicand(p, ell)) + p.alpha;
  }
  return 0.5 * sum;
}

double lambda_of_ell(double ell, Branch branch) {
  if (!(ell >= -1.0)) throw DomainError("lambda_of_ell: ell must be >= -1");
  const double r = std::sqrt(ell + 1.0);
  return branch == Branch::positive ? 0.5 * (r - 1.0) : 0.5 * (-r - 1.0);
}

Ell0Solution ell0_solve(double x, const Spectrum& spectrum, double tol) {
  const CramerDomain dom = cramer_domain(spectrum);
  const double target = std::abs(x);
  if (target <= 1e-12) return {-1.0, 0.0};
  const double scale = std::max(1.0, target);
  auto residual = [&](double ell) { return (ell0_rhs(ell, spectrum) - target) / scale; };

  double lo = -1.0;
  double delta = 0.5 * (1.0 + dom.m);
  double hi = dom.m - delta;
  while (residual(hi) < 0.0) {
    lo = hi;
    delta *= 0.5;
    const double next = dom.m - delta;
    if (!(next < dom.m) || next <= hi) break;
    hi = next;
  }

  double best = hi;
  double best_res = residual(hi);
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = residual(mid);
    if (std::abs(r) < std::abs(best_res)) {
      best = mid;
      best_res = r;
    }
    if (std::abs(r) <= tol * 1e-3) break;
    if (r < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lo_res = residual(lo);
  if (std::abs(lo_res) < std::abs(best_res)) {
    best = lo;
    best_res = lo_res;
  }
  return {best, best_res};
}

RatePoint rate(double x, const Spectrum& spectrum) {
  require_irreversible(spectrum);
  const Ell0Solution s = ell0_solve(x, spectrum);
  RatePoint rp;
  rp.x = x;
  rp.ell0 = s.ell0;
  rp.residual = s.residual;
  const double root = std::sqrt(1.0 + s.ell0);
  const double F = F_of_ell(s.ell0, spectrum);
  rp.I = x >= 0.0 ? x * 0.5 * (root - 1.0) + F : -x * 0.5 * (root + 1.0) + F;
  return rp;
}

double legendre_oracle(double x, const Spectrum& spectrum, int n_grid) {
  const CramerDomain dom = cramer_domain(spectrum);
  if (n_grid < 3) throw DomainError("legendre_oracle: n_grid must be >= 3");
  auto objective = [&](double l) { return l * x - cramer(std::clamp(l, dom.a, dom.b), spectrum); };

  const double h = (dom.b - dom.a) / (n_grid - 1);
  int best_i = 0;
  double best = -kInf;
  for (int i = 0; i < n_grid; ++i) {
    const double v = objective(dom.a + h * i);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }

  // The objective is concave, so the maximizer lies within one cell of the best node.
  double lo = dom.a + h * std::max(0, best_i - 1);
  double hi = dom.a + h * std::min(n_grid - 1, best_i + 1);
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  return std::max({best, fc, fd});
}

SymmetryResiduals symmetry_residuals(const Spectrum& spectrum, const std::vector<double>& lambda_grid,
                                     const std::vector<double>& x_grid) {
  SymmetryResiduals out;
  for (double l : lambda_grid) {
    const double lhs = cramer(l, spectrum);
    const double rhs = cramer(-1.0 - l, spectrum);
    if (std::isinf(lhs) || std::isinf(rhs)) {
      if (lhs != rhs) out.cramer = kInf;
      continue;
    }
    out.cramer = std::max(out.cramer, std::abs(lhs - rhs));
  }
  for (double x : x_grid) {
    const double d = rate(x, spectrum).I - rate(-x, spectrum).I + x;
    out.rate = std::max(out.rate, std::abs(d));
  }
  return out;
}

}  // namespace eprld
