#include "eprld/quadrature.hpp"

#include "eprld/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace eprld {

QuadratureRule parse_quadrature_rule(std::string_view name) {
  if (name == "gauss_legendre" || name == "gauss-legendre" || name == "gl") {
    return QuadratureRule::gauss_legendre;
  }
  if (name == "trapezoid") return QuadratureRule::trapezoid;
  throw ConfigError("unknown quadrature rule '" + std::string(name) + "'");
}

std::string_view to_string(QuadratureRule rule) {
  switch (rule) {
    case QuadratureRule::gauss_legendre:
      return "gauss_legendre";
    case QuadratureRule::trapezoid:
      return "trapezoid";
  }
  return "unknown";
}

QuadratureNodes gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  QuadratureNodes q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double mid = 0.5 * (b + a);
  const double half = 0.5 * (b - a);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Tricomi initial guess, then Newton on the three-term recurrence.
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    q.nodes[i] = mid - half * z;
    q.nodes[n - 1 - i] = mid + half * z;
    q.weights[i] = half * w;
    q.weights[n - 1 - i] = half * w;
  }
  return q;
}

QuadratureNodes trapezoid(int n, double a, double b) {
  if (n < 2) throw DomainError("trapezoid: need at least two nodes");
  QuadratureNodes q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = a + h * i;
    q.weights[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
  }
  return q;
}

QuadratureNodes make_rule(QuadratureRule rule, int n, double a, double b) {
  return rule == QuadratureRule::gauss_legendre ? gauss_legendre(n, a, b) : trapezoid(n, a, b);
}

}  // namespace eprld
