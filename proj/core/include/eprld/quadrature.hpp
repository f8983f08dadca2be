#pragma once

#include <string_view>
#include <vector>

namespace eprld {

enum class QuadratureRule { gauss_legendre, trapezoid };

struct QuadratureNodes {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Throws ConfigError for names other than "gauss_legendre"/"gauss-legendre"
/// and "trapezoid".
QuadratureRule parse_quadrature_rule(std::string_view name);
std::string_view to_string(QuadratureRule rule);

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
QuadratureNodes gauss_legendre(int n, double a, double b);

/// Composite trapezoid rule with n equally spaced nodes on [a, b], n >= 2.
QuadratureNodes trapezoid(int n, double a, double b);

QuadratureNodes make_rule(QuadratureRule rule, int n, double a, double b);

}  // namespace eprld
