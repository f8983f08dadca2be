#include "doctest.h"
#include "oracles.hpp"

#include "eprld/cramer.hpp"
#include "eprld/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace eprld;

namespace {

const double kS = std::numbers::sqrt2 / 2.0;

Spectrum magnetic_spectrum() { return spectral_decompose(magnetic_example(std::numbers::pi / 4), false); }

}  // namespace

TEST_CASE("domain of the magnetic example") {
  const CramerDomain d = cramer_domain(magnetic_spectrum());
  CHECK(d.m == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.a == doctest::Approx(-0.5 - kS).epsilon(1e-15));
  CHECK(d.b == doctest::Approx(-0.5 + kS).epsilon(1e-14));
  CHECK(d.b == doctest::Approx(0.207107).epsilon(1e-6));
  CHECK(d.contains(0.0));
  CHECK_FALSE(d.contains(0.3));
}

TEST_CASE("reversible spectra are rejected") {
  const Spectrum sp = spectral_decompose(SystemSpec::with_identity_noise(-Matrix::Identity(2, 2)), false);
  CHECK_THROWS_AS(cramer_domain(sp), ReversibilityError);
  CHECK_THROWS_AS(cramer(0.1, sp), ReversibilityError);
  CHECK_THROWS_AS(rate(1.0, sp), ReversibilityError);
}

TEST_CASE("closed-form Cramer values") {
  const Spectrum sp = magnetic_spectrum();
  CHECK(cramer(0.0, sp) == 0.0);
  CHECK(cramer(-1.0, sp) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cramer(0.1, sp) == doctest::Approx(kS - std::sqrt(0.28)).epsilon(1e-14));
  CHECK(std::abs(cramer(0.1, sp) - 0.177957) < 5e-7);
  const CramerDomain d = cramer_domain(sp);
  CHECK(cramer(d.b, sp) == doctest::Approx(kS).epsilon(1e-14));
  CHECK(cramer(d.a, sp) == doctest::Approx(kS).epsilon(1e-14));
  CHECK(std::isinf(cramer(0.3, sp)));
  CHECK(std::isinf(cramer(-1.3, sp)));
}

TEST_CASE("Cramer derivative matches central differences") {
  const Spectrum sp = magnetic_spectrum();
  const double h = 1e-6;
  for (double l : {-1.1, -0.7, -0.5, 0.0, 0.1, 0.19}) {
    const double fd = (cramer(l + h, sp) - cramer(l - h, sp)) / (2 * h);
    CHECK(cramer_derivative(l, sp) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(cramer_derivative(0.0, sp) == doctest::Approx(mean_epr(sp)).epsilon(1e-14));
  CHECK_THROWS_AS(cramer_derivative(cramer_domain(sp).b, sp), DomainError);

  Matrix A(2, 2);
  A << -1, 2, -2, -1;
  const Spectrum s8 = spectral_decompose(SystemSpec::with_identity_noise(A), false);
  const double fd8 = (cramer(h, s8) - cramer(-h, s8)) / (2 * h);
  CHECK(fd8 == doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("curve marks values outside the domain") {
  const Spectrum sp = magnetic_spectrum();
  const CramerDomain d = cramer_domain(sp);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(d.a - 0.1 + i * (d.b - d.a + 0.2) / 40);
  const CramerCurve c = cramer_curve(sp, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::isinf(c.values[i]) == !d.contains(grid[i]));
    CHECK(std::isnan(c.derivative[i]) == !(grid[i] > d.a && grid[i] < d.b));
  }
}

TEST_CASE("lambda(ell) inverts ell = 4 lambda (1 + lambda) on both branches") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double ell = u(rng);
    for (Branch b : {Branch::positive, Branch::negative}) {
      const double l = lambda_of_ell(ell, b);
      CHECK(std::abs(4 * l * (1 + l) - ell) <= 1e-14 * std::max(1.0, std::abs(ell)));
    }
  }
  CHECK_THROWS_AS(lambda_of_ell(-1.5, Branch::positive), DomainError);
  CHECK_THROWS_AS(F_of_ell(1.5, magnetic_spectrum()), DomainError);
}

TEST_CASE("ell0 for x = 2 sqrt2 is 0.6") {
  // 2 (1 + ell) / (1 - ell) = 8 after squaring; ell = 0.6.
  const Ell0Solution s = ell0_solve(2 * std::numbers::sqrt2, magnetic_spectrum());
  CHECK(s.ell0 == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(std::abs(s.residual) < 1e-12);
  CHECK(ell0_solve(0.0, magnetic_spectrum()).ell0 == -1.0);
}

TEST_CASE("rate function values and Legendre oracle") {
  const Spectrum sp = magnetic_spectrum();
  CHECK(rate(0.0, sp).I == doctest::Approx(1.0 - kS).epsilon(1e-14));
  CHECK(std::abs(legendre_oracle(0.0, sp) - 0.292893) < 1e-6);
  CHECK(std::abs(rate(mean_epr(sp), sp).I) < 1e-12);
  for (double x : {-4.0, -1.0, -0.2, 0.5, 1.0, 2.2, 5.0, 12.0}) {
    const double I = rate(x, sp).I;
    CHECK(std::abs(I - legendre_oracle(x, sp)) <= 1e-6 * (1 + I));
    CHECK(I >= 0.0);
  }
}

TEST_CASE("rate function is convex with minimum at the mean") {
  const Spectrum sp = magnetic_spectrum();
  const double h = 0.05;
  for (double x = -3.0; x <= 4.0; x += 0.1) {
    const double c = rate(x - h, sp).I - 2 * rate(x, sp).I + rate(x + h, sp).I;
    CHECK(c >= -1e-12);
  }
  CHECK(rate(1.3, sp).I > rate(mean_epr(sp), sp).I);
  CHECK(rate(1.5, sp).I > rate(mean_epr(sp), sp).I);
}

TEST_CASE("fluctuation symmetry on the magnetic example") {
  const Spectrum sp = magnetic_spectrum();
  const CramerDomain d = cramer_domain(sp);
  std::vector<double> lg, xg;
  for (int i = 0; i <= 100; ++i) lg.push_back(d.a + i * (d.b - d.a) / 100);
  for (int i = 0; i <= 60; ++i) xg.push_back(-3.0 + 0.1 * i);
  const SymmetryResiduals r = symmetry_residuals(sp, lg, xg);
  CHECK(r.cramer <= 1e-12);
  CHECK(r.rate <= 1e-9);
}
