#include "doctest.h"
#include "oracles.hpp"

#include "eprld/error.hpp"
#include "eprld/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace eprld;

namespace {

SystemSpec unit_rotation() {
  Matrix A(2, 2);
  A << -1, 1, -1, -1;
  return SystemSpec::with_identity_noise(A);
}

// Plain bisection on tan(w T) - w / alpha, away from the poles.
double bisect_tan_root(double alpha, double T, int j) {
  double lo = (2 * j - 1) * std::numbers::pi / (2 * T) + 1e-9;
  double hi = (2 * j + 1) * std::numbers::pi / (2 * T) - 1e-9;
  auto f = [&](double w) { return std::tan(w * T) - w / alpha; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((f(lo) < 0) == (f(mid) < 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("first two roots for alpha = -1, T = 1") {
  CHECK(omega_root(-1.0, 1.0, 1) == doctest::Approx(2.028758).epsilon(1e-6));
  CHECK(omega_root(-1.0, 1.0, 2) == doctest::Approx(4.913180).epsilon(1e-6));
  for (int j = 1; j <= 20; ++j) {
    CHECK(omega_root(-1.0, 1.0, j) == doctest::Approx(bisect_tan_root(-1.0, 1.0, j)).epsilon(1e-12));
  }
}

TEST_CASE("roots lie strictly inside their brackets with small residual") {
  for (double alpha : {-0.05, -0.7, -1.0, -3.0, -25.0}) {
    for (double T : {0.1, 1.0, 5.0, 40.0}) {
      const OmegaRoots r = omega_roots(alpha, T, 60);
      REQUIRE(r.roots.size() == 60);
      for (int j = 1; j <= 60; ++j) {
        const double w = r.roots[j - 1];
        const auto [lo, hi] = OmegaRoots::bracket(j, T);
        CHECK(w > lo);
        CHECK(w < hi);
        CHECK(omega_residual(alpha, T, w) <= 1e-12 * std::max(1.0, w));
        // Shrinking the bracket by 1e-9 keeps the sign change.
        auto g = [&](double x) { return x * std::cos(x * T) - alpha * std::sin(x * T); };
        CHECK(g(lo + 1e-9) * g(hi - 1e-9) < 0.0);
      }
    }
  }
}

TEST_CASE("first root shrinks toward zero as T grows") {
  double prev = omega_root(-1.0, 1.0, 1);
  for (double T : {2.0, 5.0, 20.0, 100.0}) {
    const double w = omega_root(-1.0, T, 1);
    CHECK(w > std::numbers::pi / (2 * T));
    CHECK(w < 3 * std::numbers::pi / (2 * T));
    CHECK(w < prev);
    prev = w;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("omega_root rejects invalid arguments") {
  CHECK_THROWS_AS(omega_root(0.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(omega_root(-1.0, 0.0, 1), DomainError);
  CHECK_THROWS_AS(omega_root(-1.0, 1.0, 0), DomainError);
}

TEST_CASE("kernel spectrum of the unit rotation") {
  const Spectrum sp = spectral_decompose(unit_rotation());
  const KernelSpectrum ks = kernel_spectrum(sp, 1.0, 50);
  const double w1 = omega_root(-1.0, 1.0, 1);
  CHECK(ks.gamma_max == doctest::Approx(8.0 / (1.0 + w1 * w1)).epsilon(1e-14));
  CHECK(ks.gamma_max == doctest::Approx(1.563764).epsilon(1e-6));
  CHECK(ks.entries.size() == 100);
  for (const auto& e : ks.entries) {
    const auto [a, b] = sp.pairs[e.channel];
    CHECK(e.gamma == doctest::Approx(8 * b * b / (a * a + e.omega * e.omega)).epsilon(1e-15));
    CHECK(e.gamma < 8 * b * b / (a * a));
    CHECK(e.phase >= 0.0);
    CHECK(e.phase < std::numbers::pi / 2);
    CHECK(std::cos(e.phase) == doctest::Approx(-a / std::hypot(a, e.omega)).epsilon(1e-13));
    CHECK(std::sin(e.phase) == doctest::Approx(e.omega / std::hypot(a, e.omega)).epsilon(1e-13));
  }
  const auto g = ks.sorted_gammas();
  CHECK(std::is_sorted(g.rbegin(), g.rend()));
}

TEST_CASE("reversible drift has an empty kernel spectrum") {
  const Spectrum sp = spectral_decompose(SystemSpec::with_identity_noise(-Matrix::Identity(3, 3)));
  const KernelSpectrum ks = kernel_spectrum(sp, 1.0, 10);
  CHECK(ks.entries.empty());
  CHECK(ks.gamma_max == 0.0);
  CHECK(trace_closed_form(SystemSpec::with_identity_noise(-Matrix::Identity(3, 3)), 1.0) == 0.0);
}

TEST_CASE("top eigenvalue approaches 8 beta^2 / alpha^2 as T grows") {
  const Spectrum sp = spectral_decompose(unit_rotation());
  double prev = 0.0;
  for (double T : {1.0, 5.0, 20.0, 100.0}) {
    const double g = kernel_spectrum(sp, T, 5).gamma_max;
    CHECK(g > prev);
    CHECK(g < 8.0);
    prev = g;
  }
  CHECK(prev > 7.99);
}

TEST_CASE("eigenfunction norm matches quadrature and the stated bounds") {
  CHECK(eigenfunction_norm_sq(std::numbers::pi, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> w(0.1, 30.0), ph(0.0, 1.5), t(0.2, 5.0);
  for (int i = 0; i < 50; ++i) {
    const double omega = w(rng), phase = ph(rng), T = t(rng);
    auto f = [&](double u) { return std::pow(std::sin(omega * u + phase), 2); };
    // Richardson step on the midpoint rule removes the h^2 term.
    const double q = (4.0 * oracle::midpoint(f, 0.0, T, 200000) - oracle::midpoint(f, 0.0, T, 100000)) / 3.0;
    CHECK(std::abs(eigenfunction_norm_sq(omega, phase, T) - q) < 1e-10 * std::max(1.0, T));
  }
  const Spectrum sp = spectral_decompose(unit_rotation());
  for (const auto& e : kernel_spectrum(sp, 1.0, 30).entries) {
    const double v = eigenfunction_norm_sq(e.omega, e.phase, 1.0);
    CHECK(v >= 0.5 * (1 - 1 / std::numbers::pi));
    CHECK(v <= 0.5 * ((1 + 1 / std::numbers::pi) + 1.0));
  }
  const KernelEntry e1 = kernel_spectrum(sp, 1.0, 1).entries.front();
  const double v1 = eigenfunction_norm_sq(e1.omega, e1.phase, 1.0);
  CHECK(v1 >= 0.3408);
  CHECK(v1 <= 1.1592);
  CHECK_THROWS_AS(eigenfunction_norm_sq(0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("kernel matches dense matrix exponentials") {
  const SystemSpec mag = SystemSpec::with_identity_noise(magnetic_example(std::numbers::pi / 4).A);
  const DerivedMatrices dm = derived_matrices(mag);
  const Matrix at_zero = 2.0 * dm.N.transpose() * dm.M.inverse() *
                         (oracle::expm(dm.M) - Matrix::Identity(2, 2)) * dm.N;
  CHECK((kernel_eval(mag, 0.0, 1.0, 0.0, 0.0) - at_zero).norm() < 1e-13);
  CHECK(kernel_eval(mag, 0.3, 2.0, 2.0, 2.0).norm() < 1e-14);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lam(-1.0, 1.0);
  for (int d : {2, 3, 4, 5}) {
    const auto b = oracle::random_block_spec(rng, d);
    const double T = 1.5;
    std::uniform_real_distribution<double> u(0.0, T);
    for (int i = 0; i < 10; ++i) {
      const double l = lam(rng), u1 = u(rng), u2 = u(rng);
      const Matrix h = kernel_eval(b.spec, l, T, u1, u2);
      const Matrix ref = oracle::kernel(b.spec.A, l, T, u1, u2);
      CHECK((h - ref).norm() <= 1e-11 * std::max(1.0, ref.norm()));
      CHECK((h - kernel_eval(b.spec, l, T, u2, u1).transpose()).norm() <= 1e-13 * std::max(1.0, ref.norm()));
    }
  }
  CHECK_THROWS_AS(kernel_eval(mag, 0.0, 1.0, -0.1, 0.5), DomainError);
  CHECK_THROWS_AS(kernel_eval(mag, 0.0, 1.0, 0.5, 1.1), DomainError);
}

TEST_CASE("Nystrom eigenvalues agree with the analytic spectrum and do not depend on lambda") {
  const SystemSpec s = unit_rotation();
  const Spectrum sp = spectral_decompose(s);
  const auto analytic = kernel_spectrum(sp, 1.0, 20).sorted_gammas();
  const auto n0 = nystrom_spectrum(s, 0.0, 1.0, 400);
  CHECK(n0[0] == doctest::Approx(1.563764).epsilon(1e-4));
  for (int r = 0; r < 5; ++r) CHECK(std::abs(n0[r] - analytic[r]) <= 1e-4 * analytic[r]);
  for (double l : {0.3, -0.7}) {
    const auto nl = nystrom_spectrum(s, l, 1.0, 400);
    for (int r = 0; r < 10; ++r) CHECK(std::abs(nl[r] - n0[r]) <= 1e-6 * n0[r]);
  }
  // Mercer positivity.
  CHECK(n0.back() >= -1e-8 * n0.front());

  const auto tz = nystrom_spectrum(s, 0.0, 1.0, 400, QuadratureRule::trapezoid);
  CHECK(std::abs(tz[0] - analytic[0]) <= 1e-3 * analytic[0]);
  CHECK_THROWS_AS(nystrom_spectrum(s, 0.0, 1.0, 4), DomainError);
  CHECK_THROWS_AS(parse_quadrature_rule("simpson"), ConfigError);
}

TEST_CASE("Nystrom error shrinks as the node count doubles") {
  const SystemSpec s = unit_rotation();
  const auto analytic = kernel_spectrum(spectral_decompose(s), 2.0, 20).sorted_gammas();
  double prev = 1e300;
  for (int n : {50, 100, 200, 400, 800}) {
    const auto ny = nystrom_spectrum(s, 0.0, 2.0, n);
    double err = 0.0;
    for (int r = 0; r < 5; ++r) err = std::max(err, std::abs(ny[r] - analytic[r]));
    CHECK(err <= 1.1 * prev);
    prev = err;
  }
}

TEST_CASE("trace identity") {
  const SystemSpec s = unit_rotation();
  const double t1 = trace_closed_form(s, 1.0);
  CHECK(t1 == doctest::Approx(4.0 * (std::exp(-2.0) - 1.0) + 8.0).epsilon(1e-13));
  CHECK(std::abs(t1 - 4.541341) < 5e-7);
  const Spectrum sp = spectral_decompose(s);
  for (double T : {1.0, 5.0}) {
    const double closed = trace_closed_form(s, T);
    CHECK(closed == doctest::Approx(oracle::trace_channel_formula(sp.pairs, T)).epsilon(1e-13));
    const double est = spectrum_trace_estimate(sp, kernel_spectrum(sp, T, 200));
    CHECK(std::abs(est - closed) <= 1e-6 * (1.0 + std::abs(closed)));
  }

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const auto b = oracle::random_block_spec(rng, 2 + trial % 5);
    const Spectrum rs = spectral_decompose(b.spec);
    const double T = 0.5 + trial;
    const double closed = trace_closed_form(b.spec, T);
    CHECK(closed == doctest::Approx(oracle::trace_channel_formula(b.pairs, T)).epsilon(1e-11));
    const double est = spectrum_trace_estimate(rs, kernel_spectrum(rs, T, 200));
    CHECK(std::abs(est - closed) <= 1e-6 * (1.0 + std::abs(closed)));
  }
}

TEST_CASE("analytic tails match brute-force sums of exact roots") {
  for (double alpha : {-0.3, -1.0, -4.0}) {
    for (double T : {0.5, 2.0, 10.0}) {
      const double beta = 1.3, theta = 0.2;
      const int j_max = 50;
      double gsum = 0.0, lsum = 0.0;
      for (int j = j_max + 1; j <= 200000; ++j) {
        const double w = omega_root(alpha, T, j);
        const double g = 8 * beta * beta / (alpha * alpha + w * w);
        gsum += g;
        lsum += -std::log1p(-theta * g);
      }
      const ChannelTail tail = channel_tail(alpha, beta, T, j_max, theta);
      // Beyond 2e5 the remainder is about 8 beta^2 T^2 / (pi^2 2e5).
      const double rest = 8 * beta * beta * T * T / (std::numbers::pi * std::numbers::pi * 200000.0);
      CHECK(std::abs(tail.gamma_sum - (gsum + rest)) <= 1e-8 * std::max(1.0, gsum));
      CHECK(std::abs(tail.neg_log_sum - (lsum + theta * rest)) <= 1e-8 * std::max(1.0, lsum));
    }
  }
}
