#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "stableband/ecf.hpp"
#include "stableband/errors.hpp"
#include "stableband/stable.hpp"

using namespace stableband;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<double> draws(double alpha, double beta, double sigma, double mu,
                          std::size_t n, std::uint64_t seed) {
  return sample({alpha, beta, sigma, mu}, n, Rng(seed));
}

// analytic phase of the CF: psi(u) = mu u + sigma^alpha u^alpha beta tan(..)
double analytic_psi(double u, double alpha, double beta, double sigma,
                    double mu) {
  return mu * u + std::pow(sigma, alpha) * std::pow(u, alpha) * beta *
                      std::tan(kPi * alpha / 2.0);
}
}  // namespace

TEST_CASE("ecf basics") {
  const double data[] = {0.3, -1.2, 4.5};
  CHECK(ecf(data, 0.0) == std::complex<double>{1.0, 0.0});

  const double single[] = {1.7};
  for (double u : {-2.0, 0.5, 3.0}) {
    const auto v = ecf(single, u);
    CHECK(v.real() == Approx(std::cos(u * 1.7)).epsilon(1e-14));
    CHECK(v.imag() == Approx(std::sin(u * 1.7)).epsilon(1e-14));
  }

  const double pair[] = {-2.3, 2.3};
  for (double u : {0.2, 1.0}) {
    const auto v = ecf(pair, u);
    CHECK(v.real() == Approx(std::cos(u * 2.3)).epsilon(1e-14));
    CHECK(std::abs(v.imag()) < 1e-16);
  }

  CHECK_THROWS_AS(ecf(std::span<const double>{}, 1.0), data_error);
}

TEST_CASE("ecf is bounded by 1 and matches the serial reference") {
  const auto xs = draws(1.4, -0.6, 1.0, 0.5, 20000, 3);
  for (double u : {-3.0, -0.7, 0.1, 0.9, 2.2}) {
    const auto p = ecf(xs, u);
    CHECK(std::abs(p) <= 1.0 + 1e-12);
    CHECK(std::abs(p - ecf_serial(xs, u)) < 1e-11);
  }
}

TEST_CASE("modulus pair inversion is exact on analytic values") {
  // |phi(u)| = exp(-(sigma u)^alpha); default grid points u1=0.2, u2=0.8
  {
    const double m1 = std::exp(-std::pow(0.2, 1.5));
    const double m2 = std::exp(-std::pow(0.8, 1.5));
    auto [alpha, sigma] = invert_modulus_pair(m1, m2, 0.2, 0.8);
    CHECK(alpha == Approx(1.5).epsilon(1e-12));
    CHECK(sigma == Approx(1.0).epsilon(1e-12));
  }
  // sigma != 1 catches a missing 1/alpha in the scale equation
  {
    const double a = 1.4, s = 0.5;
    const double m1 = std::exp(-std::pow(s * 0.2, a));
    const double m2 = std::exp(-std::pow(s * 0.8, a));
    auto [alpha, sigma] = invert_modulus_pair(m1, m2, 0.2, 0.8);
    CHECK(alpha == Approx(a).epsilon(1e-12));
    CHECK(sigma == Approx(s).epsilon(1e-12));
  }
}

TEST_CASE("phase pair inversion is exact on analytic values") {
  const double alpha = 1.5, beta = -0.5, sigma = 1.0, mu = 2.0;
  const double psi3 = analytic_psi(0.1, alpha, beta, sigma, mu);
  const double psi4 = analytic_psi(0.4, alpha, beta, sigma, mu);
  auto [b, m] = invert_phase_pair(psi3, psi4, alpha, sigma, 0.1, 0.4);
  CHECK(b == Approx(beta).epsilon(1e-10));
  CHECK(m == Approx(mu).epsilon(1e-10));

  // a second parameter set, sigma != 1
  const double a2 = 1.7, b2 = 0.8, s2 = 3.0, m2 = -4.0;
  auto [bb, mm] =
      invert_phase_pair(analytic_psi(0.1, a2, b2, s2, m2),
                        analytic_psi(0.4, a2, b2, s2, m2), a2, s2, 0.1, 0.4);
  CHECK(bb == Approx(b2).epsilon(1e-10));
  CHECK(mm == Approx(m2).epsilon(1e-10));
}

TEST_CASE("estimate_alpha_sigma on the Gaussian boundary") {
  const auto xs = draws(2.0, 0.0, 1.0, 0.0, 10000, 4);
  bool clamped = false;
  auto [alpha, sigma] = estimate_alpha_sigma(xs, {}, &clamped);
  CHECK(alpha >= 1.9);
  CHECK(alpha <= 2.0);
  CHECK(sigma == Approx(1.0).epsilon(0.10));
}

TEST_CASE("estimate_alpha_sigma rejects grid points where |ECF| hits 0 or 1") {
  // constant data puts |ECF| at exactly 1 on every grid point
  const std::vector<double> constant(1000, 2.5);
  CHECK_THROWS_AS(estimate_alpha_sigma(constant, {}),
                  ill_conditioned_grid_error);
  try {
    estimate_alpha_sigma(constant, {});
  } catch (const ill_conditioned_grid_error& e) {
    CHECK(e.offending_u == 0.2);  // reports the first offending point
  }
}

TEST_CASE("estimate_beta_mu on forced-symmetric data") {
  auto xs = draws(1.5, -0.7, 1.0, 0.0, 20000, 6);
  std::vector<double> sym;
  sym.reserve(2 * xs.size());
  for (double x : xs) {
    sym.push_back(x);
    sym.push_back(-x);
  }
  auto [alpha, sigma] = estimate_alpha_sigma(sym, {});
  auto [beta, mu] = estimate_beta_mu(sym, alpha, sigma, {});
  CHECK(std::abs(beta) < 0.02);
  CHECK(std::abs(mu) < 0.02);
}

TEST_CASE("unwrapped phase fails loudly when the phase is too steep") {
  // location 400 makes the phase advance ~8 rad per 0.02-step
  const auto xs = draws(1.5, 0.0, 1.0, 400.0, 2000, 7);
  CHECK_THROWS_AS(unwrapped_phase(xs, 0.4), unwrap_error);
}

TEST_CASE("estimate_all recovers published-row parameters on synthetic data") {
  // alpha 1.32, beta -0.13, sigma 0.0006, theta 0.0000602
  {
    const double mu = 0.0000602 / (2.0 - std::pow(2.0, 1.0 / 1.32));
    const auto xs = draws(1.32, -0.13, 0.0006, mu, 10000, 8);
    const FitReport fit = estimate_all(xs);
    CHECK(std::abs(fit.params.alpha - 1.32) <= 0.07);
    CHECK(std::abs(fit.params.beta - (-0.13)) <= 0.10);
    CHECK(fit.params.sigma == Approx(0.0006).epsilon(0.10));
  }
  // alpha 1.38, beta -0.21, sigma 0.0011, theta 0.0000771
  {
    const double mu = 0.0000771 / (2.0 - std::pow(2.0, 1.0 / 1.38));
    const auto xs = draws(1.38, -0.21, 0.0011, mu, 10000, 9);
    const FitReport fit = estimate_all(xs);
    CHECK(std::abs(fit.params.alpha - 1.38) <= 0.07);
    CHECK(std::abs(fit.params.beta - (-0.21)) <= 0.10);
    CHECK(fit.params.sigma == Approx(0.0011).epsilon(0.10));
  }
}

TEST_CASE("estimate_all at the benchmark scale keeps beta near zero") {
  const auto xs = draws(1.3, 0.0, 500.0, 0.0, 100000, 10);
  const FitReport fit = estimate_all(xs);
  CHECK(std::abs(fit.params.beta) <= 0.05);
  CHECK(fit.params.alpha == Approx(1.3).epsilon(0.05));
}

TEST_CASE("estimate_all: affine equivariance") {
  const auto xs = draws(1.5, -0.4, 2.0, 1.0, 20000, 11);
  const FitReport base = estimate_all(xs);
  const double shift = 37.5;
  std::vector<double> shifted(xs);
  for (double& x : shifted) x += shift;
  const FitReport moved = estimate_all(shifted);
  // median centering makes the shift exact up to floating-point noise
  CHECK(moved.params.mu == Approx(base.params.mu + shift).epsilon(1e-9));
  CHECK(moved.params.alpha == Approx(base.params.alpha).epsilon(1e-9));
  CHECK(moved.params.beta == Approx(base.params.beta).epsilon(1e-7));
  CHECK(moved.params.sigma == Approx(base.params.sigma).epsilon(1e-9));
}

TEST_CASE("estimate_all: error on degenerate and short inputs") {
  std::vector<double> constant(500, 3.25);
  CHECK_THROWS_AS(estimate_all(constant), data_error);
  std::vector<double> tiny(50, 0.0);
  CHECK_THROWS_AS(estimate_all(tiny), data_error);
}

TEST_CASE("estimate_all: consistency in n") {
  // median |alpha_hat - alpha| over seeds must not increase with n
  const double alpha = 1.5, beta = -0.5;
  std::vector<double> med_err;
  for (std::size_t n : {std::size_t{1000}, std::size_t{10000},
                        std::size_t{100000}}) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 7; ++s) {
      const auto xs = draws(alpha, beta, 1.0, 0.0, n, 100 + s);
      errs.push_back(std::abs(estimate_all(xs).params.alpha - alpha));
    }
    std::sort(errs.begin(), errs.end());
    med_err.push_back(errs[3]);
  }
  CHECK(med_err[1] <= med_err[0] + 1e-12);
  CHECK(med_err[2] <= med_err[1] + 1e-12);
}

TEST_CASE("fit report diagnostics") {
  const auto xs = draws(1.6, 0.3, 1.0, 0.0, 50000, 12);
  const FitReport fit = estimate_all(xs);
  CHECK(fit.n_samples == 50000);
  CHECK(fit.sup_cf_residual < 0.02);
  CHECK(!fit.alpha_clamped);
  CHECK(fit.theta ==
        Approx(fit.params.mu * (2.0 - std::pow(2.0, 1.0 / fit.params.alpha)))
            .epsilon(1e-12));
}
