#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include "stableband/stable.hpp"

namespace stableband {

/// Empirical characteristic function (1/N) sum_j exp(i u x_j).
/// Deterministic block-pairwise summation, OpenMP-parallel over blocks; the
/// result does not depend on thread count. Throws data_error on empty input.
std::complex<double> ecf(std::span<const double> data, double u);

/// Naive left-fold reference for `ecf`, kept for tests and benchmarks.
std::complex<double> ecf_serial(std::span<const double> data, double u);

/// Evaluation points for the moment equations: (u1, u2) feed the modulus
/// pair, (u3, u4) the phase pair. Applied to standardized data; see
/// estimate_all.
struct EcfGrid {
  double u1 = 0.2;
  double u2 = 0.8;
  double u3 = 0.1;
  double u4 = 0.4;

  void validate() const;
};

struct FitReport {
  StableParams params;
  std::size_t n_samples = 0;
  EcfGrid grid;
  /// sup over the check grid |u| in {0.1, ..., 1.0} (standardized scale) of
  /// |ECF - fitted CF|.
  double sup_cf_residual = 0.0;
  bool alpha_clamped = false;
  bool beta_clamped = false;
  /// mu * (2 - 2^(1/alpha)): the de-skewed location scale used as the
  /// initial Thompson parameter.
  double theta = 0.0;
};

/// Phase of the ECF at `u`, unwrapped along a path from 0 in steps of
/// `step` so that the result is continuous rather than principal-valued.
/// Throws unwrap_error when adjacent path points jump by more than pi/2.
double unwrapped_phase(std::span<const double> data, double u,
                       double step = 0.02);

/// Algebraic inversion of the CF-modulus pair |phi(u)| = exp(-(sigma u)^alpha):
///   alpha = log(log m1 / log m2) / log(u1/u2)
///   log sigma = (log u1 log(-log m2) - log u2 log(-log m1))
///               / (alpha log(u1/u2))
/// Unclamped; exact when fed analytic moduli.
std::pair<double, double> invert_modulus_pair(double m1, double m2, double u1,
                                              double u2);

/// Algebraic inversion of the CF-phase pair
///   psi(u) = mu u + sigma^alpha u^alpha beta tan(pi alpha/2), u > 0:
///   beta = (u4 psi(u3) - u3 psi(u4))
///          / (sigma^alpha tan(pi alpha/2) (u4 u3^alpha - u3 u4^alpha))
/// and mu by back-substitution at u3. Unclamped; exact on analytic phases.
std::pair<double, double> invert_phase_pair(double psi3, double psi4,
                                            double alpha, double sigma,
                                            double u3, double u4);

/// Tail/scale stage. Requires |ECF| at u1, u2 strictly inside (0,1):
/// invert_modulus_pair on the empirical moduli, alpha_hat clamped to (1, 2]
/// (*alpha_clamped reports it).
/// Throws ill_conditioned_grid_error naming the offending point otherwise.
std::pair<double, double> estimate_alpha_sigma(std::span<const double> data,
                                               const EcfGrid& grid,
                                               bool* alpha_clamped = nullptr);

/// Skew/location stage from the unwrapped ECF phase psi at u3, u4:
///   beta_hat = (u4 psi(u3) - u3 psi(u4))
///              / (sigma^alpha tan(pi alpha/2) (u4 u3^alpha - u3 u4^alpha))
/// then mu_hat by back-substitution into psi(u3). beta_hat is clamped to
/// [-1,1]; *beta_clamped reports it.
std::pair<double, double> estimate_beta_mu(std::span<const double> data,
                                           double alpha_hat, double sigma_hat,
                                           const EcfGrid& grid,
                                           bool* beta_clamped = nullptr);

/// Full pipeline: center by the median, scale by IQR/1.9 so the interquartile
/// spread matches a unit-scale stable law, run both stages on the default
/// grid, undo the standardization, fill diagnostics.
/// Requires at least 100 samples.
FitReport estimate_all(std::span<const double> data, const EcfGrid& grid = {});

}  // namespace stableband
