#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stableband/rng.hpp"

namespace stableband {

/// Parameters of the auxiliary-variable bivariate density
///
///   f(z, y) = (alpha/|alpha-1|) exp{-|z/t(y)|^(alpha/(alpha-1))}
///             |z/t(y)|^(alpha/(alpha-1))  / |z|
///
/// on z != 0, y in (-1/2, 1/2) with sign(z) = sign(t(y)). Its z-marginal is
/// the stable law with characteristic function exp(-|u|^alpha e^(-i eta sgn u)),
/// i.e. `beta` here is the polar-form skewness of that law, not the
/// tan-coupling beta of StableParams. Use aux_from_cf_skew to convert.
struct AuxDensityParams {
  double alpha = 1.5;
  double beta = 0.0;

  /// Skew phase eta = beta * min(alpha, 2-alpha) * pi/2, recomputed on use.
  double eta() const;
  /// Zero of t: l = -eta / (pi alpha), always in (-1/2, 1/2).
  /// t < 0 on (-1/2, l) and t > 0 on (l, 1/2).
  double l() const;

  void validate() const;
};

/// Auxiliary density matched to rewards following S_alpha(sigma, beta, mu)
/// in the StableParams convention: z = (x - mu) / (sigma * sigma_factor)
/// follows the aux marginal exactly.
struct AuxSpec {
  AuxDensityParams aux;
  double sigma_factor = 1.0;  // (1 + beta^2 tan^2(pi alpha/2))^(1/(2 alpha))
};
AuxSpec aux_from_cf_skew(double alpha, double beta_cf);

/// t_{alpha,beta}(y) = (sin(pi alpha y + eta)/cos(pi y))
///                     * (cos(pi y)/cos(pi(alpha-1)y + eta))^((alpha-1)/alpha)
/// Throws pole_error at y = l (where t vanishes) and at y = +-1/2.
double t_fn(const AuxDensityParams& aux, double y);

/// The bivariate density above; 0 outside the sign-compatible support.
double joint_density(double z, double y, const AuxDensityParams& aux);

/// Cached |t|^(-alpha/(alpha-1)) tables for one (alpha, beta); built once and
/// shared between chains (immutable after construction, thread-safe to read).
class AuxTables;
std::shared_ptr<const AuxTables> aux_tables(const AuxDensityParams& aux);

/// One draw of the auxiliary variable for observation z from the density
///   p(y | z) `propto` exp{-|z/t(y)|^q} |z/t(y)|^q,  q = alpha/(alpha-1),
/// restricted to the sign-compatible side of l. Tabulated inverse CDF on a
/// 512-point grid placed adaptively where the density mass lies.
/// Throws data_error when |z| < 1e-12 (caller perturbs or skips).
double sample_y(double z, const AuxDensityParams& aux, Rng& rng);

/// log of the z-marginal implied by the same tables (the density of the
/// polar-form stable law at z). The observation-crossing kernel uses it as
/// the normalizer of the y-conditional.
double log_marginal_z(double z, const AuxDensityParams& aux);

struct PriorSpec {
  enum class Kind { flat, gaussian };
  Kind kind = Kind::flat;
  double lo = -1.0, hi = 1.0;   // flat
  double mean = 0.0, std = 1.0; // gaussian

  static PriorSpec flat(double lo, double hi);
  static PriorSpec gaussian(double mean, double std);
  void validate() const;
  double sample(Rng& rng) const;
  double log_pdf(double mu) const;        // up to a constant
  std::pair<double, double> support() const;  // gaussian: mean +- 12 std
  /// Prior for c * mu given this prior for mu (c > 0).
  PriorSpec scaled(double c) const;
};

/// One draw of mu from
///   p(mu | alpha,beta,sigma,x,y) `propto`
///     exp{-sum v_i} prod v_i / |x_i - mu| p(mu),  v_i = |z_i/t(y_i)|^q
/// by shrinkage slice sampling over the interval where every z_i keeps the
/// sign of t(y_i). Returns nullopt when that interval is empty (caller
/// refreshes y first). |x_i - mu| is floored at 1e-12 in the log target.
std::optional<double> sample_mu(std::span<const double> observations,
                                std::span<const double> y_vec,
                                const AuxDensityParams& aux, double sigma,
                                const PriorSpec& prior, Rng& rng,
                                double mu_current);

/// Per-arm Gibbs chain state. Single-owner mutable; one instance per arm.
struct GibbsState {
  explicit GibbsState(Rng rng) : rng(rng) {}

  double mu_current = 0.0;
  std::vector<double> y_current;  // one per observation, inside (-1/2, 1/2)
  std::uint64_t step_count = 0;
  Rng rng;
  std::uint64_t fallback_count = 0;  // prior-draw fallbacks after resample-y failures
  bool initialized = false;

  // derived, filled on first use
  AuxSpec spec;
  double sigma_internal = 0.0;
  std::shared_ptr<const AuxTables> tables;
};

/// Warm-started Thompson draw: alternates sample_y over the observations and
/// sample_mu for `budget` sweeps, starting from `state`, and returns the
/// final mu. (alpha, beta, sigma) are in the StableParams convention; the
/// polar conversion happens internally. After 5 consecutive empty
/// sign-compatible intervals the draw falls back to the prior and
/// state.fallback_count is bumped.
///
/// y_refresh_cap > 0 bounds the per-sweep auxiliary refresh to a rotating
/// block of that many observations (a random-block Gibbs scan; the full-sweep
/// kernel is y_refresh_cap = 0). Chains on histories longer than the cap mix
/// across sweeps instead of within one.
double posterior_draw(std::span<const double> history, double alpha,
                      double beta, double sigma, const PriorSpec& prior,
                      int budget, GibbsState& state, int y_refresh_cap = 0);

/// Collapsed Thompson draw for an unchanged posterior: slice-samples mu
/// under the y-integrated posterior (the precomputed z-marginal tables make
/// that a lookup sum), starting from the chain's current position but
/// committing nothing back except rng advancement. Used to freshen per-round
/// draws for arms whose history did not change, at a small fraction of a
/// sweep's cost.
double posterior_draw_marginal(std::span<const double> history, double alpha,
                               double beta, double sigma,
                               const PriorSpec& prior, GibbsState& state);

}  // namespace stableband
