#include "stableband/stable.hpp"

#include <cmath>
#include <numbers>

#include "stableband/errors.hpp"

namespace stableband {

namespace {

constexpr double kPi = std::numbers::pi;

// Precomputed CMS coefficients for one parameter set.
struct CmsCoeffs {
  double zeta;        // -beta * tan(pi alpha / 2)
  double xi;          // atan(-zeta) / alpha
  double scale_corr;  // (1 + zeta^2)^(1/(2 alpha))
  double inv_alpha;
  double exponent;  // (1 - alpha) / alpha
};

CmsCoeffs cms_coeffs(const StableParams& p) {
  CmsCoeffs c;
  c.zeta = -p.beta * std::tan(kPi * p.alpha / 2.0);
  c.xi = std::atan(-c.zeta) / p.alpha;
  c.scale_corr = std::pow(1.0 + c.zeta * c.zeta, 1.0 / (2.0 * p.alpha));
  c.inv_alpha = 1.0 / p.alpha;
  c.exponent = (1.0 - p.alpha) / p.alpha;
  return c;
}

double cms_transform(const CmsCoeffs& c, const StableParams& p, double v,
                     double w) {
  const double av = p.alpha * (v + c.xi);
  const double x = c.scale_corr * std::sin(av) /
                   std::pow(std::cos(v), c.inv_alpha) *
                   std::pow(std::cos(v - av) / w, c.exponent);
  return p.mu + p.sigma * x;
}

double cms_draw(const CmsCoeffs& c, const StableParams& p, Rng& rng) {
  const double v = kPi * (rng.uniform01() - 0.5);
  const double w = rng.exponential();
  return cms_transform(c, p, v, w);
}

}  // namespace

void StableParams::validate() const {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw validation_error("alpha must lie in (1, 2], got " +
                           std::to_string(alpha));
  if (!(beta >= -1.0) || !(beta <= 1.0))
    throw validation_error("beta must lie in [-1, 1], got " +
                           std::to_string(beta));
  if (!(sigma > 0.0))
    throw validation_error("sigma must be positive, got " +
                           std::to_string(sigma));
  if (!std::isfinite(mu))
    throw validation_error("mu must be finite");
}

std::complex<double> char_fn(const StableParams& p, double u) {
  p.validate();
  if (u == 0.0) return {1.0, 0.0};
  const double sgn = u > 0.0 ? 1.0 : -1.0;
  const double mag = std::pow(p.sigma * std::abs(u), p.alpha);
  const std::complex<double> skew{1.0,
                                  -p.beta * sgn * std::tan(kPi * p.alpha / 2)};
  return std::exp(-mag * skew + std::complex<double>{0.0, u * p.mu});
}

double sample_one(const StableParams& p, Rng& rng) {
  p.validate();
  const CmsCoeffs c = cms_coeffs(p);
  return cms_draw(c, p, rng);
}

std::vector<double> sample(const StableParams& p, std::size_t count,
                           const Rng& stream) {
  p.validate();
  const CmsCoeffs c = cms_coeffs(p);
  std::vector<double> out(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    Rng r = stream.fork(static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = cms_draw(c, p, r);
  }
  return out;
}

std::vector<double> sample_serial(const StableParams& p, std::size_t count,
                                  const Rng& stream) {
  p.validate();
  const CmsCoeffs c = cms_coeffs(p);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng r = stream.fork(static_cast<std::uint64_t>(i));
    out[i] = cms_draw(c, p, r);
  }
  return out;
}

StableParams combine(const StableParams& p, std::span<const double> weights) {
  p.validate();
  if (weights.empty()) throw validation_error("combine: empty weight vector");
  double abs_sum = 0.0;    // sum |a|^alpha
  double signed_sum = 0.0; // sum sign(a)|a|^alpha
  double lin_sum = 0.0;    // sum a
  for (double a : weights) {
    const double m = std::pow(std::abs(a), p.alpha);
    abs_sum += m;
    signed_sum += (a < 0.0 ? -m : m);
    lin_sum += a;
  }
  if (abs_sum == 0.0)
    throw validation_error("combine: all weights are zero");
  StableParams out;
  out.alpha = p.alpha;
  out.sigma = std::pow(abs_sum, 1.0 / p.alpha) * p.sigma;
  out.beta = signed_sum / abs_sum * p.beta;
  out.mu = lin_sum * p.mu;
  return out;
}

Symmetrizer::Symmetrizer(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw validation_error("Symmetrizer: alpha must lie in (1, 2]");
  scale_ = std::pow(2.0, 1.0 / alpha);
}

std::optional<SymmetrizedTriple> Symmetrizer::push(double x) {
  if (pending_ < 2) {
    carry_[pending_++] = x;
    return std::nullopt;
  }
  SymmetrizedTriple t;
  t.value = x + carry_[1] - scale_ * carry_[0];
  t.source_indices = {next_index_, next_index_ + 1, next_index_ + 2};
  next_index_ += 3;
  pending_ = 0;
  return t;
}

std::vector<SymmetrizedTriple> Symmetrizer::consume(
    std::span<const double> chunk) {
  std::vector<SymmetrizedTriple> out;
  out.reserve((pending_ + chunk.size()) / 3);
  for (double x : chunk) {
    if (auto t = push(x)) out.push_back(*t);
  }
  return out;
}

std::vector<SymmetrizedTriple> symmetrize(std::span<const double> history,
                                          double alpha) {
  Symmetrizer s(alpha);
  return s.consume(history);
}

double location_from_symmetrized(double mean_xd, double alpha) {
  if (!(alpha > 1.0) || !(alpha <= 2.0))
    throw validation_error("location_from_symmetrized: alpha must lie in (1, 2]");
  return mean_xd / (2.0 - std::pow(2.0, 1.0 / alpha));
}

}  // namespace stableband
