#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracles {

namespace {

constexpr double kPi = std::numbers::pi;

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa,
                double b, double fb, double m, double fm, double whole,
                double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
         adaptive(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  return adaptive(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol,
                  max_depth);
}

double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int n_panels, double tol) {
  double s = 0.0;
  const double h = (b - a) / n_panels;
  for (int k = 0; k < n_panels; ++k)
    s += integrate(f, a + k * h, a + (k + 1) * h, tol / n_panels);
  return s;
}

double density_from_cf(const CharFn& phi, double x, double u_max) {
  // Composite Simpson with a step small enough for both the oscillation
  // exp(-iux) and the CF decay.
  const double du_osc = 0.05 / (1.0 + std::abs(x));
  const int n_raw = static_cast<int>(std::ceil(u_max / std::min(0.01, du_osc)));
  const int n = n_raw + (n_raw % 2);  // even interval count
  const double h = u_max / n;
  auto g = [&](double u) {
    return (phi(u) * std::exp(std::complex<double>(0.0, -u * x))).real();
  };
  double s = g(0.0) + g(u_max);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(h * k);
  return s * h / 3.0 / kPi;
}

double cdf_from_cf(const CharFn& phi, double x, double u_max) {
  auto g = [&](double u) {
    return (phi(u) * std::exp(std::complex<double>(0.0, -u * x))).imag() / u;
  };
  // The integrand has a finite limit at u -> 0; start a hair above zero and
  // account for the skipped strip with the midpoint value.
  const double eps = 1e-7;
  const double du_osc = 0.05 / (1.0 + std::abs(x));
  const int n_raw = static_cast<int>(std::ceil(u_max / std::min(0.01, du_osc)));
  const int n = n_raw + (n_raw % 2);
  const double h = (u_max - eps) / n;
  double s = g(eps) + g(u_max);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(eps + h * k);
  const double integral = s * h / 3.0 + g(eps / 2.0) * eps;
  return 0.5 - integral / kPi;
}

CharFn polar_stable_cf(double alpha, double eta) {
  return [alpha, eta](double u) -> std::complex<double> {
    if (u == 0.0) return {1.0, 0.0};
    const double sgn = u > 0.0 ? 1.0 : -1.0;
    const double r = std::pow(std::abs(u), alpha);
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, -eta * sgn));
    return std::exp(-r * phase);
  };
}

CharFn tan_stable_cf(double alpha, double beta, double sigma, double mu) {
  return [=](double u) -> std::complex<double> {
    if (u == 0.0) return {1.0, 0.0};
    const double sgn = u > 0.0 ? 1.0 : -1.0;
    const double r = std::pow(sigma * std::abs(u), alpha);
    const std::complex<double> skew{1.0, -beta * sgn * std::tan(kPi * alpha / 2)};
    return std::exp(-r * skew + std::complex<double>(0.0, u * mu));
  };
}

double stable_u_max(double alpha, double sigma) {
  return std::pow(39.0, 1.0 / alpha) / sigma;
}

double ks_statistic(const std::vector<double>& sorted_sample,
                    const std::function<double(double)>& cdf) {
  const double n = static_cast<double>(sorted_sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_sample.size(); ++i) {
    const double F = cdf(sorted_sample[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    p += sign * 2.0 * std::exp(-2.0 * lambda * lambda * k * k);
    sign = -sign;
  }
  return std::clamp(p, 0.0, 1.0);
}

MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("mean_std: empty");
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
  return {m, std::sqrt(v)};
}

}  // namespace oracles
