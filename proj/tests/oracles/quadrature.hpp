#pragma once

// Test-only reference values computed by adaptive quadrature. Nothing here
// calls into the library's special-function code paths.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

namespace oracle {

// Gauss-Kronrod 61 with shallow refinement. Boost accumulates per-interval
// error estimates, which are roundoff-dominated at this accuracy, so deep
// refinement only burns time; callers split the range into pieces instead.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 3, tol, &err);
}

// Integrate f over [a, b] after cutting the interval into `pieces` equal parts.
inline double integrate_split(const std::function<double(double)>& f, double a, double b,
                              int pieces, double tol = 1e-12) {
  double total = 0.0;
  const double w = (b - a) / pieces;
  for (int i = 0; i < pieces; ++i) total += integrate(f, a + i * w, a + (i + 1) * w, tol);
  return total;
}

// ln of the integrand of K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
struct BesselIntegrand {
  double nu;
  double x;
  double log_value(double t) const {
    const double a = nu * t;
    return -x * std::cosh(t) + a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
  }
  double slope(double t) const { return -x * std::sinh(t) + nu * std::tanh(nu * t); }
};

struct BesselQuadrature {
  double log_k;        // ln K_nu(x)
  double dlogk_dnu;    // d/dnu ln K_nu(x)
};

// Log-scale quadrature: the integrand is shifted by its maximum before
// integration so that K can be far outside double range.
inline BesselQuadrature bessel_k_quadrature(double nu, double x) {
  nu = std::abs(nu);
  const BesselIntegrand g{nu, x};
  // Locate the peak: slope is positive then negative (or non-positive everywhere).
  double peak = 0.0;
  if (g.slope(1e-12) > 0.0 || nu * nu > x) {
    double lo = 0.0;
    double hi = std::asinh(std::max(nu, 1.0) / x) + 2.0;
    for (int i = 0; i < 400; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g.slope(mid) > 0.0 ? lo : hi) = mid;
    }
    peak = 0.5 * (lo + hi);
  }
  const double top = g.log_value(peak);
  const double drop = 50.0;
  // Right end: walk until the log-integrand has dropped by `drop`.
  double step = 1e-3 + 1.0 / std::sqrt(x * std::cosh(peak) + nu * nu + 1.0);
  double right = peak + step;
  while (g.log_value(right) > top - drop) {
    step *= 1.5;
    right = peak + step;
  }
  double left = 0.0;
  if (peak > 0.0) {
    double s = 1e-3 + 1.0 / std::sqrt(x * std::cosh(peak) + nu * nu + 1.0);
    left = std::max(0.0, peak - s);
    while (left > 0.0 && g.log_value(left) > top - drop) {
      s *= 1.5;
      left = std::max(0.0, peak - s);
    }
  }
  auto f = [&](double t) { return std::exp(g.log_value(t) - top); };
  auto df = [&](double t) { return t * std::tanh(nu * t) * std::exp(g.log_value(t) - top); };
  double mass = 0.0;
  double dmass = 0.0;
  if (peak > left) {
    mass += integrate_split(f, left, peak, 8);
    dmass += integrate_split(df, left, peak, 8);
  }
  mass += integrate_split(f, peak, right, 16);
  dmass += integrate_split(df, peak, right, 16);
  return {top + std::log(mass), dmass / mass};
}

// ln K_{n+1/2}(x) from the terminating closed form.
inline double log_bessel_k_half_integer(int n, double x) {
  // K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_k (n+k)! / (k! (n-k)!) (2x)^{-k}
  std::vector<double> terms;
  for (int k = 0; k <= n; ++k) {
    terms.push_back(std::lgamma(n + k + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) -
                    k * std::log(2.0 * x));
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + m + std::log(s);
}

// Integrate a positive density-like function over (0, inf) on a log grid of
// the variable: int_0^inf f(w) dw = int exp(u) f(exp(u)) du.
inline double integrate_positive_line(const std::function<double(double)>& f, double lo_log,
                                      double hi_log, int pieces = 64, double tol = 1e-12) {
  auto g = [&](double u) {
    const double w = std::exp(u);
    return w * f(w);
  };
  return integrate_split(g, lo_log, hi_log, pieces, tol);
}

// Moments of GIG(omega, eta, lambda) from the unnormalized kernel
// w^{lambda-1} exp(-omega (w/eta + eta/w) / 2), integrated in u = ln w and
// normalized by its own quadrature. No Bessel function is involved.
struct GigMoments {
  double e_w;
  double e_winv;
  double e_logw;
};

struct GigLogKernel {
  double omega;
  double eta;
  double lambda;
  // ln of w * kernel(w) at w = e^u.
  double operator()(double u) const {
    return lambda * u - 0.5 * omega * (std::exp(u) / eta + eta * std::exp(-u));
  }
  double slope(double u) const { return lambda - 0.5 * omega * (std::exp(u) / eta - eta * std::exp(-u)); }
};

// Interval in u outside of which the log-kernel is `drop` below its peak.
inline std::pair<double, double> gig_support(const GigLogKernel& k, double drop, double* peak_value = nullptr) {
  double lo = std::log(k.eta) - 1.0;
  double hi = std::log(k.eta) + 1.0;
  while (k.slope(lo) < 0.0) lo -= 1.0;
  while (k.slope(hi) > 0.0) hi += 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (k.slope(mid) > 0.0 ? lo : hi) = mid;
  }
  const double peak = 0.5 * (lo + hi);
  const double top = k(peak);
  if (peak_value) *peak_value = top;
  double step = 0.01;
  double left = peak - step;
  while (k(left) > top - drop) left = peak - (step *= 1.5);
  step = 0.01;
  double right = peak + step;
  while (k(right) > top - drop) right = peak + (step *= 1.5);
  return {left, right};
}

inline GigMoments gig_moments_quadrature(double omega, double eta, double lambda) {
  const GigLogKernel k{omega, eta, lambda};
  double top = 0.0;
  const auto [a, b] = gig_support(k, 60.0, &top);
  auto base = [&](double u) { return std::exp(k(u) - top); };
  const int pieces = 32;
  const double mass = integrate_split(base, a, b, pieces);
  const double m1 = integrate_split([&](double u) { return std::exp(u) * base(u); }, a, b, pieces);
  const double mi = integrate_split([&](double u) { return std::exp(-u) * base(u); }, a, b, pieces);
  const double ml = integrate_split([&](double u) { return u * base(u); }, a, b, pieces);
  return {m1 / mass, mi / mass, ml / mass};
}

// CDF of GIG(omega, eta, lambda) tabulated on a fine grid in u = ln w by
// composite Simpson, for goodness-of-fit checks.
class GigCdfTable {
 public:
  GigCdfTable(double omega, double eta, double lambda, int intervals = 40000) {
    const GigLogKernel k{omega, eta, lambda};
    double top = 0.0;
    std::tie(lo_, hi_) = gig_support(k, 45.0, &top);
    h_ = (hi_ - lo_) / intervals;
    cdf_.assign(static_cast<std::size_t>(intervals) + 1, 0.0);
    auto f = [&](double u) { return std::exp(k(u) - top); };
    for (int i = 0; i < intervals; ++i) {
      const double u0 = lo_ + i * h_;
      cdf_[i + 1] = cdf_[i] + h_ / 6.0 * (f(u0) + 4.0 * f(u0 + 0.5 * h_) + f(u0 + h_));
    }
    for (double& c : cdf_) c /= cdf_.back();
  }

  double operator()(double w) const {
    const double u = std::log(w);
    if (u <= lo_) return 0.0;
    if (u >= hi_) return 1.0;
    const double pos = (u - lo_) / h_;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf_.size()) return 1.0;
    const double t = pos - static_cast<double>(i);
    return cdf_[i] + t * (cdf_[i + 1] - cdf_[i]);
  }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  double h_ = 0.0;
  std::vector<double> cdf_;
};

}  // namespace oracle
