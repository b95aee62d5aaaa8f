#pragma once

// Modified Bessel function of the third kind, K_nu(x), for real order and
// positive argument. Everything is carried in log scale so that the extreme
// orders reached by the EM (|nu| in the hundreds) and tiny or huge arguments
// neither overflow nor underflow.
//
// Evaluation: the order is split as nu = mu + n with |mu| <= 1/2. K_mu and
// K_{mu+1} come from Temme's series (x < 2) or Steed's continued fraction
// (x >= 2); the ratio K_{k+1}/K_k is then carried up by the three-term
// recurrence, which is stable in the upward direction for K.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ghmix/error.hpp"

namespace ghmix::bessel {

struct BesselEval {
  double log_k;  ///< ln K_order(arg)
  double order;
  double arg;
};

namespace detail {

inline constexpr double kEps = 1.0e-16;
inline constexpr int kMaxIterations = 100000;
inline constexpr double kSeriesCrossover = 2.0;

// Clenshaw evaluation of a Chebyshev series on [-1, 1] (constant term halved).
inline double chebyshev(const double* coeffs, int count, double x) {
  double d = 0.0;
  double dd = 0.0;
  for (int j = count - 1; j >= 1; --j) {
    const double saved = d;
    d = 2.0 * x * d - dd + coeffs[j];
    dd = saved;
  }
  return x * d - dd + 0.5 * coeffs[0];
}

struct TemmeGammas {
  double gam1;   // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
  double gam2;   // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
  double gampl;  // 1/Gamma(1+mu)
  double gammi;  // 1/Gamma(1-mu)
};

// Valid for |mu| <= 1/2.
inline TemmeGammas temme_gammas(double mu) {
  static constexpr double c1[] = {-1.142022680371168e0, 6.5165112670737e-3, 3.087090173086e-4,
                                  -3.4706269649e-6,     6.9437664e-9,       3.67795e-11,
                                  -1.356e-13};
  static constexpr double c2[] = {1.843740587300905e0, -7.68528408447867e-2, 1.2719271366546e-3,
                                  -4.9717367042e-6,    -3.31261198e-8,       2.423096e-10,
                                  -1.702e-13,          -1.49e-15};
  const double xx = 8.0 * mu * mu - 1.0;
  TemmeGammas g{};
  g.gam1 = chebyshev(c1, 7, xx);
  g.gam2 = chebyshev(c2, 8, xx);
  g.gampl = g.gam2 - mu * g.gam1;
  g.gammi = g.gam2 + mu * g.gam1;
  return g;
}

struct ReducedPair {
  double log_k;  // ln K_mu(x)
  double ratio;  // K_{mu+1}(x) / K_mu(x)
};

inline ReducedPair temme_series(double mu, double x) {
  const double half_x = 0.5 * x;
  const double pimu = std::numbers::pi * mu;
  const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(half_x);
  double e = mu * d;
  const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
  const TemmeGammas g = temme_gammas(mu);
  double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / g.gampl;
  double q = 0.5 / (e * g.gammi);
  double c = 1.0;
  d = half_x * half_x;
  double sum1 = p;
  const double mu2 = mu * mu;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double di = static_cast<double>(i);
    ff = (di * ff + p + q) / (di * di - mu2);
    c *= d / di;
    p /= (di - mu);
    q /= (di + mu);
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - di * ff);
    sum1 += del1;
    if (std::abs(del) < std::abs(sum) * kEps && std::abs(del1) < std::abs(sum1) * kEps) break;
  }
  return {std::log(sum), sum1 * (2.0 / x) / sum};
}

inline ReducedPair steed_fraction(double mu, double x) {
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= kMaxIterations; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  h *= a1;
  const double log_k = 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x - std::log(s);
  return {log_k, (mu + x + 0.5 - h) / x};
}

/// ln K_nu(x) and K_{nu+1}(x)/K_nu(x) for nu >= 0, x > 0.
inline ReducedPair evaluate_nonnegative(double nu, double x) {
  const int steps = static_cast<int>(nu + 0.5);
  const double mu = nu - steps;
  ReducedPair start = x < kSeriesCrossover ? temme_series(mu, x) : steed_fraction(mu, x);

  // ratio >= 1 for mu >= -1/2, so the running product only grows; fold it
  // into the log accumulator before it can overflow.
  double ratio = start.ratio;
  double product = 1.0;
  double log_acc = 0.0;
  const double two_over_x = 2.0 / x;
  for (int i = 1; i <= steps; ++i) {
    product *= ratio;
    if (product > 1.0e280) {
      log_acc += std::log(product);
      product = 1.0;
    }
    ratio = (mu + i) * two_over_x + 1.0 / ratio;
  }
  return {start.log_k + log_acc + std::log(product), ratio};
}

inline void check_arguments(double order, double arg) {
  if (!std::isfinite(order) || !std::isfinite(arg) || !(arg > 0.0)) {
    throw DomainError("bessel K: require finite order and arg > 0 (order=" +
                      std::to_string(order) + ", arg=" + std::to_string(arg) + ")");
  }
}

}  // namespace detail

/// Natural log of K_order(arg). Even in the order.
inline double log_bessel_k(double order, double arg) {
  detail::check_arguments(order, arg);
  return detail::evaluate_nonnegative(std::abs(order), arg).log_k;
}

inline BesselEval eval(double order, double arg) { return {log_bessel_k(order, arg), order, arg}; }

/// R_order(arg) = K_{order+1}(arg) / K_order(arg).
inline double bessel_ratio(double order, double arg) {
  detail::check_arguments(order, arg);
  if (order >= 0.0) return detail::evaluate_nonnegative(order, arg).ratio;
  // K_{order+1} = K_{|order|-1} and K_order = K_{|order|}.
  if (order <= -1.0) return 1.0 / detail::evaluate_nonnegative(-order - 1.0, arg).ratio;
  return std::exp(detail::evaluate_nonnegative(order + 1.0, arg).log_k -
                  detail::evaluate_nonnegative(-order, arg).log_k);
}

struct LogKAndRatios {
  double log_k;      ///< ln K_order(arg)
  double ratio;      ///< R_order(arg)
  double ratio_neg;  ///< R_{-order}(arg) = K_{order-1}(arg) / K_order(arg)
};

/// ln K together with both neighbouring ratios from one upward recurrence.
inline LogKAndRatios log_k_and_ratios(double order, double arg) {
  detail::check_arguments(order, arg);
  const double m = std::abs(order);
  double log_k = 0.0;
  double up = 0.0;    // K_{m+1} / K_m
  double down = 0.0;  // K_{m-1} / K_m
  if (m >= 1.0) {
    const detail::ReducedPair below = detail::evaluate_nonnegative(m - 1.0, arg);
    log_k = below.log_k + std::log(below.ratio);
    down = 1.0 / below.ratio;
    up = 2.0 * m / arg + down;
  } else {
    const detail::ReducedPair here = detail::evaluate_nonnegative(m, arg);
    log_k = here.log_k;
    up = here.ratio;
    down = std::exp(detail::evaluate_nonnegative(1.0 - m, arg).log_k - here.log_k);
  }
  return order >= 0.0 ? LogKAndRatios{log_k, up, down} : LogKAndRatios{log_k, down, up};
}

/// d/d(order) ln K_order(arg): central difference with one Richardson level,
/// step 1e-5 * max(1, |order|). Odd in the order, exactly zero at order 0.
inline double dlogk_dorder(double order, double arg) {
  detail::check_arguments(order, arg);
  if (order == 0.0) return 0.0;
  const double nu = std::abs(order);
  const double h = 1.0e-5 * std::max(1.0, nu);
  auto log_k = [arg](double v) { return detail::evaluate_nonnegative(std::abs(v), arg).log_k; };
  const double d1 = (log_k(nu + h) - log_k(nu - h)) / (2.0 * h);
  const double d2 = (log_k(nu + 2.0 * h) - log_k(nu - 2.0 * h)) / (4.0 * h);
  const double d = (4.0 * d1 - d2) / 3.0;
  return order < 0.0 ? -d : d;
}

/// d/d(arg) ln K_order(arg) = -(R_order + R_{-order}) / 2. Always negative.
inline double dlogk_darg(double order, double arg) {
  return -0.5 * (bessel_ratio(order, arg) + bessel_ratio(-order, arg));
}

}  // namespace ghmix::bessel
