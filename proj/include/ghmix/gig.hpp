#pragma once

// Generalized inverse Gaussian law, in the (psi, chi, lambda) form
//   p(w) = (psi/chi)^{lambda/2} w^{lambda-1} / (2 K_lambda(sqrt(psi chi)))
//          * exp(-(psi w + chi / w) / 2)
// and the (omega, eta, lambda) form with omega = sqrt(psi chi) the
// concentration and eta = sqrt(chi / psi) the scale.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "ghmix/bessel.hpp"
#include "ghmix/error.hpp"
#include "ghmix/random.hpp"

namespace ghmix::gig {

struct PsiChiForm {
  double psi;
  double chi;
  double lambda;
};

struct OmegaEtaForm {
  double omega;
  double eta;
  double lambda;
};

/// A GIG law in either parameterization.
using GigParams = std::variant<PsiChiForm, OmegaEtaForm>;

inline void validate(const PsiChiForm& p) {
  if (!(p.psi > 0.0) || !(p.chi > 0.0) || !std::isfinite(p.psi) || !std::isfinite(p.chi) ||
      !std::isfinite(p.lambda)) {
    throw DomainError("GIG: need psi > 0, chi > 0 and finite lambda (psi=" +
                      std::to_string(p.psi) + ", chi=" + std::to_string(p.chi) + ")");
  }
}

inline void validate(const OmegaEtaForm& p) {
  if (!(p.omega > 0.0) || !(p.eta > 0.0) || !std::isfinite(p.omega) || !std::isfinite(p.eta) ||
      !std::isfinite(p.lambda)) {
    throw DomainError("GIG: need omega > 0, eta > 0 and finite lambda (omega=" +
                      std::to_string(p.omega) + ", eta=" + std::to_string(p.eta) + ")");
  }
}

inline OmegaEtaForm convert(const PsiChiForm& p) {
  validate(p);
  return {std::sqrt(p.psi * p.chi), std::sqrt(p.chi / p.psi), p.lambda};
}

inline PsiChiForm convert(const OmegaEtaForm& p) {
  validate(p);
  return {p.omega / p.eta, p.omega * p.eta, p.lambda};
}

/// Returns the same law in the other parameterization.
inline GigParams convert_parameterization(const GigParams& p) {
  return std::visit([](const auto& form) -> GigParams { return convert(form); }, p);
}

inline OmegaEtaForm as_omega_eta(const GigParams& p) {
  if (const auto* oe = std::get_if<OmegaEtaForm>(&p)) {
    validate(*oe);
    return *oe;
  }
  return convert(std::get<PsiChiForm>(p));
}

inline double log_density(const PsiChiForm& p, double w) {
  validate(p);
  if (!(w > 0.0)) throw DomainError("GIG log_density: w must be positive");
  return 0.5 * p.lambda * std::log(p.psi / p.chi) + (p.lambda - 1.0) * std::log(w) -
         std::numbers::ln2 - bessel::log_bessel_k(p.lambda, std::sqrt(p.psi * p.chi)) -
         0.5 * (p.psi * w + p.chi / w);
}

inline double log_density(const OmegaEtaForm& p, double w) {
  validate(p);
  if (!(w > 0.0)) throw DomainError("GIG log_density: w must be positive");
  const double y = w / p.eta;
  return (p.lambda - 1.0) * std::log(y) - std::log(2.0 * p.eta) -
         bessel::log_bessel_k(p.lambda, p.omega) - 0.5 * p.omega * (y + 1.0 / y);
}

inline double log_density(const GigParams& p, double w) {
  return std::visit([w](const auto& form) { return log_density(form, w); }, p);
}

struct Expectations {
  double e_w;     ///< E[W]
  double e_winv;  ///< E[1/W]
  double e_logw;  ///< E[log W]
};

inline Expectations expectations(const OmegaEtaForm& p) {
  validate(p);
  const bessel::LogKAndRatios k = bessel::log_k_and_ratios(p.lambda, p.omega);
  Expectations e{};
  e.e_w = p.eta * k.ratio;
  // K_{lambda-1}/K_lambda = R_{-lambda}; equal to R_lambda - 2 lambda / omega
  // without the cancellation that form suffers for large positive lambda.
  e.e_winv = k.ratio_neg / p.eta;
  e.e_logw = std::log(p.eta) + bessel::dlogk_dorder(p.lambda, p.omega);
  return e;
}

inline Expectations expectations(const PsiChiForm& p) { return expectations(convert(p)); }

inline Expectations expectations(const GigParams& p) { return expectations(as_omega_eta(p)); }

namespace detail {

// Standardized law, density proportional to x^{lambda-1} exp(-omega (x + 1/x) / 2),
// lambda >= 0. Algorithms of Hoermann & Leydold (2014).
inline double log_kernel(double lambda, double omega, double x) {
  return (lambda - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x);
}

inline double mode(double lambda, double omega) {
  if (lambda >= 1.0) return ((lambda - 1.0) + std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift.
inline double sample_rou_noshift(double lambda, double omega, Rng& rng) {
  const double xm = mode(lambda, omega);
  const double nc = log_kernel(lambda, omega, xm);
  const double xp = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double uplus = xp * std::exp(0.5 * (log_kernel(lambda, omega, xp) - nc));
  for (;;) {
    const double u = uplus * uniform_open(rng);
    const double v = uniform_open(rng);
    const double x = u / v;
    if (2.0 * std::log(v) <= log_kernel(lambda, omega, x) - nc) return x;
  }
}

// Ratio-of-uniforms with the rectangle shifted to the mode; the rectangle's
// u-extent comes from the two real roots of a cubic (Cardano).
inline double sample_rou_shift(double lambda, double omega, Rng& rng) {
  const double xm = mode(lambda, omega);
  const double nc = log_kernel(lambda, omega, xm);
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double arg = std::clamp(-q / (2.0 * std::sqrt(-p * p * p / 27.0)), -1.0, 1.0);
  const double fi = std::acos(arg);
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(0.5 * (log_kernel(lambda, omega, y1) - nc));
  const double uminus = (y2 - xm) * std::exp(0.5 * (log_kernel(lambda, omega, y2) - nc));
  for (;;) {
    const double u = uminus + uniform_open(rng) * (uplus - uminus);
    const double v = uniform_open(rng);
    const double x = u / v + xm;
    if (x > 0.0 && 2.0 * std::log(v) <= log_kernel(lambda, omega, x) - nc) return x;
  }
}

// Rejection from a three-piece envelope; for lambda < 1 and small omega where
// the ratio-of-uniforms rectangle is loose.
inline double sample_envelope(double lambda, double omega, Rng& rng) {
  const double xm = mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp(log_kernel(lambda, omega, xm));
  const double area0 = k0 * x0;
  double k1 = 0.0;
  double area1 = 0.0;
  double k2 = 0.0;
  double area2 = 0.0;
  if (x0 >= 2.0 / omega) {
    k2 = std::pow(x0, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area1 = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                          : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area0 + area1 + area2;
  const double tail_start = std::max(x0, 2.0 / omega);
  for (;;) {
    double v = total * uniform_open(rng);
    double x = 0.0;
    double hx = 0.0;
    if (v <= area0) {
      x = x0 * v / area0;
      hx = k0;
    } else if ((v -= area0) <= area1) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area1;
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * tail_start) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = uniform_open(rng) * hx;
    if (std::log(u) <= log_kernel(lambda, omega, x)) return x;
  }
}

inline double sample_standard(double lambda, double omega, Rng& rng) {
  if (lambda > 2.0 || omega > 3.0) return sample_rou_shift(lambda, omega, rng);
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return sample_rou_noshift(lambda, omega, rng);
  return sample_envelope(lambda, omega, rng);
}

}  // namespace detail

/// One draw. Negative indices use W ~ GIG(psi, chi, lambda) <=> 1/W ~ GIG(chi, psi, -lambda).
inline double sample_one(const OmegaEtaForm& p, Rng& rng) {
  const double y = detail::sample_standard(std::abs(p.lambda), p.omega, rng);
  return p.lambda >= 0.0 ? p.eta * y : p.eta / y;
}

inline std::vector<double> sample(const GigParams& params, Rng& rng, std::size_t n) {
  if (n == 0) throw DomainError("GIG sample: n must be at least 1");
  const OmegaEtaForm p = as_omega_eta(params);
  std::vector<double> out(n);
  for (auto& w : out) w = sample_one(p, rng);
  return out;
}

}  // namespace ghmix::gig
