#pragma once

// Multivariate generalized hyperbolic law as a normal mean-variance mixture
//   X = mu + W beta + sqrt(W) U,  U ~ N(0, Sigma),  W ~ GIG(omega, eta = 1, lambda).

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <string>

#include "ghmix/bessel.hpp"
#include "ghmix/error.hpp"
#include "ghmix/gig.hpp"
#include "ghmix/random.hpp"

namespace ghmix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace ghd {

/// Component in the (lambda, omega, mu, Sigma, beta) form with eta fixed at 1.
struct GhComponent {
  double lambda = -0.5;
  double omega = 1.0;
  Vector mu;
  Matrix sigma;
  Vector beta;

  Eigen::Index dim() const { return mu.size(); }
};

/// Canonical (lambda, chi, psi, mu, Delta, alpha) form with |Delta| = 1.
struct GhCanonicalParams {
  double lambda = -0.5;
  double chi = 1.0;
  double psi = 1.0;
  Vector mu;
  Matrix delta;
  Vector alpha;
};

/// Cholesky factor of a scale matrix; throws SingularMatrixError if the
/// matrix is not numerically positive-definite.
class ScaleFactor {
 public:
  ScaleFactor() = default;
  explicit ScaleFactor(const Matrix& sigma) : llt_(sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
      throw DomainError("scale matrix must be square and non-empty");
    }
    if (llt_.info() != Eigen::Success || !sigma.allFinite()) {
      throw SingularMatrixError("scale matrix is not positive-definite");
    }
    const Vector diag = llt_.matrixL().toDenseMatrix().diagonal();
    if ((diag.array() <= 0.0).any()) throw SingularMatrixError("scale matrix is not positive-definite");
    log_det_ = 2.0 * diag.array().log().sum();
  }

  double log_det() const { return log_det_; }

  /// d^T Sigma^{-1} d via one triangular solve.
  double quadratic(const Vector& d) const {
    const Vector y = llt_.matrixL().solve(d);
    return y.squaredNorm();
  }

  Vector solve(const Vector& v) const { return llt_.solve(v); }
  Matrix lower() const { return llt_.matrixL(); }

 private:
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
};

inline void validate(const GhComponent& c) {
  const auto p = c.mu.size();
  if (p == 0) throw DomainError("GH component: empty location vector");
  if (c.sigma.rows() != p || c.sigma.cols() != p || c.beta.size() != p) {
    throw DomainError("GH component: dimension mismatch between mu, Sigma and beta");
  }
  if (!(c.omega > 0.0) || !std::isfinite(c.omega) || !std::isfinite(c.lambda)) {
    throw DomainError("GH component: need omega > 0 and finite lambda");
  }
  if (!c.mu.allFinite() || !c.beta.allFinite()) throw DomainError("GH component: non-finite mu or beta");
}

inline double mahalanobis(const Vector& x, const Vector& mu, const Matrix& sigma) {
  if (x.size() != mu.size() || sigma.rows() != mu.size()) throw DomainError("mahalanobis: dimension mismatch");
  return ScaleFactor(sigma).quadratic(x - mu);
}

/// A component with its factorization and x-independent terms cached, for
/// repeated density and posterior evaluation.
class PreparedComponent {
 public:
  explicit PreparedComponent(const GhComponent& c) : c_(c) {
    validate(c_);
    factor_ = ScaleFactor(c_.sigma);
    const double p = static_cast<double>(c_.dim());
    sigma_inv_beta_ = factor_.solve(c_.beta);
    rho_ = c_.beta.dot(sigma_inv_beta_);
    order_ = c_.lambda - 0.5 * p;
    constant_ = -0.5 * p * std::log(2.0 * std::numbers::pi) - 0.5 * factor_.log_det() -
                bessel::log_bessel_k(c_.lambda, c_.omega);
  }

  const GhComponent& component() const { return c_; }
  double rho() const { return rho_; }

  double mahalanobis(const Vector& x) const { return factor_.quadratic(x - c_.mu); }

  double log_density(const Vector& x) const {
    if (x.size() != c_.dim()) throw DomainError("GH log_density: dimension mismatch");
    const Vector d = x - c_.mu;
    const double delta = factor_.quadratic(d);
    const double a = c_.omega + rho_;
    const double b = c_.omega + delta;
    return 0.5 * order_ * (std::log(b) - std::log(a)) + bessel::log_bessel_k(order_, std::sqrt(a * b)) +
           constant_ + d.dot(sigma_inv_beta_);
  }

  struct PointEval {
    double log_density;
    gig::Expectations moments;  ///< E[W | x], E[1/W | x], E[log W | x]
  };

  /// Density and posterior moments sharing one Bessel evaluation.
  PointEval evaluate(const Vector& x) const {
    if (x.size() != c_.dim()) throw DomainError("GH evaluate: dimension mismatch");
    const Vector d = x - c_.mu;
    const double psi = c_.omega + rho_;
    const double chi = c_.omega + factor_.quadratic(d);
    const double omega_post = std::sqrt(psi * chi);
    const double log_eta = 0.5 * (std::log(chi) - std::log(psi));
    const double eta = std::exp(log_eta);
    const bessel::LogKAndRatios k = bessel::log_k_and_ratios(order_, omega_post);
    PointEval out{};
    out.log_density = order_ * log_eta + k.log_k + constant_ + d.dot(sigma_inv_beta_);
    out.moments.e_w = eta * k.ratio;
    out.moments.e_winv = k.ratio_neg / eta;
    out.moments.e_logw = log_eta + bessel::dlogk_dorder(order_, omega_post);
    return out;
  }

  /// W | x in the (psi, chi, lambda) form.
  gig::PsiChiForm posterior_w(const Vector& x) const {
    if (x.size() != c_.dim()) throw DomainError("GH posterior_w: dimension mismatch");
    return {c_.omega + rho_, c_.omega + mahalanobis(x), order_};
  }

 private:
  GhComponent c_;
  ScaleFactor factor_;
  Vector sigma_inv_beta_;
  double rho_ = 0.0;
  double order_ = 0.0;
  double constant_ = 0.0;
};

inline double log_density(const GhComponent& c, const Vector& x) { return PreparedComponent(c).log_density(x); }

inline gig::PsiChiForm posterior_w(const GhComponent& c, const Vector& x) {
  return PreparedComponent(c).posterior_w(x);
}

/// (lambda, chi, psi, mu, Delta, alpha) -> (lambda, omega, mu, Sigma = eta Delta, beta = eta alpha).
inline GhComponent to_component(const GhCanonicalParams& cp) {
  const gig::OmegaEtaForm oe = gig::convert(gig::PsiChiForm{cp.psi, cp.chi, cp.lambda});
  GhComponent c{cp.lambda, oe.omega, cp.mu, oe.eta * cp.delta, oe.eta * cp.alpha};
  validate(c);
  return c;
}

/// Inverse of to_component: eta = |Sigma|^{1/p} is normalized out of Sigma.
inline GhCanonicalParams to_canonical(const GhComponent& c) {
  validate(c);
  const double p = static_cast<double>(c.dim());
  const double eta = std::exp(ScaleFactor(c.sigma).log_det() / p);
  return {c.lambda, c.omega * eta, c.omega / eta, c.mu, c.sigma / eta, c.beta / eta};
}

/// n draws, one per row.
inline Matrix sample_component(const GhComponent& c, Rng& rng, std::size_t n) {
  validate(c);
  if (n == 0) throw DomainError("sample_component: n must be at least 1");
  const Matrix lower = ScaleFactor(c.sigma).lower();
  const gig::OmegaEtaForm w_law{c.omega, 1.0, c.lambda};
  std::normal_distribution<double> normal;
  const auto p = c.dim();
  Matrix out(static_cast<Eigen::Index>(n), p);
  Vector z(p);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double w = gig::sample_one(w_law, rng);
    for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
    out.row(i) = (c.mu + w * c.beta + std::sqrt(w) * (lower * z)).transpose();
  }
  return out;
}

}  // namespace ghd
}  // namespace ghmix
