#pragma once

// EM for a finite mixture of generalized hyperbolic components with a fixed
// number of components and scale structure. Each iteration is one E-step
// followed by closed-form updates of the weights, locations, skewness and
// scales, and one conditional-maximization sweep over (omega, lambda).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ghmix/bessel.hpp"
#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"
#include "ghmix/mixture.hpp"

namespace ghmix::em {

struct FitConfig {
  double epsilon = 0.01;        ///< Aitken tolerance
  int max_iter = 1000;
  double ridge = 1e-8;          ///< relative to the mean diagonal of the scale
  double lambda_cap = 500.0;
  double omega_min = 1e-6;
  double omega_max = 1e6;
  /// Smallest allowed expected membership n_g; p + 1 when unset.
  std::optional<double> min_component_mass;
  int cm_sweeps = 1;            ///< (omega, lambda) sweeps per M-step
};

struct EStepCache {
  Matrix z_hat;  ///< n x G responsibilities
  Matrix a;      ///< E[W | x_i, g]
  Matrix b;      ///< E[1/W | x_i, g]
  Matrix c;      ///< E[log W | x_i, g]
  Vector n_g;
  Vector a_bar;
  Vector b_bar;
  Vector c_bar;
  Matrix x_bar;  ///< G x p responsibility-weighted means
};

struct EStepResult {
  EStepCache cache;
  double loglik = 0.0;
};

/// Responsibilities by log-sum-exp and the conditional moments of W at the
/// posterior GIG parameters of each (observation, component) pair.
inline EStepResult e_step(const GhMixture& m, const Matrix& data) {
  validate(m);
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  const int G = m.size();
  if (n < 1) throw DomainError("e_step: no observations");
  if (p != m.dim()) throw DomainError("e_step: data and mixture differ in dimension");

  EStepResult out;
  EStepCache& ch = out.cache;
  ch.z_hat.resize(n, G);
  ch.a.resize(n, G);
  ch.b.resize(n, G);
  ch.c.resize(n, G);

  for (int g = 0; g < G; ++g) {
    const ghd::PreparedComponent comp(m.components[g]);
    const double log_weight = std::log(m.weights[g]);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ev = comp.evaluate(data.row(i).transpose());
      if (!std::isfinite(ev.log_density) || !std::isfinite(ev.moments.e_w) || !std::isfinite(ev.moments.e_winv) ||
          !std::isfinite(ev.moments.e_logw)) {
        throw NonFiniteError("non-finite density or conditional moment at observation " + std::to_string(i) +
                                 ", component " + std::to_string(g),
                             static_cast<std::size_t>(i), static_cast<std::size_t>(g));
      }
      ch.z_hat(i, g) = log_weight + ev.log_density;
      ch.a(i, g) = ev.moments.e_w;
      ch.b(i, g) = ev.moments.e_winv;
      ch.c(i, g) = ev.moments.e_logw;
    }
  }

  double loglik = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lse = log_sum_exp(ch.z_hat.row(i));
    loglik += lse;
    ch.z_hat.row(i) = (ch.z_hat.row(i).array() - lse).exp();
    ch.z_hat.row(i) /= ch.z_hat.row(i).sum();
  }
  if (!std::isfinite(loglik)) throw NonFiniteError("non-finite log-likelihood");
  out.loglik = loglik;

  ch.n_g = ch.z_hat.colwise().sum().transpose();
  ch.a_bar.resize(G);
  ch.b_bar.resize(G);
  ch.c_bar.resize(G);
  ch.x_bar.resize(G, p);
  for (int g = 0; g < G; ++g) {
    const double ng = ch.n_g(g);
    ch.a_bar(g) = ch.z_hat.col(g).dot(ch.a.col(g)) / ng;
    ch.b_bar(g) = ch.z_hat.col(g).dot(ch.b.col(g)) / ng;
    ch.c_bar(g) = ch.z_hat.col(g).dot(ch.c.col(g)) / ng;
    ch.x_bar.row(g) = (ch.z_hat.col(g).transpose() * data) / ng;
  }
  return out;
}

struct Location {
  Vector mu;
  Vector beta;
};

/// Joint location/skewness update for one component; throws
/// DegenerateDenominatorError when sum_i z_ig (a_bar_g b_ig - 1) vanishes.
inline Location update_location(const EStepCache& ch, const Matrix& data, int g) {
  const Vector z = ch.z_hat.col(g);
  const Vector wmu = z.array() * (ch.a_bar(g) * ch.b.col(g).array() - 1.0);
  const Vector wbeta = z.array() * (ch.b_bar(g) - ch.b.col(g).array());
  const double denom = wmu.sum();
  if (!(std::abs(denom) >= 1e-12)) {
    throw DegenerateDenominatorError("location/skewness update has a vanishing denominator", g);
  }
  return {(data.transpose() * wmu) / denom, (data.transpose() * wbeta) / denom};
}

/// Location update with the skewness held fixed.
inline Vector update_location_fixed_beta(const EStepCache& ch, const Matrix& data, int g, const Vector& beta) {
  const Vector zb = ch.z_hat.col(g).array() * ch.b.col(g).array();
  return (data.transpose() * zb - ch.n_g(g) * beta) / zb.sum();
}

struct WeightsLocations {
  std::vector<double> weights;
  std::vector<Vector> mu;
  std::vector<Vector> beta;
};

inline WeightsLocations m_step_weights_mu_beta(const EStepCache& ch, const Matrix& data) {
  const int G = static_cast<int>(ch.n_g.size());
  const double n = static_cast<double>(data.rows());
  WeightsLocations out;
  for (int g = 0; g < G; ++g) {
    if (!(ch.n_g(g) > 0.0)) throw EmptyComponentError("component has no expected members", g);
    out.weights.push_back(ch.n_g(g) / n);
    Location loc = update_location(ch, data, g);
    out.mu.push_back(std::move(loc.mu));
    out.beta.push_back(std::move(loc.beta));
  }
  return out;
}

/// Unconstrained scale update for one component (before symmetrization).
inline Matrix scatter(const EStepCache& ch, const Matrix& data, int g, const Vector& mu, const Vector& beta) {
  const Matrix centered = data.rowwise() - mu.transpose();
  const Vector zb = ch.z_hat.col(g).array() * ch.b.col(g).array();
  const Vector dbar = ch.x_bar.row(g).transpose() - mu;
  Matrix s = centered.transpose() * zb.asDiagonal() * centered / ch.n_g(g);
  s -= beta * dbar.transpose() + dbar * beta.transpose();
  s += ch.a_bar(g) * beta * beta.transpose();
  return s;
}

inline double min_eigenvalue(const Matrix& s) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(s, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

/// Symmetrize and, if the smallest eigenvalue is below ridge * mean diagonal,
/// add that amount to the diagonal once.
inline Matrix repair_scale(Matrix s, double ridge, int* repairs = nullptr) {
  s = 0.5 * (s + s.transpose()).eval();
  const double floor = ridge * std::max(s.diagonal().mean(), std::numeric_limits<double>::min());
  if (min_eigenvalue(s) < floor) {
    s.diagonal().array() += floor;
    if (repairs) ++*repairs;
    if (!(min_eigenvalue(s) > 0.0)) throw SingularMatrixError("scale matrix could not be repaired to positive-definite");
  }
  return s;
}

/// Applies a scale constraint to per-component scatter matrices weighted by n_g.
inline std::vector<Matrix> constrain_scales(const std::vector<Matrix>& s, const Vector& n_g, Constraint constraint,
                                            double ridge, int* repairs = nullptr) {
  const int G = static_cast<int>(s.size());
  const Eigen::Index p = s.front().rows();
  const double n = n_g.sum();
  Matrix pooled = Matrix::Zero(p, p);
  for (int g = 0; g < G; ++g) pooled += (n_g(g) / n) * s[g];
  std::vector<Matrix> out(G);
  switch (constraint) {
    case Constraint::VVV:
      for (int g = 0; g < G; ++g) out[g] = repair_scale(s[g], ridge, repairs);
      break;
    case Constraint::EEE: {
      const Matrix shared = repair_scale(pooled, ridge, repairs);
      std::fill(out.begin(), out.end(), shared);
      break;
    }
    case Constraint::EII: {
      const Matrix shared = repair_scale(pooled.trace() / p * Matrix::Identity(p, p), ridge, repairs);
      std::fill(out.begin(), out.end(), shared);
      break;
    }
    case Constraint::VII:
      for (int g = 0; g < G; ++g) out[g] = repair_scale(s[g].trace() / p * Matrix::Identity(p, p), ridge, repairs);
      break;
    case Constraint::EEI: {
      const Matrix shared = repair_scale(Matrix(pooled.diagonal().asDiagonal()), ridge, repairs);
      std::fill(out.begin(), out.end(), shared);
      break;
    }
    case Constraint::VVI:
      for (int g = 0; g < G; ++g) out[g] = repair_scale(Matrix(s[g].diagonal().asDiagonal()), ridge, repairs);
      break;
  }
  return out;
}

inline std::vector<Matrix> m_step_sigma(const EStepCache& ch, const Matrix& data, const std::vector<Vector>& mu,
                                        const std::vector<Vector>& beta, Constraint constraint, double ridge = 1e-8,
                                        int* repairs = nullptr) {
  std::vector<Matrix> s;
  for (int g = 0; g < static_cast<int>(mu.size()); ++g) s.push_back(scatter(ch, data, g, mu[g], beta[g]));
  return constrain_scales(s, ch.n_g, constraint, ridge, repairs);
}

/// q_g(omega, lambda) = -ln K_lambda(omega) + (lambda - 1) c_bar - omega (a_bar + b_bar) / 2.
inline double q_function(double a_bar, double b_bar, double c_bar, double omega, double lambda) {
  return -bessel::log_bessel_k(lambda, omega) + (lambda - 1.0) * c_bar - 0.5 * omega * (a_bar + b_bar);
}

struct OmegaLambdaStep {
  double omega;
  double lambda;
  double q_before;
  double q_after;
  bool stalled;  ///< neither coordinate could be improved
};

namespace detail {

// Golden-section maximization of a concave f on [lo, hi].
template <class F>
double golden_section_max(F f, double lo, double hi, int iterations = 60) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int k = 0; k < iterations; ++k) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 < f2 ? x2 : x1;
}

}  // namespace detail

/// One conditional-maximization sweep: the minorize-maximize ratio update for
/// lambda (golden section when it is undefined or fails to improve), then a
/// safeguarded Newton step for omega. q never decreases.
inline OmegaLambdaStep update_omega_lambda(double a_bar, double b_bar, double c_bar, double omega, double lambda,
                                           const FitConfig& cfg) {
  const double cap = cfg.lambda_cap;
  lambda = std::clamp(lambda, -cap, cap);
  omega = std::clamp(omega, cfg.omega_min, cfg.omega_max);
  auto q = [&](double w, double l) { return q_function(a_bar, b_bar, c_bar, w, l); };
  const double q0 = q(omega, lambda);
  double q_cur = q0;
  bool moved = false;

  // lambda
  {
    const double d = bessel::dlogk_dorder(lambda, omega);
    bool accepted = false;
    if (std::abs(lambda) >= 1e-4 && d != 0.0 && c_bar / d > 0.0) {
      const double cand = std::clamp(c_bar * lambda / d, -cap, cap);
      const double qc = q(omega, cand);
      if (qc > q_cur) {
        lambda = cand;
        q_cur = qc;
        accepted = true;
      }
    }
    const double slope = c_bar - d;
    if (!accepted && slope != 0.0) {
      const double width = std::max(1.0, std::abs(lambda));
      const double lo = slope > 0.0 ? lambda : std::max(-cap, lambda - width);
      const double hi = slope > 0.0 ? std::min(cap, lambda + width) : lambda;
      if (hi > lo) {
        const double cand = detail::golden_section_max([&](double l) { return q(omega, l); }, lo, hi);
        const double qc = q(omega, cand);
        if (qc > q_cur) {
          lambda = cand;
          q_cur = qc;
          accepted = true;
        }
      }
    }
    moved = moved || accepted;
  }

  // omega
  {
    const bessel::LogKAndRatios k = bessel::log_k_and_ratios(lambda, omega);
    const double rp = k.ratio;
    const double rm = k.ratio_neg;
    const double grad = 0.5 * (rp + rm - (a_bar + b_bar));
    const double hess =
        0.5 * (rp * rp - (1.0 + 2.0 * lambda) * rp / omega - 1.0 + rm * rm - (1.0 - 2.0 * lambda) * rm / omega - 1.0);
    double step = hess < 0.0 ? -grad / hess : grad * omega;
    if (grad != 0.0 && std::isfinite(step)) {
      for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
        const double cand = std::clamp(omega + step, cfg.omega_min, cfg.omega_max);
        if (cand == omega) break;
        const double qc = q(cand, lambda);
        if (qc > q_cur) {
          omega = cand;
          q_cur = qc;
          moved = true;
          break;
        }
      }
    }
  }
  return {omega, lambda, q0, q_cur, !moved};
}

inline OmegaLambdaStep m_step_omega_lambda(const EStepCache& ch, int g, double omega, double lambda,
                                           const FitConfig& cfg) {
  return update_omega_lambda(ch.a_bar(g), ch.b_bar(g), ch.c_bar(g), omega, lambda, cfg);
}

/// Row-wise argmax; ties go to the lowest index.
inline std::vector<int> map_labels(const Matrix& z_hat) {
  std::vector<int> labels(static_cast<std::size_t>(z_hat.rows()));
  for (Eigen::Index i = 0; i < z_hat.rows(); ++i) {
    int best = 0;
    for (Eigen::Index g = 1; g < z_hat.cols(); ++g) {
      if (z_hat(i, g) > z_hat(i, best)) best = static_cast<int>(g);
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

struct FitDiagnostics {
  double max_loglik_decrease = 0.0;     ///< largest l^(k) - l^(k+1) seen (0 if monotone)
  double min_sigma_eigenvalue = std::numeric_limits<double>::infinity();
  double min_q_change = std::numeric_limits<double>::infinity();  ///< over all (omega, lambda) sweeps
  int beta_frozen = 0;
  int omega_lambda_stalls = 0;
  int ridge_repairs = 0;
};

struct IterationReport {
  int iteration;
  double loglik;
  const GhMixture& mixture;
};

using IterationObserver = std::function<void(const IterationReport&)>;

struct FitResult {
  GhMixture mixture;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  int n_parameters = 0;
  double bic = 0.0;
  Matrix z_hat;
  std::vector<int> map_labels;
  bool converged = false;
  int iterations = 0;
  FitDiagnostics diagnostics;
};

inline double bic(double loglik, int n_parameters, Eigen::Index n) {
  return 2.0 * loglik - n_parameters * std::log(static_cast<double>(n));
}

/// Aitken-accelerated stopping rule on the last three log-likelihoods.
inline bool aitken_converged(double l0, double l1, double l2, double epsilon) {
  const double prev = l1 - l0;
  const double cur = l2 - l1;
  if (cur == 0.0) return true;
  if (prev == 0.0) return false;
  const double a = cur / prev;
  if (!(a < 1.0)) return false;
  const double l_inf = l1 + cur / (1.0 - a);
  const double gap = l_inf - l2;
  return gap >= 0.0 && gap < epsilon;
}

/// Reorders components by decreasing weight, ties by the first coordinate of mu.
inline std::vector<int> canonical_order(const GhMixture& m) {
  std::vector<int> order(static_cast<std::size_t>(m.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (m.weights[x] != m.weights[y]) return m.weights[x] > m.weights[y];
    return m.components[x].mu(0) < m.components[y].mu(0);
  });
  return order;
}

/// Starting mixture from (soft or hard) memberships: weighted means and
/// covariances, beta = 0, lambda = -1/2, omega = 1.
inline GhMixture mixture_from_responsibilities(const Matrix& data, const Matrix& z, Constraint constraint,
                                               double ridge = 1e-8) {
  const int G = static_cast<int>(z.cols());
  const Eigen::Index p = data.cols();
  const Vector n_g = z.colwise().sum().transpose();
  GhMixture m;
  m.constraint = constraint;
  std::vector<Matrix> cov;
  for (int g = 0; g < G; ++g) {
    if (!(n_g(g) > 0.0)) throw EmptyComponentError("initial membership leaves a component empty", g);
    const Vector mu = (data.transpose() * z.col(g)) / n_g(g);
    const Matrix centered = data.rowwise() - mu.transpose();
    cov.push_back(centered.transpose() * z.col(g).asDiagonal() * centered / n_g(g));
    m.weights.push_back(n_g(g) / n_g.sum());
    m.components.push_back({-0.5, 1.0, mu, Matrix::Identity(p, p), Vector::Zero(p)});
  }
  const std::vector<Matrix> scales = constrain_scales(cov, n_g, constraint, std::max(ridge, 1e-6));
  for (int g = 0; g < G; ++g) m.components[g].sigma = scales[g];
  return m;
}

inline GhMixture mixture_from_labels(const Matrix& data, const std::vector<int>& labels, int G, Constraint constraint,
                                     double ridge = 1e-8) {
  Matrix z = Matrix::Zero(data.rows(), G);
  for (std::size_t i = 0; i < labels.size(); ++i) z(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  return mixture_from_responsibilities(data, z, constraint, ridge);
}

/// One M-step from an E-step cache.
inline GhMixture m_step(const EStepCache& ch, const Matrix& data, const GhMixture& current, const FitConfig& cfg,
                        FitDiagnostics* diag = nullptr) {
  const int G = current.size();
  const double n = static_cast<double>(data.rows());
  const double min_mass = cfg.min_component_mass.value_or(static_cast<double>(data.cols()) + 1.0);
  GhMixture next = current;
  std::vector<Vector> mu(G);
  std::vector<Vector> beta(G);
  for (int g = 0; g < G; ++g) {
    if (!(ch.n_g(g) >= min_mass)) {
      throw EmptyComponentError("component " + std::to_string(g) + " expected membership " +
                                    std::to_string(ch.n_g(g)) + " is below the minimum",
                                g);
    }
    next.weights[g] = ch.n_g(g) / n;
    try {
      Location loc = update_location(ch, data, g);
      mu[g] = std::move(loc.mu);
      beta[g] = std::move(loc.beta);
    } catch (const DegenerateDenominatorError&) {
      beta[g] = current.components[g].beta;
      mu[g] = update_location_fixed_beta(ch, data, g, beta[g]);
      if (diag) ++diag->beta_frozen;
    }
  }
  const double total = std::accumulate(next.weights.begin(), next.weights.end(), 0.0);
  for (double& w : next.weights) w /= total;

  int repairs = 0;
  const std::vector<Matrix> sigma = m_step_sigma(ch, data, mu, beta, current.constraint, cfg.ridge, &repairs);
  for (int g = 0; g < G; ++g) {
    ghd::GhComponent& c = next.components[g];
    c.mu = mu[g];
    c.beta = beta[g];
    c.sigma = sigma[g];
    double omega = c.omega;
    double lambda = c.lambda;
    for (int s = 0; s < cfg.cm_sweeps; ++s) {
      const OmegaLambdaStep step = m_step_omega_lambda(ch, g, omega, lambda, cfg);
      omega = step.omega;
      lambda = step.lambda;
      if (diag) {
        diag->min_q_change = std::min(diag->min_q_change, step.q_after - step.q_before);
        if (step.stalled) ++diag->omega_lambda_stalls;
      }
    }
    c.omega = omega;
    c.lambda = lambda;
    if (diag) diag->min_sigma_eigenvalue = std::min(diag->min_sigma_eigenvalue, min_eigenvalue(c.sigma));
  }
  if (diag) diag->ridge_repairs += repairs;
  return next;
}

/// Runs EM from a starting mixture until the Aitken criterion or max_iter.
inline FitResult fit(const Matrix& data, const GhMixture& init, const FitConfig& cfg = {},
                     const IterationObserver& observer = {}) {
  validate(init);
  if (!data.allFinite()) throw DomainError("fit: data contain non-finite values");
  if (data.rows() <= init.size()) throw DomainError("fit: need more observations than components");

  FitResult r;
  GhMixture m = init;
  EStepResult es;
  for (int iter = 0;; ++iter) {
    es = e_step(m, data);
    r.loglik_trace.push_back(es.loglik);
    if (observer) observer({iter, es.loglik, m});
    const std::size_t k = r.loglik_trace.size();
    if (k >= 2) {
      r.diagnostics.max_loglik_decrease =
          std::max(r.diagnostics.max_loglik_decrease, r.loglik_trace[k - 2] - r.loglik_trace[k - 1]);
    }
    if (k >= 3 && aitken_converged(r.loglik_trace[k - 3], r.loglik_trace[k - 2], r.loglik_trace[k - 1], cfg.epsilon)) {
      r.converged = true;
      break;
    }
    if (iter >= cfg.max_iter) break;
    m = m_step(es.cache, data, m, cfg, &r.diagnostics);
    r.iterations = iter + 1;
  }

  const std::vector<int> order = canonical_order(m);
  GhMixture sorted;
  sorted.constraint = m.constraint;
  r.z_hat.resize(es.cache.z_hat.rows(), m.size());
  for (int g = 0; g < m.size(); ++g) {
    sorted.weights.push_back(m.weights[order[g]]);
    sorted.components.push_back(m.components[order[g]]);
    r.z_hat.col(g) = es.cache.z_hat.col(order[g]);
  }
  r.mixture = std::move(sorted);
  r.loglik = r.loglik_trace.back();
  r.n_parameters = free_parameter_count(m.constraint, m.size(), static_cast<int>(data.cols()));
  r.bic = bic(r.loglik, r.n_parameters, data.rows());
  r.map_labels = map_labels(r.z_hat);
  return r;
}

}  // namespace ghmix::em
