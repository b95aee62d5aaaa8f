#pragma once

// Grid-search oracle for the (omega, lambda) maximization of the per-component
// objective, and the iterated coordinate sweeps it is compared against.

#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "ghmix/em.hpp"
#include "ghmix/gig.hpp"

namespace oracle {

struct Aggregates {
  double a;
  double b;
  double c;
};

/// Weighted averages of GIG moments over a handful of posterior laws, so the
/// triple is attainable by a real E-step.
inline Aggregates random_aggregates(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lw(std::log(0.05), std::log(20.0));
  std::uniform_real_distribution<double> lam(-8.0, 8.0);
  Aggregates agg{0.0, 0.0, 0.0};
  const int k = 5;
  for (int i = 0; i < k; ++i) {
    const auto e = ghmix::gig::expectations(ghmix::gig::OmegaEtaForm{std::exp(lw(rng)), std::exp(0.5 * lw(rng)), lam(rng)});
    agg.a += e.e_w / k;
    agg.b += e.e_winv / k;
    agg.c += e.e_logw / k;
  }
  return agg;
}

/// Dense grid search with successive local refinement over
/// omega in [0.01, 50], lambda in [-30, 30].
inline std::pair<double, double> grid_argmax(const Aggregates& agg) {
  double w_lo = 0.01, w_hi = 50.0, l_lo = -30.0, l_hi = 30.0;
  double best_w = 0.0, best_l = 0.0;
  for (int level = 0; level < 12; ++level) {
    const int n = 200;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n; ++i) {
      const double w = w_lo + (w_hi - w_lo) * i / n;
      for (int j = 0; j <= n; ++j) {
        const double l = l_lo + (l_hi - l_lo) * j / n;
        const double q = ghmix::em::q_function(agg.a, agg.b, agg.c, w, l);
        if (q > best) {
          best = q;
          best_w = w;
          best_l = l;
        }
      }
    }
    const double dw = 4.0 * (w_hi - w_lo) / n;
    const double dl = 4.0 * (l_hi - l_lo) / n;
    w_lo = std::max(0.01, best_w - dw);
    w_hi = std::min(50.0, best_w + dw);
    l_lo = std::max(-30.0, best_l - dl);
    l_hi = std::min(30.0, best_l + dl);
  }
  return {best_w, best_l};
}

/// Repeats the library's (omega, lambda) sweep from (1, -1/2) until it stops moving.
inline std::pair<double, double> iterate_sweeps(const Aggregates& agg, int max_sweeps = 20000) {
  ghmix::em::FitConfig cfg;
  double omega = 1.0, lambda = -0.5;
  for (int s = 0; s < max_sweeps; ++s) {
    const auto step = ghmix::em::update_omega_lambda(agg.a, agg.b, agg.c, omega, lambda, cfg);
    const bool still = std::abs(step.omega - omega) < 1e-12 * omega && std::abs(step.lambda - lambda) < 1e-12;
    omega = step.omega;
    lambda = step.lambda;
    if (still) break;
  }
  return {omega, lambda};
}

/// True when the argmax lies inside the grid box rather than on its edge.
inline bool interior(const std::pair<double, double>& wl) {
  return wl.first > 0.02 && wl.first < 49.9 && wl.second > -29.9 && wl.second < 29.9;
}

}  // namespace oracle
