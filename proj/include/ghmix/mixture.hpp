#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"

namespace ghmix {

/// Scale-matrix structures with closed-form M-steps, in MCLUST naming.
enum class Constraint { VVV, EEE, EII, VII, EEI, VVI };

inline constexpr std::array<Constraint, 6> kAllConstraints = {Constraint::VVV, Constraint::EEE, Constraint::EII,
                                                              Constraint::VII, Constraint::EEI, Constraint::VVI};

inline std::string_view to_string(Constraint c) {
  switch (c) {
    case Constraint::VVV: return "VVV";
    case Constraint::EEE: return "EEE";
    case Constraint::EII: return "EII";
    case Constraint::VII: return "VII";
    case Constraint::EEI: return "EEI";
    case Constraint::VVI: return "VVI";
  }
  return "?";
}

inline Constraint parse_constraint(std::string_view name) {
  for (Constraint c : kAllConstraints) {
    if (to_string(c) == name) return c;
  }
  throw DomainError("unknown scale constraint '" + std::string(name) + "'");
}

/// Free scale parameters for G components in p dimensions.
inline int scale_parameter_count(Constraint c, int G, int p) {
  switch (c) {
    case Constraint::VVV: return G * p * (p + 1) / 2;
    case Constraint::EEE: return p * (p + 1) / 2;
    case Constraint::EII: return 1;
    case Constraint::VII: return G;
    case Constraint::EEI: return p;
    case Constraint::VVI: return G * p;
  }
  return 0;
}

/// Mixing proportions, location, skewness, index and concentration plus the
/// constraint's scale parameters.
inline int free_parameter_count(Constraint c, int G, int p) {
  return (G - 1) + G * (2 * p + 2) + scale_parameter_count(c, G, p);
}

struct GhMixture {
  std::vector<double> weights;
  std::vector<ghd::GhComponent> components;
  Constraint constraint = Constraint::VVV;

  int size() const { return static_cast<int>(components.size()); }
  Eigen::Index dim() const { return components.empty() ? 0 : components.front().dim(); }
};

inline void validate(const GhMixture& m) {
  if (m.components.empty() || m.weights.size() != m.components.size()) {
    throw DomainError("mixture: need one weight per component and at least one component");
  }
  const Eigen::Index p = m.dim();
  double total = 0.0;
  for (std::size_t g = 0; g < m.components.size(); ++g) {
    if (!(m.weights[g] > 0.0)) throw DomainError("mixture: weights must be positive");
    total += m.weights[g];
    ghd::validate(m.components[g]);
    if (m.components[g].dim() != p) throw DomainError("mixture: components differ in dimension");
  }
  if (std::abs(total - 1.0) > 1e-10) throw DomainError("mixture: weights must sum to one");
}

/// ln sum_j exp(v_j), stable for any finite input.
inline double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

/// ln of the mixture density at x.
inline double log_density(const GhMixture& m, const Vector& x) {
  validate(m);
  Eigen::RowVectorXd terms(m.size());
  for (int g = 0; g < m.size(); ++g) {
    terms(g) = std::log(m.weights[g]) + ghd::log_density(m.components[g], x);
  }
  return log_sum_exp(terms);
}

}  // namespace ghmix
