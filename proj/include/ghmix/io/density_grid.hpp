#pragma once

// Density evaluation on regular 1-D and 2-D grids, emitted as CSV.

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "ghmix/error.hpp"
#include "ghmix/io/result_document.hpp"
#include "ghmix/io/simulate.hpp"
#include "ghmix/mixture.hpp"

namespace ghmix::io {

struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;

  double at(int k) const { return count == 1 ? lo : lo + (hi - lo) * k / (count - 1); }
};

/// "lo:hi:n" for one axis; "xlo:xhi:nx,ylo:yhi:ny" for two.
inline std::vector<Axis> parse_grid(const std::string& spec) {
  std::vector<Axis> axes;
  std::stringstream outer(spec);
  std::string part;
  while (std::getline(outer, part, ',')) {
    std::stringstream inner(part);
    std::string a, b, c, extra;
    if (!std::getline(inner, a, ':') || !std::getline(inner, b, ':') || !std::getline(inner, c, ':') ||
        std::getline(inner, extra, ':')) {
      throw DomainError("grid axis '" + part + "' is not lo:hi:n");
    }
    Axis ax;
    try {
      std::size_t used = 0;
      ax.lo = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      ax.hi = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
      ax.count = std::stoi(c, &used);
      if (used != c.size()) throw std::invalid_argument(c);
    } catch (const std::logic_error&) {
      throw DomainError("grid axis '" + part + "' is not lo:hi:n");
    }
    if (ax.count < 1 || !(ax.hi >= ax.lo)) throw DomainError("grid axis '" + part + "' needs hi >= lo and n >= 1");
    axes.push_back(ax);
  }
  if (axes.empty() || axes.size() > 2) throw DomainError("grid needs one or two axes");
  return axes;
}

/// Mixture from a parameters file: a result document (its winner), a
/// {"weights", "components"} mixture, or a single component object in the
/// (lambda, omega, mu, sigma, beta) or canonical (lambda, chi, psi, mu, delta, alpha) form.
inline GhMixture mixture_from_json(const json& j) {
  if (j.contains("winner")) return winner_mixture(j.get<ResultDocument>());
  auto component = [](const json& c) {
    const Vector mu = to_eigen(c.at("mu").get<RealVector>());
    if (c.contains("psi")) {
      return ghd::to_component({c.at("lambda").get<double>(), c.at("chi").get<double>(), c.at("psi").get<double>(), mu,
                                to_eigen(c.at("delta").get<RealMatrix>()), to_eigen(c.at("alpha").get<RealVector>())});
    }
    ghd::GhComponent g{c.at("lambda").get<double>(), c.at("omega").get<double>(), mu,
                       to_eigen(c.at("sigma").get<RealMatrix>()), to_eigen(c.at("beta").get<RealVector>())};
    ghd::validate(g);
    return g;
  };
  GhMixture m;
  if (j.contains("components")) {
    for (const json& c : j.at("components")) m.components.push_back(component(c));
    if (j.contains("weights")) {
      m.weights = j.at("weights").get<std::vector<double>>();
    } else {
      m.weights.assign(m.components.size(), 1.0 / static_cast<double>(m.components.size()));
    }
  } else {
    m.components.push_back(component(j));
    m.weights = {1.0};
  }
  validate(m);
  return m;
}

/// 1-D: columns x,log_density. 2-D: columns x,y,density with x varying slowest.
inline std::string density_grid_csv(const GhMixture& m, const std::vector<Axis>& axes) {
  const auto p = m.dim();
  if (static_cast<Eigen::Index>(axes.size()) != p) {
    throw DomainError("grid has " + std::to_string(axes.size()) + " axes but the model has dimension " +
                      std::to_string(p));
  }
  std::vector<ghd::PreparedComponent> comps;
  for (const auto& c : m.components) comps.emplace_back(c);
  Eigen::RowVectorXd terms(m.size());
  auto log_f = [&](const Vector& x) {
    for (int g = 0; g < m.size(); ++g) terms(g) = std::log(m.weights[g]) + comps[g].log_density(x);
    return log_sum_exp(terms);
  };
  std::ostringstream out;
  Vector x(p);
  if (p == 1) {
    out << "x,log_density\n";
    for (int k = 0; k < axes[0].count; ++k) {
      x(0) = axes[0].at(k);
      out << format_real(x(0)) << ',' << format_real(log_f(x)) << '\n';
    }
  } else {
    out << "x,y,density\n";
    for (int a = 0; a < axes[0].count; ++a) {
      for (int b = 0; b < axes[1].count; ++b) {
        x << axes[0].at(a), axes[1].at(b);
        out << format_real(x(0)) << ',' << format_real(x(1)) << ',' << format_real(std::exp(log_f(x))) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace ghmix::io
