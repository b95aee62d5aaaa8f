#pragma once

// Simulation designs: the Gaussian and skew-t two-component studies, and
// user-specified GH mixtures read from JSON.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"
#include "ghmix/io/result_document.hpp"
#include "ghmix/random.hpp"

namespace ghmix::io {

/// How the mixing variable W is drawn for a simulated component.
enum class MixingLaw {
  gaussian,  ///< W = 1
  skew_t,    ///< W ~ inverse gamma(chi/2, chi/2), the psi -> 0 limit with lambda = -chi/2
  gig,       ///< W ~ GIG(omega, eta = 1, lambda)
};

struct SimComponent {
  std::size_t n = 0;
  MixingLaw law = MixingLaw::gig;
  double lambda = -0.5;
  double omega = 1.0;  ///< gig only
  double chi = 0.0;    ///< skew_t degrees of freedom
  Vector mu;
  Matrix sigma;  ///< scale of U
  Vector beta;   ///< skewness multiplying W
};

struct SimDesign {
  std::string name;
  std::vector<SimComponent> components;
};

inline Matrix packed_2x2(double s11, double s12, double s22) {
  Matrix m(2, 2);
  m << s11, s12, s12, s22;
  return m;
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline SimDesign gaussian_table1_design() {
  const Matrix delta = packed_2x2(1.51, -1.13, 1.51);
  SimDesign d{"gaussian-table1", {}};
  d.components.push_back({250, MixingLaw::gaussian, 0.0, 0.0, 0.0, vec2(3, 3), delta, vec2(0, 0)});
  d.components.push_back({250, MixingLaw::gaussian, 0.0, 0.0, 0.0, vec2(-3, -3), delta, vec2(0, 0)});
  return d;
}

inline SimDesign skewt_table2_design() {
  const Matrix sigma = packed_2x2(1.0, -0.75, 1.0);
  SimDesign d{"skewt-table2", {}};
  d.components.push_back({250, MixingLaw::skew_t, -4.0, 0.0, 8.0, vec2(3, 3), sigma, vec2(2, -2)});
  d.components.push_back({250, MixingLaw::skew_t, -10.0, 0.0, 20.0, vec2(-3, -3), sigma, vec2(-1, 1)});
  return d;
}

/// Custom design:
///   {"components": [{"n": 250, "lambda": ..., "omega": ..., "mu": [...],
///                    "sigma": [[...]], "beta": [...]}, ...]}
/// A component may instead give the canonical form with "chi", "psi",
/// "delta" and "alpha", or "family": "gaussian" / "skew-t" (with "chi").
inline SimDesign design_from_json(const json& j, const std::string& name = "custom") {
  SimDesign d{name, {}};
  if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty()) {
    throw DomainError("simulation spec needs a non-empty 'components' array");
  }
  for (const json& c : j.at("components")) {
    SimComponent s;
    s.n = c.at("n").get<std::size_t>();
    s.mu = to_eigen(c.at("mu").get<RealVector>());
    const std::string family = c.value("family", "gh");
    if (family == "gaussian") {
      s.law = MixingLaw::gaussian;
      s.sigma = to_eigen(c.at("sigma").get<RealMatrix>());
      s.beta = Vector::Zero(s.mu.size());
    } else if (family == "skew-t") {
      s.law = MixingLaw::skew_t;
      s.chi = c.at("chi").get<double>();
      s.lambda = -s.chi / 2.0;
      s.sigma = to_eigen(c.at("sigma").get<RealMatrix>());
      s.beta = to_eigen(c.at("alpha").get<RealVector>());
    } else if (c.contains("psi")) {
      ghd::GhCanonicalParams cp{c.at("lambda").get<double>(), c.at("chi").get<double>(), c.at("psi").get<double>(),
                                s.mu, to_eigen(c.at("delta").get<RealMatrix>()),
                                to_eigen(c.at("alpha").get<RealVector>())};
      const ghd::GhComponent gc = ghd::to_component(cp);
      s.lambda = gc.lambda;
      s.omega = gc.omega;
      s.sigma = gc.sigma;
      s.beta = gc.beta;
    } else {
      s.lambda = c.at("lambda").get<double>();
      s.omega = c.at("omega").get<double>();
      s.sigma = to_eigen(c.at("sigma").get<RealMatrix>());
      s.beta = to_eigen(c.at("beta").get<RealVector>());
    }
    if (s.n == 0) throw DomainError("simulation spec: component with n = 0");
    if (s.sigma.rows() != s.mu.size() || s.beta.size() != s.mu.size()) {
      throw DomainError("simulation spec: dimension mismatch");
    }
    d.components.push_back(std::move(s));
  }
  const auto p = d.components.front().mu.size();
  for (const auto& c : d.components) {
    if (c.mu.size() != p) throw DomainError("simulation spec: components differ in dimension");
  }
  return d;
}

inline SimDesign named_design(const std::string& name) {
  if (name == "gaussian-table1") return gaussian_table1_design();
  if (name == "skewt-table2") return skewt_table2_design();
  throw DomainError("unknown design '" + name + "'");
}

struct SimulatedData {
  Matrix x;
  std::vector<int> labels;  ///< 1-based component numbers
};

inline double draw_mixing(const SimComponent& c, Rng& rng) {
  switch (c.law) {
    case MixingLaw::gaussian: return 1.0;
    case MixingLaw::skew_t: {
      std::gamma_distribution<double> gamma(c.chi / 2.0, 2.0 / c.chi);
      return 1.0 / gamma(rng);
    }
    case MixingLaw::gig: return gig::sample_one({c.omega, 1.0, c.lambda}, rng);
  }
  return 1.0;
}

/// One replicate: components in order, n_g rows each.
inline SimulatedData simulate(const SimDesign& d, Rng& rng) {
  std::size_t total = 0;
  for (const auto& c : d.components) total += c.n;
  const auto p = d.components.front().mu.size();
  SimulatedData out{Matrix(static_cast<Eigen::Index>(total), p), {}};
  std::normal_distribution<double> normal;
  Eigen::Index row = 0;
  Vector z(p);
  for (std::size_t g = 0; g < d.components.size(); ++g) {
    const SimComponent& c = d.components[g];
    const Matrix lower = ghd::ScaleFactor(c.sigma).lower();
    for (std::size_t k = 0; k < c.n; ++k, ++row) {
      const double w = draw_mixing(c, rng);
      for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
      out.x.row(row) = (c.mu + w * c.beta + std::sqrt(w) * (lower * z)).transpose();
      out.labels.push_back(static_cast<int>(g) + 1);
    }
  }
  return out;
}

/// Replicate r uses its own stream derived from (seed, r).
inline SimulatedData simulate_replicate(const SimDesign& d, std::uint64_t seed, std::uint64_t replicate) {
  Rng rng = make_rng(seed, {replicate});
  return simulate(d, rng);
}

inline std::string format_real(double v) {
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return s.str();
}

inline std::string to_csv(const SimulatedData& s) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < s.x.cols(); ++j) out << 'x' << j + 1 << ',';
  out << "label\n";
  for (Eigen::Index i = 0; i < s.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.x.cols(); ++j) out << format_real(s.x(i, j)) << ',';
    out << s.labels[static_cast<std::size_t>(i)] << '\n';
  }
  return out.str();
}

/// True parameters of a design in the fitting form and the canonical form.
inline json manifest_components(const SimDesign& d) {
  json arr = json::array();
  for (const auto& c : d.components) {
    json j{{"n", c.n}, {"mu", to_real_vector(c.mu)}};
    switch (c.law) {
      case MixingLaw::gaussian:
        j["family"] = "gaussian";
        j["psi_chi"] = {{"delta", to_real_matrix(c.sigma)}, {"alpha", to_real_vector(c.beta)},
                        {"psi", "->0"}, {"chi", "->inf"}, {"lambda", "->-inf"}};
        break;
      case MixingLaw::skew_t:
        j["family"] = "skew-t";
        j["psi_chi"] = {{"sigma", to_real_matrix(c.sigma)}, {"alpha", to_real_vector(c.beta)},
                        {"chi", c.chi}, {"lambda", -c.chi / 2.0}, {"psi", 0.0}, {"limit", "psi->0"}};
        break;
      case MixingLaw::gig: {
        const ghd::GhComponent gc{c.lambda, c.omega, c.mu, c.sigma, c.beta};
        const ghd::GhCanonicalParams cp = ghd::to_canonical(gc);
        j["family"] = "gh";
        j["omega_eta"] = {{"lambda", c.lambda}, {"omega", c.omega}, {"sigma", to_real_matrix(c.sigma)},
                          {"beta", to_real_vector(c.beta)}};
        j["psi_chi"] = {{"lambda", cp.lambda}, {"chi", cp.chi}, {"psi", cp.psi}, {"delta", to_real_matrix(cp.delta)},
                        {"alpha", to_real_vector(cp.alpha)}};
        break;
      }
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string replicate_file_name(std::size_t r) {
  std::ostringstream s;
  s << "replicate_" << std::setw(3) << std::setfill('0') << r + 1 << ".csv";
  return s.str();
}

/// Writes replicate CSVs and manifest.json into outdir; returns the manifest.
inline json write_simulation(const SimDesign& d, std::size_t replicates, std::uint64_t seed,
                             const std::filesystem::path& outdir) {
  if (replicates == 0) throw DomainError("simulate: replicates must be at least 1");
  std::filesystem::create_directories(outdir);
  json files = json::array();
  for (std::size_t r = 0; r < replicates; ++r) {
    const std::string name = replicate_file_name(r);
    write_text(outdir / name, to_csv(simulate_replicate(d, seed, r)));
    files.push_back(name);
  }
  json manifest{{"design", d.name}, {"seed", seed}, {"replicates", replicates},
                {"components", manifest_components(d)}, {"files", files}};
  write_text(outdir / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

}  // namespace ghmix::io
