#pragma once

// Serialized outcome of a model search: configuration echo, one record per
// fitted model, the winning mixture in both parameterizations, MAP labels and
// the posterior matrix. Written as JSON; numbers use shortest round-trip form.

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ghmix/error.hpp"
#include "ghmix/ghd.hpp"
#include "ghmix/mixture.hpp"
#include "ghmix/model_search.hpp"

namespace ghmix::io {

using json = nlohmann::json;
using RealVector = std::vector<double>;
using RealMatrix = std::vector<std::vector<double>>;

inline RealVector to_real_vector(const Vector& v) { return RealVector(v.data(), v.data() + v.size()); }

inline RealMatrix to_real_matrix(const Matrix& m) {
  RealMatrix out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)].push_back(m(i, j));
  return out;
}

inline Vector to_eigen(const RealVector& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

inline Matrix to_eigen(const RealMatrix& m) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = rows ? static_cast<Eigen::Index>(m.front().size()) : 0;
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(m[static_cast<std::size_t>(i)].size()) != cols) throw DomainError("ragged matrix");
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

struct ModelRecord {
  int G = 0;
  std::string constraint;
  double loglik = 0.0;
  int n_parameters = 0;
  double bic = 0.0;
  bool converged = false;
  int iterations = 0;
  int emem_best_start = -1;
  bool operator==(const ModelRecord&) const = default;
};

struct FailureRecord {
  int G = 0;
  std::string constraint;
  std::string message;
  bool operator==(const FailureRecord&) const = default;
};

/// One winning component: (lambda, omega, mu, Sigma, beta) with eta = 1, and
/// the canonical (lambda, chi, psi, mu, Delta, alpha) view with |Delta| = 1.
struct ComponentReport {
  double weight = 0.0;
  double lambda = 0.0;
  double omega = 0.0;
  RealVector mu;
  RealMatrix sigma;
  RealVector beta;
  double chi = 0.0;
  double psi = 0.0;
  RealMatrix delta;
  RealVector alpha;
  bool operator==(const ComponentReport&) const = default;
};

struct ResultDocument {
  json config;
  std::vector<ModelRecord> models;
  std::vector<FailureRecord> failures;
  int winner_G = 0;
  std::string winner_constraint;
  std::vector<ComponentReport> components;
  std::vector<int> map_labels;  ///< 1-based component numbers
  RealMatrix posterior;
  std::map<std::string, double> ari;
  bool operator==(const ResultDocument&) const = default;
};

inline void to_json(json& j, const ModelRecord& r) {
  j = json{{"G", r.G},         {"constraint", r.constraint}, {"loglik", r.loglik},
           {"n_parameters", r.n_parameters}, {"bic", r.bic}, {"converged", r.converged},
           {"iterations", r.iterations}, {"emem_best_start", r.emem_best_start}};
}
inline void from_json(const json& j, ModelRecord& r) {
  j.at("G").get_to(r.G);
  j.at("constraint").get_to(r.constraint);
  j.at("loglik").get_to(r.loglik);
  j.at("n_parameters").get_to(r.n_parameters);
  j.at("bic").get_to(r.bic);
  j.at("converged").get_to(r.converged);
  j.at("iterations").get_to(r.iterations);
  j.at("emem_best_start").get_to(r.emem_best_start);
}

inline void to_json(json& j, const FailureRecord& r) {
  j = json{{"G", r.G}, {"constraint", r.constraint}, {"message", r.message}};
}
inline void from_json(const json& j, FailureRecord& r) {
  j.at("G").get_to(r.G);
  j.at("constraint").get_to(r.constraint);
  j.at("message").get_to(r.message);
}

inline void to_json(json& j, const ComponentReport& c) {
  j = json{{"weight", c.weight},
           {"omega_eta", {{"lambda", c.lambda}, {"omega", c.omega}, {"mu", c.mu}, {"sigma", c.sigma}, {"beta", c.beta}}},
           {"psi_chi", {{"lambda", c.lambda}, {"chi", c.chi}, {"psi", c.psi}, {"mu", c.mu}, {"delta", c.delta},
                        {"alpha", c.alpha}}}};
}
inline void from_json(const json& j, ComponentReport& c) {
  j.at("weight").get_to(c.weight);
  const json& oe = j.at("omega_eta");
  oe.at("lambda").get_to(c.lambda);
  oe.at("omega").get_to(c.omega);
  oe.at("mu").get_to(c.mu);
  oe.at("sigma").get_to(c.sigma);
  oe.at("beta").get_to(c.beta);
  const json& pc = j.at("psi_chi");
  pc.at("chi").get_to(c.chi);
  pc.at("psi").get_to(c.psi);
  pc.at("delta").get_to(c.delta);
  pc.at("alpha").get_to(c.alpha);
}

inline void to_json(json& j, const ResultDocument& d) {
  j = json{{"config", d.config},
           {"models", d.models},
           {"failures", d.failures},
           {"winner", {{"G", d.winner_G}, {"constraint", d.winner_constraint}, {"components", d.components}}},
           {"map_labels", d.map_labels},
           {"posterior", d.posterior},
           {"ari", d.ari}};
}
inline void from_json(const json& j, ResultDocument& d) {
  d.config = j.at("config");
  j.at("models").get_to(d.models);
  j.at("failures").get_to(d.failures);
  const json& w = j.at("winner");
  w.at("G").get_to(d.winner_G);
  w.at("constraint").get_to(d.winner_constraint);
  w.at("components").get_to(d.components);
  j.at("map_labels").get_to(d.map_labels);
  j.at("posterior").get_to(d.posterior);
  j.at("ari").get_to(d.ari);
}

inline ComponentReport report_component(double weight, const ghd::GhComponent& c) {
  const ghd::GhCanonicalParams cp = ghd::to_canonical(c);
  return {weight,   c.lambda, c.omega, to_real_vector(c.mu), to_real_matrix(c.sigma), to_real_vector(c.beta),
          cp.chi,   cp.psi,   to_real_matrix(cp.delta), to_real_vector(cp.alpha)};
}

inline ResultDocument make_document(const search::SearchResult& sr, json config) {
  ResultDocument d;
  d.config = std::move(config);
  for (const auto& m : sr.ranked) {
    d.models.push_back({m.G, std::string(to_string(m.constraint)), m.result.loglik, m.result.n_parameters,
                        m.result.bic, m.result.converged, m.result.iterations, m.emem_best_start});
  }
  for (const auto& f : sr.failures) d.failures.push_back({f.G, std::string(to_string(f.constraint)), f.message});
  const auto& win = sr.winner();
  d.winner_G = win.G;
  d.winner_constraint = std::string(to_string(win.constraint));
  for (int g = 0; g < win.result.mixture.size(); ++g) {
    d.components.push_back(report_component(win.result.mixture.weights[g], win.result.mixture.components[g]));
  }
  for (int l : win.result.map_labels) d.map_labels.push_back(l + 1);
  d.posterior = to_real_matrix(win.result.z_hat);
  return d;
}

/// The winning mixture, rebuilt from the (omega, eta = 1) form.
inline GhMixture winner_mixture(const ResultDocument& d) {
  GhMixture m;
  m.constraint = parse_constraint(d.winner_constraint);
  for (const auto& c : d.components) {
    m.weights.push_back(c.weight);
    m.components.push_back({c.lambda, c.omega, to_eigen(c.mu), to_eigen(c.sigma), to_eigen(c.beta)});
  }
  return m;
}

inline std::string serialize(const ResultDocument& d) { return json(d).dump(2) + "\n"; }

inline ResultDocument parse_document(const std::string& text) { return json::parse(text).get<ResultDocument>(); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace ghmix::io
