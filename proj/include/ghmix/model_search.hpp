#pragma once

// Starting values (k-means, emEM) and BIC-based selection over the number of
// components and the scale structure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ghmix/em.hpp"
#include "ghmix/error.hpp"
#include "ghmix/mixture.hpp"
#include "ghmix/random.hpp"

namespace ghmix::search {

enum class InitMethod { kmeans, emem };

inline std::string_view to_string(InitMethod m) { return m == InitMethod::kmeans ? "kmeans" : "emem"; }

inline InitMethod parse_init_method(std::string_view s) {
  if (s == "kmeans") return InitMethod::kmeans;
  if (s == "emem") return InitMethod::emem;
  throw DomainError("unknown initialization '" + std::string(s) + "'");
}

struct SearchConfig {
  int g_min = 1;
  int g_max = 1;
  std::vector<Constraint> constraints{Constraint::VVV};
  InitMethod init = InitMethod::kmeans;
  int emem_starts = 100;
  int emem_burn_iters = 50;
  std::uint64_t seed = 0;
  em::FitConfig fit;
  /// Worker threads; 0 reads GHMIX_THREADS, falling back to the hardware count.
  int threads = 0;
};

inline void validate(const SearchConfig& cfg) {
  if (cfg.g_min < 1 || cfg.g_max < cfg.g_min) throw DomainError("search: need 1 <= g_min <= g_max");
  if (cfg.constraints.empty()) throw DomainError("search: no scale constraints given");
  if (cfg.emem_starts < 1) throw DomainError("search: emem_starts must be at least 1");
  if (cfg.emem_burn_iters < 0) throw DomainError("search: emem_burn_iters must be non-negative");
}

inline int constraint_index(Constraint c) {
  return static_cast<int>(std::find(kAllConstraints.begin(), kAllConstraints.end(), c) - kAllConstraints.begin());
}

/// Stream for one (G, constraint, start) triple; independent of scheduling.
inline Rng stream_for(std::uint64_t seed, int G, Constraint c, int start) {
  return make_rng(seed, {static_cast<std::uint64_t>(G), static_cast<std::uint64_t>(constraint_index(c)),
                         static_cast<std::uint64_t>(start)});
}

/// Lloyd's algorithm from G distinct random observations as centres.
/// Retries up to ten times when a cluster empties.
inline std::vector<int> init_kmeans(const Matrix& data, int G, Rng& rng, int max_iter = 100) {
  const Eigen::Index n = data.rows();
  if (G < 1 || n <= G) throw DomainError("init_kmeans: need n > G >= 1");
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  if (G == 1) return labels;
  for (int attempt = 0; attempt < 10; ++attempt) {
    std::vector<Eigen::Index> index(static_cast<std::size_t>(n));
    std::iota(index.begin(), index.end(), Eigen::Index{0});
    // partial Fisher-Yates for G distinct seeds
    for (int k = 0; k < G; ++k) {
      std::uniform_int_distribution<Eigen::Index> pick(k, n - 1);
      std::swap(index[static_cast<std::size_t>(k)], index[static_cast<std::size_t>(pick(rng))]);
    }
    Matrix centres(G, data.cols());
    for (int k = 0; k < G; ++k) centres.row(k) = data.row(index[static_cast<std::size_t>(k)]);
    bool empty = false;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = it == 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index best = 0;
        (centres.rowwise() - data.row(i)).rowwise().squaredNorm().minCoeff(&best);
        if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
          labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
          changed = true;
        }
      }
      Matrix sums = Matrix::Zero(G, data.cols());
      std::vector<int> counts(static_cast<std::size_t>(G), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(labels[static_cast<std::size_t>(i)]) += data.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
      }
      empty = std::any_of(counts.begin(), counts.end(), [](int c) { return c == 0; });
      if (empty) break;
      for (int k = 0; k < G; ++k) centres.row(k) = sums.row(k) / counts[static_cast<std::size_t>(k)];
      if (!changed) break;
    }
    if (!empty) return labels;
  }
  throw EmptyComponentError("k-means left a cluster empty after 10 attempts", 0);
}

inline GhMixture init_kmeans_mixture(const Matrix& data, int G, Constraint constraint, Rng& rng,
                                     double ridge = 1e-8) {
  return em::mixture_from_labels(data, init_kmeans(data, G, rng), G, constraint, ridge);
}

/// Responsibilities drawn uniformly from the simplex, one row per observation.
inline Matrix random_responsibilities(Eigen::Index n, int G, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Matrix z(n, G);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int g = 0; g < G; ++g) z(i, g) = expo(rng);
    z.row(i) /= z.row(i).sum();
  }
  return z;
}

/// Short EM run from one random soft start.
inline em::FitResult emem_burn_in(const Matrix& data, int G, Constraint constraint, const SearchConfig& cfg,
                                  int start) {
  Rng rng = stream_for(cfg.seed, G, constraint, start);
  const GhMixture init =
      em::mixture_from_responsibilities(data, random_responsibilities(data.rows(), G, rng), constraint, cfg.fit.ridge);
  em::FitConfig burn = cfg.fit;
  burn.max_iter = cfg.emem_burn_iters;
  return em::fit(data, init, burn);
}

struct EmemStart {
  int start = -1;
  double loglik = -std::numeric_limits<double>::infinity();
  bool ok = false;
};

/// Index of the start with the highest finite log-likelihood, or -1.
inline int best_start(const std::vector<EmemStart>& starts) {
  int best = -1;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!starts[s].ok || !std::isfinite(starts[s].loglik)) continue;
    if (best < 0 || starts[s].loglik > starts[static_cast<std::size_t>(best)].loglik) best = static_cast<int>(s);
  }
  return best;
}

struct EmemResult {
  GhMixture mixture;  ///< parameters after the winning burn-in
  int best_start = -1;
  std::vector<EmemStart> starts;
};

/// emEM: emem_starts random soft starts, each run for emem_burn_iters
/// iterations; returns the run with the highest finite log-likelihood.
inline EmemResult init_emem(const Matrix& data, int G, Constraint constraint, const SearchConfig& cfg) {
  EmemResult out;
  std::optional<GhMixture> best;
  for (int s = 0; s < cfg.emem_starts; ++s) {
    EmemStart rec{s};
    try {
      em::FitResult r = emem_burn_in(data, G, constraint, cfg, s);
      rec.loglik = r.loglik;
      rec.ok = std::isfinite(r.loglik);
      if (rec.ok && (!best || r.loglik > out.starts[static_cast<std::size_t>(out.best_start)].loglik)) {
        best = std::move(r.mixture);
        out.best_start = s;
      }
    } catch (const Error&) {
    }
    out.starts.push_back(rec);
  }
  if (!best) throw Error("emEM: every start failed");
  out.mixture = std::move(*best);
  return out;
}

struct ModelFit {
  int G = 0;
  Constraint constraint = Constraint::VVV;
  int emem_best_start = -1;  ///< -1 for k-means starts
  em::FitResult result;
};

struct ModelFailure {
  int G = 0;
  Constraint constraint = Constraint::VVV;
  std::string message;
};

struct SearchResult {
  std::vector<ModelFit> ranked;  ///< descending BIC; winner first
  std::vector<ModelFailure> failures;

  const ModelFit& winner() const { return ranked.front(); }
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GHMIX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(k) for k in [0, count) on up to `threads` workers.
template <class Task>
void parallel_for(std::size_t count, int threads, Task task) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) task(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) task(k);
    });
  }
  for (auto& t : pool) t.join();
}

/// Ranks by BIC (higher is better), ties by G then constraint order.
inline void rank_models(std::vector<ModelFit>& fits) {
  std::stable_sort(fits.begin(), fits.end(), [](const ModelFit& x, const ModelFit& y) {
    if (x.result.bic != y.result.bic) return x.result.bic > y.result.bic;
    if (x.G != y.G) return x.G < y.G;
    return constraint_index(x.constraint) < constraint_index(y.constraint);
  });
}

/// Fits every (G, constraint) pair in the configuration and ranks the
/// successful fits by BIC.
inline SearchResult select_model(const Matrix& data, const SearchConfig& cfg) {
  validate(cfg);
  struct Model {
    int G;
    Constraint constraint;
  };
  std::vector<Model> models;
  for (int G = cfg.g_min; G <= cfg.g_max; ++G)
    for (Constraint c : cfg.constraints) models.push_back({G, c});
  const int threads = resolve_threads(cfg.threads);

  // Starting mixtures. Every slot is written by exactly one task.
  std::vector<std::optional<GhMixture>> starts(models.size());
  std::vector<int> chosen_start(models.size(), -1);
  std::vector<std::string> errors(models.size());
  if (cfg.init == InitMethod::emem) {
    const std::size_t per_model = static_cast<std::size_t>(cfg.emem_starts);
    std::vector<std::optional<em::FitResult>> burn(models.size() * per_model);
    parallel_for(burn.size(), threads, [&](std::size_t k) {
      const Model& m = models[k / per_model];
      if (data.rows() <= m.G) return;
      try {
        burn[k] = emem_burn_in(data, m.G, m.constraint, cfg, static_cast<int>(k % per_model));
      } catch (const Error&) {
      }
    });
    for (std::size_t j = 0; j < models.size(); ++j) {
      std::vector<EmemStart> recs;
      for (std::size_t s = 0; s < per_model; ++s) {
        const auto& r = burn[j * per_model + s];
        recs.push_back({static_cast<int>(s), r ? r->loglik : -std::numeric_limits<double>::infinity(),
                        r && std::isfinite(r->loglik)});
      }
      const int b = best_start(recs);
      if (b < 0) {
        errors[j] = "emEM: every start failed";
        continue;
      }
      chosen_start[j] = b;
      starts[j] = burn[j * per_model + static_cast<std::size_t>(b)]->mixture;
    }
  }

  std::vector<std::optional<em::FitResult>> results(models.size());
  parallel_for(models.size(), threads, [&](std::size_t j) {
    const Model& m = models[j];
    try {
      if (cfg.init == InitMethod::kmeans) {
        Rng rng = stream_for(cfg.seed, m.G, m.constraint, 0);
        starts[j] = init_kmeans_mixture(data, m.G, m.constraint, rng, cfg.fit.ridge);
      }
      if (!starts[j]) return;
      results[j] = em::fit(data, *starts[j], cfg.fit);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  });

  SearchResult out;
  for (std::size_t j = 0; j < models.size(); ++j) {
    if (results[j]) {
      out.ranked.push_back({models[j].G, models[j].constraint, chosen_start[j], std::move(*results[j])});
    } else {
      out.failures.push_back({models[j].G, models[j].constraint, errors[j].empty() ? "fit failed" : errors[j]});
    }
  }
  if (out.ranked.empty()) throw Error("model search: every fit failed");
  rank_models(out.ranked);
  return out;
}

}  // namespace ghmix::search
