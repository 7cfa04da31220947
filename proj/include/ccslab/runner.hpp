#pragma once

/**
 * @file runner.hpp
 * @brief Experiment drivers, exact-oracle caching, CSV output.
 */

#include "ccslab/config.hpp"
#include "ccslab/exact.hpp"
#include "ccslab/propagator.hpp"
#include "ccslab/sampler.hpp"
#include "ccslab/trajectory.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <future>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <unistd.h>
#include <vector>

namespace ccslab {

inline constexpr const char* kVersion = "0.1.0";

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw InvalidArgument("no column named " + name);
  }

  std::vector<double> values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }

  std::string meta_value(const std::string& key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    return {};
  }
};

/// CSV text: '#'-prefixed metadata, a header row, then rows in %.16e.
inline std::string to_csv(const Table& t) {
  std::string s;
  for (const auto& [k, v] : t.meta) s += "# " + k + " = " + v + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) s += (i ? "," : "") + t.columns[i];
  s += "\n";
  char buf[40];
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.16e", r[i]);
      if (i) s += ",";
      s += buf;
    }
    s += "\n";
  }
  return s;
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Exact oracle cache

/// Exact b3 occupation series and propagators shared between runs with equal
/// model parameters; each is computed once per process.
class ExactCache {
 public:
  static ExactCache& instance() {
    static ExactCache c;
    return c;
  }

  std::shared_ptr<const SpectralPropagator> get(ModelKind kind, double omega, double chi, int N) {
    std::shared_future<std::shared_ptr<const SpectralPropagator>> fut;
    std::promise<std::shared_ptr<const SpectralPropagator>> prom;
    bool owner = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto key = std::make_tuple(kind, omega, chi, N);
      auto it = cache_.find(key);
      if (it == cache_.end()) {
        fut = prom.get_future().share();
        cache_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        if (kind == ModelKind::DoubleWell) {
          prom.set_value(std::make_shared<SpectralPropagator>(build_h_doublewell(omega, chi, N), FockBasis::spin(N)));
        } else {
          prom.set_value(
              std::make_shared<SpectralPropagator>(build_h_triplewell(omega, chi, N), FockBasis::sun(3, N)));
        }
      } catch (...) {
        prom.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<ModelKind, double, double, int>, std::shared_future<std::shared_ptr<const SpectralPropagator>>>
      cache_;
};

// ---------------------------------------------------------------------------
// Runs

/// One (N, M) instance of a configuration.
struct RunInstance {
  int N = 2;
  int target_M = 1;
};

using Logger = std::function<void(const std::string&)>;

namespace detail {

inline HamiltonianModel make_model(const RunConfig& cfg, int N) {
  if (cfg.model == ModelKind::DoubleWell) return HamiltonianModel(DoubleWell{cfg.omega, cfg.chi, N});
  return HamiltonianModel(TripleWell{cfg.omega, cfg.chi, N});
}

/// Dimensionless output grid |Omega| t and the matching physical times.
inline std::pair<std::vector<double>, std::vector<double>> time_grids(const RunConfig& cfg) {
  const auto tau = uniform_grid(cfg.t_final, cfg.samples);
  const double scale = cfg.omega != 0.0 ? 1.0 / std::abs(cfg.omega) : 1.0;
  std::vector<double> t(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) t[i] = tau[i] * scale;
  return {tau, t};
}

struct InitialEnsemble {
  std::vector<Label> labels;
  RVector weights;
  double epsilon0 = 1.0;
};

inline InitialEnsemble build_initial(const RunConfig& cfg, const FamilyDescriptor& fam, int N, int target_M) {
  InitialEnsemble out;
  switch (cfg.sampler) {
    case SamplerKind::Single:
      out.labels = {cfg.center};
      out.weights = RVector::Ones(1);
      break;
    case SamplerKind::Grid: {
      GridConfig g;
      g.center = cfg.center[0];
      g.spacing_eta = cfg.spacing_eta;
      g.spacing_zeta = cfg.spacing_zeta;
      g.extent_eta = cfg.extent_eta;
      g.extent_zeta = cfg.extent_zeta;
      g.reference_N = cfg.reference_N;
      auto grid = grid_su2(g, N);
      out.labels = std::move(grid.labels);
      out.weights = RVector::Constant(static_cast<Eigen::Index>(out.labels.size()), grid.weight);
      break;
    }
    case SamplerKind::Conditioned: {
      ConditionedConfig c;
      c.center = cfg.center;
      c.sigma_theta = cfg.sigma_theta;
      c.sigma_phi = cfg.sigma_phi;
      c.epsilon_limit = cfg.epsilon_limit;
      c.target_M = target_M;
      c.max_attempts = cfg.max_attempts;
      c.width_mode = cfg.width_mode;
      c.seed = cfg.seed;
      auto e = sample_conditioned(fam, c);
      out.labels = std::move(e.labels);
      out.weights = RVector::Ones(static_cast<Eigen::Index>(out.labels.size()));
      break;
    }
  }
  out.epsilon0 = conditioning_factor(overlap_matrix(fam, out.labels));
  return out;
}

inline void common_meta(Table& t, const RunConfig& cfg, int N, std::size_t M, double eps0) {
  t.meta = {{"ccslab", kVersion},
            {"experiment", experiment_name(cfg.experiment)},
            {"config_hash", config_hash(cfg)},
            {"seed", std::to_string(cfg.seed)},
            {"tol", fmt_double(cfg.tol)},
            {"scheme", scheme_name(cfg.scheme)},
            {"omega", fmt_double(cfg.omega)},
            {"chi", fmt_double(cfg.chi)},
            {"N", std::to_string(N)},
            {"basis_size", std::to_string(M)},
            {"epsilon0", fmt_double(eps0)}};
}

}  // namespace detail

/// Columns: Omega_t, fidelity, norm (reconstructed norm before renormalization).
inline Table run_doublewell_fidelity(const RunConfig& cfg, const RunInstance& run, const Logger& log = nullptr) {
  const auto model = detail::make_model(cfg, run.N);
  const auto& fam = model.family();
  const auto init = detail::build_initial(cfg, fam, run.N, run.target_M);
  if (log) log("doublewell N=" + std::to_string(run.N) + " M=" + std::to_string(init.labels.size()));

  BasisEnsemble ens(model, cfg.scheme, init.labels, cfg.scheme == Scheme::NonUnitary ? init.weights : RVector{});
  initialize_amplitudes(ens, cfg.center);

  const auto exact = ExactCache::instance().get(ModelKind::DoubleWell, cfg.omega, cfg.chi, run.N);
  const auto basis = exact->basis();
  const auto psi0 = fock_coefficients(fam, cfg.center, basis);
  const auto [tau, times] = detail::time_grids(cfg);
  const auto psi_exact = exact->evolve(psi0, times);

  Table t;
  detail::common_meta(t, cfg, run.N, init.labels.size(), init.epsilon0);
  t.meta.emplace_back("basis_order", basis->describe());
  t.columns = {"Omega_t", "fidelity", "norm"};
  std::size_t i = 0;
  propagate(ens, times, {cfg.tol, cfg.epsilon_guard}, [&](const BasisEnsemble& e) {
    const auto raw = reconstruct_fock_raw(e, basis);
    const double nrm = raw.norm();
    const double F = nrm > 0.0 ? fidelity(psi_exact[i], raw.normalized()) : 0.0;
    t.rows.push_back({tau[i], F, nrm});
    ++i;
  });
  return t;
}

/// Columns: Omega_t, Q_ccs, Q_exact, E_ccs, epsilon, norm.
inline Table run_triplewell_occupation(const RunConfig& cfg, const RunInstance& run, const Logger& log = nullptr) {
  const auto model = detail::make_model(cfg, run.N);
  const auto& fam = model.family();
  const auto init = detail::build_initial(cfg, fam, run.N, run.target_M);
  if (log) {
    log("triplewell N=" + std::to_string(run.N) + " M=" + std::to_string(init.labels.size()) +
        " epsilon0=" + detail::fmt_double(init.epsilon0));
  }

  BasisEnsemble ens(model, cfg.scheme, init.labels, cfg.scheme == Scheme::NonUnitary ? init.weights : RVector{});
  initialize_amplitudes(ens, cfg.center);

  const auto exact = ExactCache::instance().get(ModelKind::TripleWell, cfg.omega, cfg.chi, run.N);
  const auto basis = exact->basis();
  const auto psi0 = fock_coefficients(fam, cfg.center, basis);
  const auto [tau, times] = detail::time_grids(cfg);
  std::vector<double> q_exact;
  for (const auto& psi : exact->evolve(psi0, times)) q_exact.push_back(b3_occupation_exact(psi));

  const auto kb3 = b3_occupation_kernel(run.N);
  const auto ke = energy_kernel(model);
  Table t;
  detail::common_meta(t, cfg, run.N, init.labels.size(), init.epsilon0);
  t.meta.emplace_back("basis_order", basis->describe());
  t.columns = {"Omega_t", "Q_ccs", "Q_exact", "E_ccs", "epsilon", "norm"};
  std::size_t i = 0;
  propagate(ens, times, {cfg.tol, cfg.epsilon_guard}, [&](const BasisEnsemble& e) {
    const double q = observable_continued(e, kb3).value;
    const double en = observable_continued(e, ke).value;
    const double eps = conditioning_factor(overlap_matrix(e));
    t.rows.push_back({tau[i], q, q_exact[i], en, eps, ensemble_norm(e)});
    ++i;
  });
  return t;
}

/// Columns: Omega_t, then re_z<a>, im_z<a> per component, S, E, and Q for
/// the triple well.
inline Table run_classical_single(const RunConfig& cfg, const RunInstance& run, const Logger& log = nullptr) {
  const auto model = detail::make_model(cfg, run.N);
  const auto& fam = model.family();
  if (log) log("classical N=" + std::to_string(run.N));
  const auto [tau, times] = detail::time_grids(cfg);
  const auto traj = propagate_trajectory(model, fam, cfg.center, times, cfg.tol);
  Table t;
  detail::common_meta(t, cfg, run.N, 1, 1.0);
  t.columns = {"Omega_t"};
  const auto d = cfg.center.size();
  for (Eigen::Index a = 0; a < d; ++a) {
    t.columns.push_back("re_z" + std::to_string(a + 1));
    t.columns.push_back("im_z" + std::to_string(a + 1));
  }
  t.columns.push_back("S");
  t.columns.push_back("E");
  const bool tw = cfg.model == ModelKind::TripleWell;
  if (tw) t.columns.push_back("Q");
  const auto kb3 = b3_occupation_kernel(run.N);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<double> row{tau[i]};
    const auto& z = traj.labels[i];
    for (Eigen::Index a = 0; a < d; ++a) {
      row.push_back(z[a].real());
      row.push_back(z[a].imag());
    }
    row.push_back(traj.actions[i]);
    row.push_back(classical_energy(model, z));
    if (tw) {
      const CVector zc = z.conjugate();
      row.push_back(kb3(as_span(zc), as_span(z)).real());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Expands the N (and M) lists into independent runs.
inline std::vector<RunInstance> expand_runs(const RunConfig& cfg) {
  std::vector<RunInstance> out;
  const std::vector<int> ms = cfg.sampler == SamplerKind::Conditioned ? cfg.target_M : std::vector<int>{1};
  for (int n : cfg.N)
    for (int m : ms) out.push_back({n, m});
  return out;
}

inline std::filesystem::path output_path(const RunConfig& cfg, const RunInstance& run, std::size_t total,
                                         const std::filesystem::path& dir) {
  std::filesystem::path p(cfg.output);
  if (total > 1) {
    std::string name = p.stem().string() + "_N" + std::to_string(run.N);
    if (cfg.sampler == SamplerKind::Conditioned) name += "_M" + std::to_string(run.target_M);
    p.replace_filename(name + p.extension().string());
  }
  return dir.empty() ? p : dir / p;
}

inline Table run_instance(const RunConfig& cfg, const RunInstance& run, const Logger& log = nullptr) {
  switch (cfg.experiment) {
    case Experiment::DoubleWellFidelity: return run_doublewell_fidelity(cfg, run, log);
    case Experiment::TripleWellOccupation: return run_triplewell_occupation(cfg, run, log);
    case Experiment::ClassicalSingle: return run_classical_single(cfg, run, log);
    case Experiment::PropertySuite: break;
  }
  throw ConfigError("property-suite is run through `ccslab suite`");
}

/// Worker count from CCSLAB_THREADS (0 or unset: hardware concurrency).
inline unsigned worker_count(std::size_t tasks) {
  unsigned n = 0;
  if (const char* env = std::getenv("CCSLAB_THREADS")) {
    try {
      n = static_cast<unsigned>(std::max(0L, std::stol(env)));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

/// Runs every instance (in parallel up to worker_count) and returns the
/// tables in instance order. The first failure in instance order is rethrown.
inline std::vector<Table> run_all(const RunConfig& cfg, const Logger& log = nullptr) {
  const auto runs = expand_runs(cfg);
  std::vector<Table> tables(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  std::mutex log_mu;
  Logger safe_log;
  if (log) {
    safe_log = [&](const std::string& s) {
      std::lock_guard<std::mutex> lock(log_mu);
      log(s);
    };
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        tables[i] = run_instance(cfg, runs[i], safe_log);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned nw = worker_count(runs.size());
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return tables;
}

}  // namespace ccslab
