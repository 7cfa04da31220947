#pragma once

/**
 * @file suite.hpp
 * @brief Acceptance checks: one pass/fail verdict per criterion.
 */

#include "ccslab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace ccslab {

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

inline std::string format_check(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " [%.1f s]", r.seconds);
  return "criterion " + std::to_string(r.id) + " " + (r.pass ? "PASS" : "FAIL") + "  " + r.title + ": " + r.detail +
         buf;
}

namespace detail {

inline std::string sci(double x, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// Gauss-Legendre nodes and weights on [a, b].
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? t : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (t * pn - pm) / (t * t - 1.0);
      const double dt = pn / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    const double wi = 2.0 / ((1.0 - t * t) * dp * dp);
    x[i] = 0.5 * (a + b) - 0.5 * (b - a) * t;
    x[n - 1 - i] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    w[i] = w[n - 1 - i] = 0.5 * (b - a) * wi;
  }
}

inline Label random_label(std::mt19937_64& rng, int d, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Label z(d);
  for (int a = 0; a < d; ++a) z[a] = {g(rng), g(rng)};
  return z;
}

inline double rel_err(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace detail

/// Standard configurations of the benchmark runs.
namespace presets {

inline RunConfig doublewell_grid(int N) {
  RunConfig c;
  c.experiment = Experiment::DoubleWellFidelity;
  c.scheme = Scheme::NonUnitary;
  c.model = ModelKind::DoubleWell;
  c.omega = 1.0;
  c.chi = 1.0;
  c.N = {N};
  c.sampler = SamplerKind::Grid;
  c.center = Label::Constant(1, su2_label(kPi / 4, 0.0));
  c.spacing_eta = c.spacing_zeta = 0.07;
  c.extent_eta = c.extent_zeta = 8;
  c.reference_N = 100;
  c.t_final = 10.0;
  c.samples = 101;
  c.tol = 1e-8;
  c.output = "doublewell.csv";
  return c;
}

inline Label triplewell_center() {
  const double x = std::tan(kPi / 8) / std::sqrt(2.0);
  return Label::Constant(2, Complex{x, 0.0});
}

inline RunConfig triplewell_conditioned(int M, std::uint64_t seed) {
  RunConfig c;
  c.experiment = Experiment::TripleWellOccupation;
  c.scheme = Scheme::Unitary;
  c.model = ModelKind::TripleWell;
  c.omega = -1.0;
  c.chi = -1.0;
  c.N = {100};
  c.sampler = SamplerKind::Conditioned;
  c.center = triplewell_center();
  c.sigma_theta = {kPi / 20, kPi / 20};
  c.sigma_phi = {kPi / 10, kPi / 10};
  c.epsilon_limit = 1e10;
  c.target_M = {M};
  c.seed = seed;
  c.t_final = 10.0;
  c.samples = 101;
  c.tol = 1e-8;
  c.output = "triplewell.csv";
  return c;
}

}  // namespace presets

/// Runs the acceptance criteria, sharing expensive runs between them.
class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(Logger log = nullptr) : log_(std::move(log)) {}

  static constexpr int kCount = 9;

  CheckResult check(int id) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    r.id = id;
    try {
      switch (id) {
        case 1: r = c1(); break;
        case 2: r = c2(); break;
        case 3: r = c3(); break;
        case 4: r = c4(); break;
        case 5: r = c5(); break;
        case 6: r = c6(); break;
        case 7: r = c7(); break;
        case 8: r = c8(); break;
        case 9: r = c9(); break;
        default: throw InvalidArgument("no criterion " + std::to_string(id));
      }
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.id = id;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  std::vector<CheckResult> run_all() {
    std::vector<CheckResult> out;
    for (int i = 1; i <= kCount; ++i) {
      out.push_back(check(i));
      if (log_) log_(format_check(out.back()));
    }
    return out;
  }

 private:
  const Table& doublewell(int N) {
    auto it = dw_.find(N);
    if (it == dw_.end()) it = dw_.emplace(N, run_doublewell_fidelity(presets::doublewell_grid(N), {N, 1}, log_)).first;
    return it->second;
  }

  const Table& triplewell(int M, std::uint64_t seed) {
    const auto key = std::make_pair(M, seed);
    auto it = tw_.find(key);
    if (it == tw_.end())
      it = tw_.emplace(key, run_triplewell_occupation(presets::triplewell_conditioned(M, seed), {100, M}, log_)).first;
    return it->second;
  }

  static double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  }

  CheckResult c1() {
    const auto& t = doublewell(100);
    const auto F = t.values("fidelity");
    const double fmin = *std::min_element(F.begin(), F.end());
    return {1, "double-well fidelity, non-unitary grid, N=100", fmin >= 0.95,
            "min F = " + detail::sci(fmin, 6) + " over Omega t in [0,10] with M = " + t.meta_value("basis_size") +
                " (need >= 0.95)"};
  }

  CheckResult c2() {
    std::vector<double> avg;
    std::string d;
    for (int N : {20, 100, 1000}) {
      const auto& t = doublewell(N);
      avg.push_back(mean(t.values("fidelity")));
      d += "N=" + std::to_string(N) + ": <F> = " + detail::sci(avg.back(), 6) + " (M=" + t.meta_value("basis_size") +
           ") ";
    }
    bool ok = true;
    for (std::size_t i = 1; i < avg.size(); ++i) ok = ok && avg[i] >= avg[i - 1] - 0.005;
    return {2, "fidelity non-decreasing in N", ok, d + "(steps may drop by <= 0.005)"};
  }

  CheckResult c3() {
    std::string d;
    bool any = false;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto& t = triplewell(60, seed);
      double err = 0.0, qmax = 0.0;
      for (const auto& row : t.rows) {
        const double tau = row[t.column("Omega_t")];
        const double q = row[t.column("Q_ccs")], qe = row[t.column("Q_exact")];
        qmax = std::max(qmax, qe);
        if (tau <= 8.0 + 1e-12) err = std::max(err, std::abs(q - qe));
      }
      const double ratio = err / qmax;
      any = any || ratio <= 0.05;
      d += "seed " + std::to_string(seed) + ": " + detail::sci(ratio, 3) + "; ";
    }
    return {3, "triple-well b3 occupation, unitary M=60", any,
            "max_{|Omega|t<=8} |Q_ccs - Q_exact| / max Q_exact: " + d + "need <= 0.05 for one seed"};
  }

  CheckResult c4() {
    const auto fam = FamilyDescriptor::sun(3, 100);
    std::string d;
    bool ok = true;
    for (double lim : {1e8, 1e10, 1e12}) {
      auto cfg = presets::triplewell_conditioned(60, 1);
      ConditionedConfig c;
      c.center = cfg.center;
      c.sigma_theta = cfg.sigma_theta;
      c.sigma_phi = cfg.sigma_phi;
      c.epsilon_limit = lim;
      c.target_M = 60;
      c.seed = cfg.seed;
      const auto e = sample_conditioned(fam, c);
      const double eps = conditioning_factor(overlap_matrix(fam, e.labels));
      ok = ok && eps >= 1e6 && eps <= 1e10;
      d += "limit " + detail::sci(lim, 2) + ": eps(0) = " + detail::sci(eps, 3) + "; ";
    }
    return {4, "conditioning regime of the M=60 ensemble", ok, d + "need eps(0) in [1e6, 1e10]"};
  }

  CheckResult c5() {
    auto cfg = presets::doublewell_grid(100);
    cfg.chi = 0.0;
    cfg.scheme = Scheme::Classical;
    cfg.sampler = SamplerKind::Single;
    cfg.tol = 1e-10;
    const auto t = run_doublewell_fidelity(cfg, {100, 1}, log_);
    const auto F = t.values("fidelity");
    const double fmin = *std::min_element(F.begin(), F.end());
    return {5, "exact limit: chi=0, classical scheme, M=1", fmin >= 1.0 - 1e-6,
            "1 - min F = " + detail::sci(1.0 - fmin, 3) + " (need <= 1e-6)"};
  }

  CheckResult c6() {
    const HamiltonianModel model(TripleWell{-1.0, -1.0, 100});
    const auto traj = propagate_trajectory(model, model.family(), presets::triplewell_center(), 10.0, 1e-10, 101);
    const auto kb3 = b3_occupation_kernel(100);
    double dz = 0.0, q = 0.0;
    for (const auto& z : traj.labels) {
      dz = std::max(dz, std::abs(z[0] - z[1]));
      const CVector zc = z.conjugate();
      q = std::max(q, std::abs(kb3(as_span(zc), as_span(z)).real()));
    }
    return {6, "invariance of z1 = z2 under the classical triple-well flow", dz <= 1e-9 && q <= 1e-10,
            "max |z1 - z2| = " + detail::sci(dz, 3) + " (<= 1e-9), max |Q| = " + detail::sci(q, 3) + " (<= 1e-10)"};
  }

  CheckResult c7() {
    std::mt19937_64 rng(7);
    std::string d;
    bool ok = true;

    // Metric against the mixed finite-difference Hessian, gradient against
    // the first difference.
    const std::vector<FamilyDescriptor> fams{FamilyDescriptor::spin(1.5), FamilyDescriptor::sun(3, 5),
                                             FamilyDescriptor::canonical(2), FamilyDescriptor::thouless(2, 2)};
    double worst_g = 0.0, worst_grad = 0.0;
    for (const auto& fam : fams) {
      const int dim = label_dim(fam);
      for (int trial = 0; trial < 5; ++trial) {
        const Label z = detail::random_label(rng, dim, 0.4);
        const Label zc = z.conjugate();
        const double h = 1e-4;
        CMatrix fd(dim, dim);
        for (int a = 0; a < dim; ++a) {
          for (int b = 0; b < dim; ++b) {
            auto f = [&](double sb, double sa) {
              Label s = zc, p = z;
              s[b] += sb;
              p[a] += sa;
              return log_overlap(fam, s, p);
            };
            fd(a, b) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
          }
        }
        worst_g = std::max(worst_g, detail::rel_err(metric(fam, z), fd));

        const Label zs = detail::random_label(rng, dim, 0.4), zp = detail::random_label(rng, dim, 0.4);
        CVector gfd(dim);
        const double hg = 1e-5;
        for (int a = 0; a < dim; ++a) {
          Label sp = zs, sm = zs;
          sp[a] += hg;
          sm[a] -= hg;
          gfd[a] = (log_overlap(fam, sp, zp) - log_overlap(fam, sm, zp)) / (2.0 * hg);
        }
        worst_grad = std::max(worst_grad, detail::rel_err(grad_f_conj(fam, zs, zp), gfd));
      }
    }
    ok = ok && worst_g <= 1e-5 && worst_grad <= 1e-6;
    d += "metric rel err " + detail::sci(worst_g, 2) + ", gradient rel err " + detail::sci(worst_grad, 2) + "; ";

    // Closure: integral of d mu |<psi|z>|^2 over the plane for random |psi>.
    double worst_closure = 0.0;
    std::vector<double> xt, wt;
    detail::gauss_legendre(160, 0.0, kPi, xt, wt);
    const int nphi = 48;
    for (int twoJ = 1; twoJ <= 10; ++twoJ) {
      const auto fam = FamilyDescriptor::spin(0.5 * twoJ);
      const auto basis = FockBasis::spin(twoJ);
      CVector psi(basis->size());
      std::normal_distribution<double> g;
      for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = {g(rng), g(rng)};
      psi.normalize();
      double acc = 0.0;
      for (std::size_t i = 0; i < xt.size(); ++i) {
        const double th = xt[i];
        const double r = std::tan(0.5 * th);
        const double jac = r * 0.5 / (std::cos(0.5 * th) * std::cos(0.5 * th));
        for (int k = 0; k < nphi; ++k) {
          const Label z = Label::Constant(1, su2_label(th, 2.0 * kPi * k / nphi));
          const auto c = fock_coefficients(fam, z, basis);
          acc += wt[i] * (2.0 * kPi / nphi) * jac * measure_density(fam, z) * std::norm(c.amps.dot(psi));
        }
      }
      worst_closure = std::max(worst_closure, std::abs(acc - 1.0));
    }
    {
      const auto fam = FamilyDescriptor::canonical(1, 12);
      const auto basis = FockBasis::canonical(1, 12);
      CVector psi(basis->size());
      std::normal_distribution<double> g;
      for (Eigen::Index i = 0; i < psi.size(); ++i) psi[i] = {g(rng), g(rng)};
      psi.normalize();
      std::vector<double> xr, wr;
      detail::gauss_legendre(200, 0.0, 12.0, xr, wr);
      double acc = 0.0;
      for (std::size_t i = 0; i < xr.size(); ++i) {
        for (int k = 0; k < 2 * nphi; ++k) {
          const Label z = Label::Constant(1, std::polar(xr[i], 2.0 * kPi * k / (2 * nphi)));
          const auto c = fock_coefficients(fam, z, basis);
          acc += wr[i] * (2.0 * kPi / (2 * nphi)) * xr[i] * measure_density(fam, z) * std::norm(c.amps.dot(psi));
        }
      }
      worst_closure = std::max(worst_closure, std::abs(acc - 1.0));
    }
    ok = ok && worst_closure <= 1e-3;
    d += "closure |I - 1| <= " + detail::sci(worst_closure, 2) + " (spin J <= 5, canonical n=1); ";

    // Thouless N=1, M=1: kappa and Monte-Carlo normalization with the
    // per-entry proposal 1/(pi (1 + |z|^2)^2).
    const auto th = FamilyDescriptor::thouless(1, 1);
    const double kappa = closure_kappa(th);
    std::mt19937_64 mc(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const long samples = 1'000'000;
    double acc = 0.0;
    for (long s = 0; s < samples; ++s) {
      const double uu = u(mc);
      const double r = std::sqrt(uu / (1.0 - uu));
      const Label z = Label::Constant(1, std::polar(r, 2.0 * kPi * u(mc)));
      const double q = 1.0 / (kPi * (1.0 + r * r) * (1.0 + r * r));
      const double ref = std::exp(-log_overlap(th, z.conjugate(), z).real());
      acc += measure_density(th, z) * ref / q;
    }
    const double mc_norm = acc / samples;
    ok = ok && std::abs(kappa - 2.0) <= 1e-12 && std::abs(mc_norm - 1.0) <= 5e-3;
    d += "Thouless kappa = " + detail::sci(kappa, 12) + ", MC norm = " + detail::sci(mc_norm, 6);
    return {7, "geometry properties", ok, d};
  }

  CheckResult c8() {
    std::string d;
    bool ok = true;

    // Unitary norm on a well-conditioned SU(2) ensemble.
    {
      const HamiltonianModel model(DoubleWell{1.0, 1.0, 100});
      const auto fam = model.family();
      ConditionedConfig c;
      c.center = Label::Constant(1, su2_label(kPi / 4, 0.0));
      // Wider than the triple-well widths: 20 SU(2) states at N = 100 do not
      // fit under the limit inside (pi/20, pi/10).
      c.sigma_theta = {kPi / 10};
      c.sigma_phi = {kPi / 5};
      c.epsilon_limit = 1e8;
      c.target_M = 20;
      c.seed = 1;
      const auto e = sample_conditioned(fam, c);
      BasisEnsemble ens(model, Scheme::Unitary, e.labels);
      initialize_amplitudes(ens, c.center);
      const double n0 = ensemble_norm(ens);
      double worst = 0.0;
      int checked = 0;
      bool conditioned = true;
      propagate(ens, detail::uniform_grid(10.0, 101), {1e-9, kEpsilonGuard}, [&](const BasisEnsemble& b) {
        if (!conditioned || b.time == 0.0) return;
        if (conditioning_factor(overlap_matrix(b)) > c.epsilon_limit) {
          conditioned = false;
          return;
        }
        worst = std::max(worst, std::abs(ensemble_norm(b) - n0) / b.time);
        ++checked;
      });
      ok = ok && checked > 0 && worst <= 1e-6;
      d += "norm drift " + detail::sci(worst, 2) + "/unit time over " + std::to_string(checked) +
           " samples (<= 1e-6); ";
    }

    // Energy along classical orbits.
    {
      std::mt19937_64 rng(8);
      const double tol = 1e-9;
      double worst = 0.0;
      const std::vector<HamiltonianModel> models{HamiltonianModel(DoubleWell{1.0, 1.0, 100}),
                                                 HamiltonianModel(TripleWell{-1.0, -1.0, 100})};
      for (const auto& m : models) {
        for (int trial = 0; trial < 5; ++trial) {
          const Label z0 = detail::random_label(rng, label_dim(m.family()), 0.6);
          const auto traj = propagate_trajectory(m, m.family(), z0, 10.0, tol, 101);
          const double e0 = classical_energy(m, z0);
          for (const auto& z : traj.labels)
            worst = std::max(worst, std::abs(classical_energy(m, z) - e0) / std::abs(e0));
        }
      }
      ok = ok && worst <= 100.0 * tol;
      d += "energy drift " + detail::sci(worst, 2) + " (<= 1e-7); ";
    }

    // Closed-form flow against the metric solve.
    {
      std::mt19937_64 rng(9);
      std::uniform_real_distribution<double> par(-2.0, 2.0);
      double worst = 0.0;
      for (int kind = 0; kind < 2; ++kind) {
        for (int i = 0; i < 100; ++i) {
          const int N = 2 + static_cast<int>(rng() % 200);
          const HamiltonianModel m = kind == 0 ? HamiltonianModel(DoubleWell{par(rng), par(rng), N})
                                               : HamiltonianModel(TripleWell{par(rng), par(rng), N});
          const Label z = detail::random_label(rng, label_dim(m.family()), 0.8);
          const CVector a = zdot(m, z), b = zdot_variational(m, m.family(), z);
          worst = std::max(worst, (a - b).norm() / std::max(b.norm(), 1e-300));
        }
      }
      ok = ok && worst <= 1e-8;
      d += "zdot vs metric solve rel err " + detail::sci(worst, 2) + " (<= 1e-8)";
    }
    return {8, "conservation properties", ok, d};
  }

  CheckResult c9() {
    std::string d;
    int best_e = -1, best_q = -1;
    double min_e = 1e300, min_q = 1e300;
    for (int M : {10, 20, 30, 60}) {
      const auto& t = triplewell(M, 1);
      const auto E = t.values("E_ccs");
      const auto Q = t.values("Q_ccs");
      const auto Qe = t.values("Q_exact");
      double de = 0.0, dq = 0.0;
      for (std::size_t i = 0; i < E.size(); ++i) {
        de = std::max(de, std::abs(E[i] - E[0]));
        dq = std::max(dq, std::abs(Q[i] - Qe[i]));
      }
      if (de < min_e) {
        min_e = de;
        best_e = M;
      }
      if (dq < min_q) {
        min_q = dq;
        best_q = M;
      }
      d += "M=" + std::to_string(M) + ": max|dE| = " + detail::sci(de, 3) + ", max|dQ| = " + detail::sci(dq, 3) + "; ";
    }
    return {9, "energy conservation ranks accuracy (seed 1)", best_e == best_q,
            d + "smallest dE at M=" + std::to_string(best_e) + ", smallest dQ at M=" + std::to_string(best_q)};
  }

  Logger log_;
  std::map<int, Table> dw_;
  std::map<std::pair<int, std::uint64_t>, Table> tw_;
};

}  // namespace ccslab
