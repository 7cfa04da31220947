#pragma once

/**
 * @file propagator.hpp
 * @brief Coupled coherent-state propagation over a trajectory-guided basis.
 *
 * Each basis element j carries a label z_j(t) following the classical flow,
 * an action S_j(t), and an amplitude C_j(t) with <z_j|psi> = C_j e^{i S_j}.
 * The amplitudes obey
 *
 *   unitary:      i dC_j/dt = sum_k Omega_jk d2H_jk e^{i(S_k - S_j)} D_k,
 *                 sum_k Omega_lk e^{i(S_k - S_l)} D_k = C_l,
 *   non-unitary:  i dC_j/dt = sum_k lambda_k Omega_jk d2H_jk e^{i(S_k - S_j)} C_k,
 *   classical:    M = 1, C constant,
 *
 * with the coupling
 *
 *   d2H_jk = H(z_j*, z_k) - H(z_j*, z_j)
 *            + i sum_a [df(z_j*, z_k)/dz_j*_a - df(z_j*, z_j)/dz_j*_a] zdot*_ja.
 *
 * Labels, actions and amplitudes are advanced as one ODE system under a
 * single adaptive error control. The inverse overlap matrix is never formed.
 */

#include "ccslab/fock.hpp"
#include "ccslab/trajectory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <limits>
#include <optional>
#include <vector>

namespace ccslab {

enum class Scheme { Unitary, NonUnitary, Classical };

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Unitary: return "unitary";
    case Scheme::NonUnitary: return "nonunitary";
    case Scheme::Classical: return "classical";
  }
  return "?";
}

struct BasisEnsemble {
  FamilyDescriptor fam;
  HamiltonianModel model;
  Scheme scheme = Scheme::Unitary;
  double time = 0.0;
  std::vector<Label> labels;
  RVector actions;
  CVector C;
  CVector D;        // unitary and classical schemes
  RVector weights;  // non-unitary scheme

  BasisEnsemble(HamiltonianModel m, Scheme s, std::vector<Label> zs, RVector lambda = {})
      : fam(m.family()), model(std::move(m)), scheme(s), labels(std::move(zs)) {
    const auto M = static_cast<Eigen::Index>(labels.size());
    if (M < 1) throw InvalidArgument("basis ensemble needs at least one element");
    if (scheme == Scheme::Classical && M != 1) throw InvalidArgument("classical scheme uses exactly one element");
    for (const auto& z : labels) check_label(fam, z, "basis label");
    actions = RVector::Zero(M);
    C = CVector::Zero(M);
    D = CVector::Zero(M);
    if (scheme == Scheme::NonUnitary) {
      if (lambda.size() != M) throw DimensionMismatch("non-unitary scheme needs one weight per element");
      if ((lambda.array() <= 0.0).any()) throw InvalidArgument("non-unitary weights must be positive");
    }
    weights = lambda.size() == M ? lambda : RVector::Ones(M);
  }

  Eigen::Index size() const { return static_cast<Eigen::Index>(labels.size()); }
};

/// Overlap matrix Omega_jk = <z_j|z_k> with its eigenvalue extremes.
struct OverlapMatrix {
  CMatrix entries;
  double lambda_max = 1.0;
  double lambda_min = 1.0;

  static OverlapMatrix from(CMatrix m) {
    OverlapMatrix o{std::move(m)};
    Eigen::SelfAdjointEigenSolver<CMatrix> es(o.entries, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw EigFailure("overlap matrix eigenvalues did not converge");
    o.lambda_min = es.eigenvalues()[0];
    o.lambda_max = es.eigenvalues()[es.eigenvalues().size() - 1];
    return o;
  }
};

inline OverlapMatrix overlap_matrix(const FamilyDescriptor& fam, const std::vector<Label>& labels) {
  const auto M = static_cast<Eigen::Index>(labels.size());
  if (M < 1) throw InvalidArgument("overlap matrix needs at least one label");
  CMatrix om(M, M);
  for (Eigen::Index j = 0; j < M; ++j) {
    om(j, j) = 1.0;
    for (Eigen::Index k = j + 1; k < M; ++k) {
      om(j, k) = normalized_overlap(fam, labels[j], labels[k]);
      om(k, j) = std::conj(om(j, k));
    }
  }
  return OverlapMatrix::from(std::move(om));
}

inline OverlapMatrix overlap_matrix(const BasisEnsemble& ens) { return overlap_matrix(ens.fam, ens.labels); }

/// lambda_max / lambda_min; +inf when lambda_min <= 1e-14.
inline double conditioning_factor(const OverlapMatrix& om) {
  if (om.lambda_min <= 1e-14) return std::numeric_limits<double>::infinity();
  return om.lambda_max / om.lambda_min;
}

inline double conditioning_factor(const CMatrix& om) { return conditioning_factor(OverlapMatrix::from(om)); }

namespace detail {

/// Per-evaluation work arrays for the amplitude right-hand side.
struct CouplingWork {
  int d = 0;
  Eigen::Index M = 0;
  std::vector<Complex> z, zc, zd, g_self, g_pair;
  std::vector<Complex> f_self, h_self, phase;
  std::vector<double> inv_sqrt_r;
  CMatrix dressed;  // Omega_jk e^{i(S_k - S_j)}
  CMatrix d2h;

  void resize(int dim, Eigen::Index m) {
    d = dim;
    M = m;
    const auto n = static_cast<std::size_t>(d * m);
    z.resize(n);
    zc.resize(n);
    zd.resize(n);
    g_self.resize(n);
    g_pair.resize(static_cast<std::size_t>(d));
    f_self.resize(static_cast<std::size_t>(m));
    h_self.resize(static_cast<std::size_t>(m));
    phase.resize(static_cast<std::size_t>(m));
    inv_sqrt_r.resize(static_cast<std::size_t>(m));
    dressed.resize(m, m);
    d2h.resize(m, m);
  }

  CSpan zj(Eigen::Index j) const { return {z.data() + j * d, static_cast<std::size_t>(d)}; }
  CSpan zcj(Eigen::Index j) const { return {zc.data() + j * d, static_cast<std::size_t>(d)}; }
};

/// Fills dressed overlaps and d2H from labels (stored in w.z) and actions.
/// Also fills zdot into w.zd and self terms. Accumulation order is fixed.
inline void assemble(const BasisEnsemble& ens, const RVector& actions, CouplingWork& w) {
  const int d = w.d;
  const auto M = w.M;
  for (Eigen::Index j = 0; j < M; ++j) {
    for (int a = 0; a < d; ++a) w.zc[j * d + a] = std::conj(w.z[j * d + a]);
    zdot_raw(ens.model, w.zj(j), w.zd.data() + j * d);
    w.f_self[j] = f_and_grad(ens.fam, w.zcj(j), w.zj(j), w.g_self.data() + j * d);
    w.h_self[j] = h_raw(ens.model, w.zcj(j), w.zj(j));
  }
  if (ens.fam.is<SUnBoson>() && !ens.model.is<CustomModel>()) {
    // Built-in models are Hermitian, so the (k, j) entries of the overlap and
    // of H(z*, z') are conjugates of the (j, k) ones.
    const int N = ens.fam.as<SUnBoson>().N;
    // <z_j|z_k> = (w_jk / sqrt(r_j r_k))^N with r = 1 + |z|^2; the base has
    // modulus <= 1, so the integer power cannot overflow.
    for (Eigen::Index j = 0; j < M; ++j) {
      w.inv_sqrt_r[j] = 1.0 / std::sqrt(1.0 + norm2(w.zj(j)));
      w.phase[j] = exp_fast(Complex{0.0, actions[j]});
    }
    for (Eigen::Index j = 0; j < M; ++j) {
      w.dressed(j, j) = 1.0;
      w.d2h(j, j) = 0.0;
      const Complex* zcj = w.zc.data() + j * d;
      const Complex* zj = w.z.data() + j * d;
      for (Eigen::Index k = j + 1; k < M; ++k) {
        const Complex* zk = w.z.data() + k * d;
        Complex wjk{1.0, 0.0};
        for (int a = 0; a < d; ++a) wjk += zcj[a] * zk[a];
        if (wjk == Complex{0.0, 0.0}) throw BranchPointError("log-overlap argument vanishes for SU(n) boson states");
        const Complex om = ipow(wjk * (w.inv_sqrt_r[j] * w.inv_sqrt_r[k]), N) * w.phase[k] * std::conj(w.phase[j]);
        w.dressed(j, k) = om;
        w.dressed(k, j) = std::conj(om);
        const Complex hjk = h_raw(ens.model, w.zcj(j), w.zj(k));
        const Complex sj = static_cast<double>(N) * recip(wjk), sk = std::conj(sj);
        Complex geo_j{0.0, 0.0}, geo_k{0.0, 0.0};
        for (int a = 0; a < d; ++a) {
          geo_j += (sj * zk[a] - w.g_self[j * d + a]) * std::conj(w.zd[j * d + a]);
          geo_k += (sk * zj[a] - w.g_self[k * d + a]) * std::conj(w.zd[k * d + a]);
        }
        w.d2h(j, k) = hjk - w.h_self[j] + I * geo_j;
        w.d2h(k, j) = std::conj(hjk) - w.h_self[k] + I * geo_k;
      }
    }
    return;
  }
  for (Eigen::Index j = 0; j < M; ++j) {
    const double half_fjj = 0.5 * w.f_self[j].real();
    for (Eigen::Index k = 0; k < M; ++k) {
      if (k == j) {
        w.dressed(j, j) = 1.0;
        w.d2h(j, j) = 0.0;
        continue;
      }
      const Complex fjk = f_and_grad(ens.fam, w.zcj(j), w.zj(k), w.g_pair.data());
      // Phase differences enter before exponentiation.
      const Complex expo = fjk - half_fjj - 0.5 * w.f_self[k].real() + I * (actions[k] - actions[j]);
      w.dressed(j, k) = std::exp(expo);
      Complex geo{0.0, 0.0};
      for (int a = 0; a < d; ++a) {
        geo += (w.g_pair[a] - w.g_self[j * d + a]) * std::conj(w.zd[j * d + a]);
      }
      w.d2h(j, k) = h_raw(ens.model, w.zcj(j), w.zj(k)) - w.h_self[j] + I * geo;
    }
  }
}

inline void load_labels(const std::vector<Label>& labels, CouplingWork& w) {
  for (Eigen::Index j = 0; j < w.M; ++j)
    for (int a = 0; a < w.d; ++a) w.z[j * w.d + a] = labels[j][a];
}

/// Solves dressed * D = C with a pivoted LDL^T factorization.
inline CVector solve_dressed(const CMatrix& dressed, const CVector& C, double guard, double t) {
  Eigen::LDLT<CMatrix> ldlt(dressed);
  if (ldlt.info() != Eigen::Success) throw IllConditioned("overlap factorization failed", 0.0, t);
  const RVector piv = ldlt.vectorD().real();
  const double pmax = piv.cwiseAbs().maxCoeff();
  const double pmin = piv.minCoeff();
  if (!(pmin > 0.0) || pmax / pmin > guard) {
    throw IllConditioned("overlap matrix too ill-conditioned to solve for D", pmin > 0.0 ? pmax / pmin : 0.0, t);
  }
  return ldlt.solve(C);
}

}  // namespace detail

/// d2H_jk for the current labels; diagonal is identically zero.
inline CMatrix coupling_matrix(const BasisEnsemble& ens) {
  detail::CouplingWork w;
  w.resize(label_dim(ens.fam), ens.size());
  detail::load_labels(ens.labels, w);
  detail::assemble(ens, ens.actions, w);
  return w.d2h;
}

/// Default runtime guard on the overlap conditioning.
inline constexpr double kEpsilonGuard = 1e14;

/// Recomputes D from C: sum_k Omega_lk D_k e^{i(S_k - S_l)} = C_l.
inline void solve_D(BasisEnsemble& ens, double epsilon_guard = kEpsilonGuard) {
  const auto om = overlap_matrix(ens);
  const double eps = conditioning_factor(om);
  if (eps > epsilon_guard) {
    throw IllConditioned("overlap conditioning factor exceeds guard", eps, ens.time);
  }
  const auto M = ens.size();
  CMatrix dressed(M, M);
  for (Eigen::Index l = 0; l < M; ++l)
    for (Eigen::Index k = 0; k < M; ++k)
      dressed(l, k) = om.entries(l, k) * std::exp(I * (ens.actions[k] - ens.actions[l]));
  ens.D = detail::solve_dressed(dressed, ens.C, std::numeric_limits<double>::infinity(), ens.time);
}

/// Sets C_j = <z_j|psi0> for a coherent initial state |z'>.
inline void initialize_amplitudes(BasisEnsemble& ens, const Label& zprime) {
  check_label(ens.fam, zprime, "initial-state label");
  for (Eigen::Index j = 0; j < ens.size(); ++j) {
    ens.C[j] = normalized_overlap(ens.fam, ens.labels[j], zprime) * std::exp(-I * ens.actions[j]);
  }
  if (ens.scheme != Scheme::NonUnitary) solve_D(ens);
}

/// Sets C_j = <z_j|psi0> e^{-i S_j} for an arbitrary Fock-space state.
inline void initialize_amplitudes(BasisEnsemble& ens, const FockVector& psi0) {
  for (Eigen::Index j = 0; j < ens.size(); ++j) {
    const auto zj = fock_coefficients(ens.fam, ens.labels[j], psi0.basis);
    ens.C[j] = zj.amps.dot(psi0.amps) * std::exp(-I * ens.actions[j]);
  }
  if (ens.scheme != Scheme::NonUnitary) solve_D(ens);
}

/// Norm of the represented state: sum_k C_k^* D_k (unitary), or the
/// reconstructed norm before renormalization (non-unitary).
inline double ensemble_norm(const BasisEnsemble& ens) {
  if (ens.scheme != Scheme::NonUnitary) return ens.C.dot(ens.D).real();
  const auto om = overlap_matrix(ens);
  CVector a(ens.size());
  for (Eigen::Index k = 0; k < ens.size(); ++k) a[k] = ens.weights[k] * ens.C[k] * std::exp(I * ens.actions[k]);
  return std::sqrt(std::max(0.0, a.dot(om.entries * a).real()));
}

struct PropagationOptions {
  double tol = 1e-9;
  double epsilon_guard = kEpsilonGuard;
};

using EnsembleCallback = std::function<void(const BasisEnsemble&)>;

/// Advances the ensemble through `sample_times` (relative to ens.time, sorted,
/// starting at 0), invoking `on_sample` with the state at each of them. On
/// return `ens` holds the state at the last sample.
inline OdeStats propagate(BasisEnsemble& ens, const std::vector<double>& sample_times, const PropagationOptions& opt,
                          const EnsembleCallback& on_sample) {
  const int d = label_dim(ens.fam);
  const auto M = ens.size();
  const Eigen::Index off_s = 2 * d * M;
  const Eigen::Index off_c = off_s + M;

  RVector y(off_c + 2 * M);
  for (Eigen::Index j = 0; j < M; ++j) detail::pack_label(ens.labels[j].data(), d, y.data() + 2 * d * j);
  y.segment(off_s, M) = ens.actions;
  for (Eigen::Index j = 0; j < M; ++j) {
    y[off_c + 2 * j] = ens.C[j].real();
    y[off_c + 2 * j + 1] = ens.C[j].imag();
  }

  detail::CouplingWork w;
  w.resize(d, M);
  RVector S(M);
  CVector C(M), Cdot(M);
  std::vector<Complex> scratch(static_cast<std::size_t>(d));
  const double t0 = ens.time;

  auto rhs = [&](double t, const RVector& s, RVector& ds) {
    for (Eigen::Index j = 0; j < M; ++j) detail::unpack_label(s.data() + 2 * d * j, d, w.z.data() + j * d);
    S = s.segment(off_s, M);
    for (Eigen::Index j = 0; j < M; ++j) C[j] = {s[off_c + 2 * j], s[off_c + 2 * j + 1]};
    detail::assemble(ens, S, w);
    for (Eigen::Index j = 0; j < M; ++j) {
      detail::pack_label(w.zd.data() + j * d, d, ds.data() + 2 * d * j);
      Complex kin{0.0, 0.0};
      for (int a = 0; a < d; ++a) kin += std::conj(w.g_self[j * d + a]) * w.zd[j * d + a];
      ds[off_s + j] = -kin.imag() - w.h_self[j].real();
    }
    switch (ens.scheme) {
      case Scheme::Classical: Cdot.setZero(); break;
      case Scheme::Unitary: {
        const CVector Dv = detail::solve_dressed(w.dressed, C, opt.epsilon_guard, t0 + t);
        Cdot = -I * (w.dressed.cwiseProduct(w.d2h) * Dv);
        break;
      }
      case Scheme::NonUnitary: {
        const CVector lc = ens.weights.cast<Complex>().cwiseProduct(C);
        Cdot = -I * (w.dressed.cwiseProduct(w.d2h) * lc);
        break;
      }
    }
    for (Eigen::Index j = 0; j < M; ++j) {
      ds[off_c + 2 * j] = Cdot[j].real();
      ds[off_c + 2 * j + 1] = Cdot[j].imag();
    }
  };

  auto sample = [&](double t, const RVector& s) {
    for (Eigen::Index j = 0; j < M; ++j) detail::unpack_label(s.data() + 2 * d * j, d, ens.labels[j].data());
    ens.actions = s.segment(off_s, M);
    for (Eigen::Index j = 0; j < M; ++j) ens.C[j] = {s[off_c + 2 * j], s[off_c + 2 * j + 1]};
    ens.time = t0 + t;
    if (ens.scheme != Scheme::NonUnitary) solve_D(ens, opt.epsilon_guard);
    if (on_sample) on_sample(ens);
  };

  DormandPrince45 solver(OdeOptions{opt.tol, opt.tol});
  return solver.integrate(rhs, 0.0, y, sample_times, sample);
}

inline BasisEnsemble step_unitary(BasisEnsemble ens, double dt, const PropagationOptions& opt = {}) {
  if (ens.scheme != Scheme::Unitary && ens.scheme != Scheme::Classical)
    throw InvalidArgument("step_unitary needs a unitary or classical ensemble");
  propagate(ens, {0.0, dt}, opt, nullptr);
  return ens;
}

inline BasisEnsemble step_nonunitary(BasisEnsemble ens, double dt, const PropagationOptions& opt = {}) {
  if (ens.scheme != Scheme::NonUnitary) throw InvalidArgument("step_nonunitary needs a non-unitary ensemble");
  propagate(ens, {0.0, dt}, opt, nullptr);
  return ens;
}

/// Represented state in the Fock basis before any renormalization:
/// sum_k |z_k> D_k e^{iS_k} (unitary) or sum_k lambda_k |z_k> C_k e^{iS_k}.
inline FockVector reconstruct_fock_raw(const BasisEnsemble& ens, std::shared_ptr<const FockBasis> basis = nullptr) {
  if (ens.fam.is<Thouless>()) throw UnsupportedFamily("Thouless ensembles have no Fock reconstruction");
  if (!basis) basis = FockBasis::for_family(ens.fam);
  FockVector psi{basis, CVector::Zero(basis->size())};
  for (Eigen::Index k = 0; k < ens.size(); ++k) {
    const Complex amp = (ens.scheme == Scheme::NonUnitary ? ens.weights[k] * ens.C[k] : ens.D[k]) *
                        std::exp(I * ens.actions[k]);
    psi.amps += amp * fock_coefficients(ens.fam, ens.labels[k], basis).amps;
  }
  return psi;
}

/// Fock-space state of the ensemble; non-unitary output is renormalized.
inline FockVector reconstruct_fock(const BasisEnsemble& ens, std::shared_ptr<const FockBasis> basis = nullptr) {
  auto psi = reconstruct_fock_raw(ens, std::move(basis));
  return ens.scheme == Scheme::NonUnitary ? psi.normalized() : psi;
}

struct ObservableValue {
  double value = 0.0;
  double imag_residue = 0.0;  // |Im| of the double sum, diagnostic only
};

/// sum_jk a_j^* a_k Omega_jk K(z_j*, z_k) e^{i(S_k - S_j)} with a = D (unitary)
/// or a = lambda C divided by the state norm squared (non-unitary).
inline ObservableValue observable_continued(const BasisEnsemble& ens, const ObservableKernel& kernel) {
  const auto M = ens.size();
  CVector a(M);
  for (Eigen::Index k = 0; k < M; ++k) a[k] = ens.scheme == Scheme::NonUnitary ? ens.weights[k] * ens.C[k] : ens.D[k];
  Complex acc{0.0, 0.0}, norm2{0.0, 0.0};
  for (Eigen::Index j = 0; j < M; ++j) {
    const CVector zcj = ens.labels[j].conjugate();
    for (Eigen::Index k = 0; k < M; ++k) {
      const Complex om = j == k ? Complex{1.0, 0.0} : normalized_overlap(ens.fam, ens.labels[j], ens.labels[k]);
      const Complex w = std::conj(a[j]) * a[k] * om * std::exp(I * (ens.actions[k] - ens.actions[j]));
      acc += w * kernel(as_span(zcj), as_span(ens.labels[k]));
      norm2 += w;
    }
  }
  if (ens.scheme == Scheme::NonUnitary) acc /= norm2.real();
  return {acc.real(), std::abs(acc.imag())};
}

}  // namespace ccslab
