#pragma once

/**
 * @file exact.hpp
 * @brief Dense Fock-space Hamiltonians and propagation by one eigendecomposition.
 */

#include "ccslab/fock.hpp"
#include "ccslab/models.hpp"

#include <lapacke.h>

#include <cmath>
#include <memory>
#include <vector>

namespace ccslab {

/// Invalid particle number for a model Hamiltonian.
struct InvalidN : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

/// Omega Jx + (2 chi / (N - 1)) Jz^2 on |J,M>, M ascending, J = N/2.
inline RMatrix build_h_doublewell(double omega, double chi, int N) {
  if (N < 2) throw InvalidN("double-well Hamiltonian needs N >= 2");
  const double J = 0.5 * N;
  RMatrix h = RMatrix::Zero(N + 1, N + 1);
  for (int i = 0; i <= N; ++i) {
    const double M = i - J;
    h(i, i) = 2.0 * chi / (N - 1) * M * M;
    if (i < N) {
      const double jx = 0.5 * std::sqrt(J * (J + 1.0) - M * (M + 1.0));
      h(i, i + 1) = omega * jx;
      h(i + 1, i) = omega * jx;
    }
  }
  return h;
}

inline RMatrix build_h_doublewell(const DoubleWell& m) { return build_h_doublewell(m.omega, m.chi, m.N); }

/// Omega sum_{a != b} a_a^dagger a_b + (chi / (N - 1)) sum_a a_a^dagger a_a^dagger a_a a_a
/// on the SU(3) occupation basis (lexicographic descending).
inline RMatrix build_h_triplewell(double omega, double chi, int N) {
  if (N < 2) throw InvalidN("triple-well Hamiltonian needs N >= 2");
  const auto basis = FockBasis::sun(3, N);
  const auto dim = basis->size();
  RMatrix h = RMatrix::Zero(dim, dim);
  std::vector<int> m(3);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto occ = basis->occupation(i);
    double coll = 0.0;
    for (int g = 0; g < 3; ++g) coll += static_cast<double>(occ[g]) * (occ[g] - 1);
    h(i, i) = chi / (N - 1) * coll;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b || occ[b] == 0) continue;
        m.assign(occ.begin(), occ.end());
        const double amp = std::sqrt(static_cast<double>(occ[b]) * (occ[a] + 1));
        --m[b];
        ++m[a];
        h(basis->index_of(m), i) += omega * amp;
      }
    }
  }
  return h;
}

inline RMatrix build_h_triplewell(const TripleWell& m) { return build_h_triplewell(m.omega, m.chi, m.N); }

/// psi(t) = V exp(-i Lambda t) V^dagger psi0 from one Hermitian eigendecomposition.
class SpectralPropagator {
 public:
  SpectralPropagator(const RMatrix& h, std::shared_ptr<const FockBasis> basis) : basis_(std::move(basis)) {
    check_dim(h.rows(), h.cols());
    RMatrix v = h;
    evals_.resize(h.rows());
    const lapack_int n = static_cast<lapack_int>(h.rows());
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, v.data(), n, evals_.data());
    if (info != 0) throw EigFailure("dsyevd failed with info " + std::to_string(info));
    vecs_ = v.cast<Complex>();
  }

  SpectralPropagator(const CMatrix& h, std::shared_ptr<const FockBasis> basis) : basis_(std::move(basis)) {
    check_dim(h.rows(), h.cols());
    CMatrix v = h;
    evals_.resize(h.rows());
    const lapack_int n = static_cast<lapack_int>(h.rows());
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                           reinterpret_cast<lapack_complex_double*>(v.data()), n, evals_.data());
    if (info != 0) throw EigFailure("zheevd failed with info " + std::to_string(info));
    vecs_ = std::move(v);
  }

  const RVector& eigenvalues() const { return evals_; }
  const CMatrix& eigenvectors() const { return vecs_; }
  const std::shared_ptr<const FockBasis>& basis() const { return basis_; }

  FockVector evolve(const FockVector& psi0, double t) const {
    check_basis(psi0);
    const CVector c = vecs_.adjoint() * psi0.amps;
    CVector ph(c.size());
    for (Eigen::Index k = 0; k < c.size(); ++k) ph[k] = c[k] * std::exp(Complex{0.0, -evals_[k] * t});
    return {basis_, vecs_ * ph};
  }

  std::vector<FockVector> evolve(const FockVector& psi0, const std::vector<double>& times) const {
    check_basis(psi0);
    const CVector c = vecs_.adjoint() * psi0.amps;
    std::vector<FockVector> out;
    out.reserve(times.size());
    CVector ph(c.size());
    for (double t : times) {
      for (Eigen::Index k = 0; k < c.size(); ++k) ph[k] = c[k] * std::exp(Complex{0.0, -evals_[k] * t});
      out.push_back({basis_, vecs_ * ph});
    }
    return out;
  }

 private:
  void check_dim(Eigen::Index r, Eigen::Index c) const {
    if (r != c) throw DimensionMismatch("Hamiltonian must be square");
    if (!basis_ || basis_->size() != r) throw BasisMismatch("Hamiltonian dimension does not match the Fock basis");
  }
  void check_basis(const FockVector& psi) const {
    if (!psi.basis || !psi.basis->same_as(*basis_)) throw BasisMismatch("state lives in a different Fock basis");
  }

  std::shared_ptr<const FockBasis> basis_;
  RVector evals_;
  CMatrix vecs_;
};

template <class Matrix>
std::vector<FockVector> evolve_exact(const Matrix& h, const FockVector& psi0, const std::vector<double>& times) {
  return SpectralPropagator(h, psi0.basis).evolve(psi0, times);
}

/// |<a|b>|, clipped to 1 against rounding.
inline double fidelity(const FockVector& a, const FockVector& b) {
  if (!a.basis || !b.basis || !a.basis->same_as(*b.basis)) throw BasisMismatch("fidelity across different bases");
  return std::min(1.0, std::abs(a.amps.dot(b.amps)));
}

/// <psi| b3^dagger b3 |psi>, b3 = (a1 - a2)/sqrt(2).
inline double b3_occupation_exact(const FockVector& psi) {
  const auto& basis = *psi.basis;
  if (basis.kind() != FockBasis::Kind::SUn || basis.modes() != 3) throw BasisMismatch("b3 occupation needs SU(3)");
  double diag = 0.0;
  Complex cross{0.0, 0.0};
  std::vector<int> m(3);
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    const auto occ = basis.occupation(i);
    diag += std::norm(psi.amps[i]) * (occ[0] + occ[1]);
    if (occ[1] == 0) continue;
    // a1^dagger a2 |m>
    m.assign(occ.begin(), occ.end());
    const double amp = std::sqrt(static_cast<double>(occ[1]) * (occ[0] + 1));
    --m[1];
    ++m[0];
    cross += std::conj(psi.amps[basis.index_of(m)]) * amp * psi.amps[i];
  }
  // <a2^dagger a1> = conj(<a1^dagger a2>)
  return 0.5 * (diag - 2.0 * cross.real());
}

}  // namespace ccslab
