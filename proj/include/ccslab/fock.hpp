#pragma once

#include "ccslab/family.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ccslab {

/// Orthonormal occupation-number basis.
///
/// Orderings:
///  - Spin (SU(2), n = 2): |J,M>, M = -J..J, i.e. m1 = J+M ascending.
///  - SU(n), n >= 3: lexicographic descending in (m_1, ..., m_{n-1}); m_n = N - sum.
///  - Canonical: every tuple with 0 <= m_a <= cutoff, lexicographic ascending.
class FockBasis {
 public:
  enum class Kind { Spin, SUn, Canonical };

  static std::shared_ptr<const FockBasis> spin(int N) {
    auto b = std::shared_ptr<FockBasis>(new FockBasis(Kind::Spin, 2, N, 0));
    for (int m1 = 0; m1 <= N; ++m1) b->push({m1, N - m1});
    b->finish();
    return b;
  }

  static std::shared_ptr<const FockBasis> sun(int n, int N) {
    if (n == 2) return spin(N);
    if (n < 2 || N < 0) throw InvalidArgument("SU(n) Fock basis needs n >= 2, N >= 0");
    auto b = std::shared_ptr<FockBasis>(new FockBasis(Kind::SUn, n, N, 0));
    std::vector<int> m(n, 0);
    b->enumerate_descending(m, 0, N);
    b->finish();
    return b;
  }

  static std::shared_ptr<const FockBasis> canonical(int n, int cutoff) {
    if (n < 1 || cutoff < 0) throw InvalidArgument("canonical Fock basis needs n >= 1, cutoff >= 0");
    auto b = std::shared_ptr<FockBasis>(new FockBasis(Kind::Canonical, n, -1, cutoff));
    std::vector<int> m(n, 0);
    while (true) {
      b->push(m);
      int a = n - 1;
      while (a >= 0 && m[a] == cutoff) m[a--] = 0;
      if (a < 0) break;
      ++m[a];
    }
    b->finish();
    return b;
  }

  /// Basis matching a bosonic family (the canonical family must carry a cutoff).
  static std::shared_ptr<const FockBasis> for_family(const FamilyDescriptor& fam) {
    if (fam.is<SUnBoson>()) return sun(fam.as<SUnBoson>().n, fam.as<SUnBoson>().N);
    if (fam.is<Canonical>()) {
      const auto& c = fam.as<Canonical>();
      if (!c.cutoff) throw CutoffRequired("canonical Fock expansion needs a per-mode cutoff");
      return canonical(c.n, *c.cutoff);
    }
    throw UnsupportedFamily("no Fock expansion for " + fam.name());
  }

  Kind kind() const { return kind_; }
  int modes() const { return n_; }
  int particles() const { return N_; }
  int cutoff() const { return cutoff_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(log_norm_.size()); }

  std::span<const int> occupation(Eigen::Index i) const {
    return {occ_.data() + i * n_, static_cast<std::size_t>(n_)};
  }

  /// Index of an occupation tuple, or -1 when it is not part of the basis.
  Eigen::Index index_of(const std::vector<int>& m) const {
    auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
  }

  /// log of the multinomial weight: 0.5 log(N!/prod m!) for SU(n), -0.5 sum log m! for canonical.
  double log_weight(Eigen::Index i) const { return log_norm_[static_cast<std::size_t>(i)]; }

  bool same_as(const FockBasis& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && N_ == o.N_ && cutoff_ == o.cutoff_;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Spin: return "spin |J,M> M ascending, J=" + std::to_string(N_) + "/2";
      case Kind::SUn:
        return "SU(" + std::to_string(n_) + ") occupations m1+..+mn=" + std::to_string(N_) +
               ", lexicographic descending";
      case Kind::Canonical:
        return "canonical n=" + std::to_string(n_) + " cutoff=" + std::to_string(cutoff_);
    }
    return {};
  }

 private:
  FockBasis(Kind k, int n, int N, int cutoff) : kind_(k), n_(n), N_(N), cutoff_(cutoff) {}

  void push(const std::vector<int>& m) { occ_.insert(occ_.end(), m.begin(), m.end()); }

  void enumerate_descending(std::vector<int>& m, int a, int remaining) {
    if (a == n_ - 1) {
      m[a] = remaining;
      push(m);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      m[a] = k;
      enumerate_descending(m, a + 1, remaining - k);
    }
  }

  void finish() {
    const auto count = occ_.size() / static_cast<std::size_t>(n_);
    log_norm_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<int> m(occ_.begin() + i * n_, occ_.begin() + (i + 1) * n_);
      double lw = kind_ == Kind::Canonical ? 0.0 : std::lgamma(N_ + 1.0);
      for (int x : m) lw -= std::lgamma(x + 1.0);
      log_norm_[i] = 0.5 * lw;
      index_.emplace(std::move(m), static_cast<Eigen::Index>(i));
    }
  }

  Kind kind_;
  int n_;
  int N_;
  int cutoff_;
  std::vector<int> occ_;
  std::vector<double> log_norm_;
  std::map<std::vector<int>, Eigen::Index> index_;
};

/// Dense state over a FockBasis.
struct FockVector {
  std::shared_ptr<const FockBasis> basis;
  CVector amps;

  double norm() const { return amps.norm(); }

  Complex amplitude(const std::vector<int>& m) const {
    const auto i = basis->index_of(m);
    return i < 0 ? Complex{0.0, 0.0} : amps[i];
  }

  FockVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw InvalidArgument("cannot normalize a zero Fock vector");
    return {basis, amps / n};
  }
};

/// Smallest per-mode cutoff whose truncated canonical coherent state keeps a
/// norm of at least 1 - tol.
inline int canonical_cutoff(const Label& z, double tol = 1e-12) {
  for (int c = 0; c < 100000; ++c) {
    double kept = 1.0;
    for (Eigen::Index a = 0; a < z.size(); ++a) {
      const double x = std::norm(z[a]);
      double term = std::exp(-x), acc = 0.0;
      for (int m = 0; m <= c; ++m) {
        acc += term;
        term *= x / (m + 1);
      }
      kept *= acc;
    }
    if (kept >= 1.0 - tol) return c;
  }
  throw InvalidArgument("canonical cutoff search did not converge");
}

/// Expansion of the normalized coherent state |z> in `basis` (which must match fam).
inline FockVector fock_coefficients(const FamilyDescriptor& fam, const Label& z,
                                    std::shared_ptr<const FockBasis> basis) {
  if (fam.is<Thouless>()) throw UnsupportedFamily("Thouless states have no bosonic Fock expansion");
  check_label(fam, z);
  if (fam.is<Canonical>() && !fam.as<Canonical>().cutoff && !basis) {
    throw CutoffRequired("canonical Fock expansion needs a per-mode cutoff");
  }
  if (!basis) basis = FockBasis::for_family(fam);

  const int n = basis->modes();
  const int d = static_cast<int>(z.size());
  std::vector<Complex> logz(static_cast<std::size_t>(d));
  std::vector<bool> zero(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    zero[a] = z[a] == Complex{0.0, 0.0};
    logz[a] = zero[a] ? Complex{0.0, 0.0} : std::log(z[a]);
  }
  double lnorm;
  if (fam.is<SUnBoson>()) {
    if (basis->kind() == FockBasis::Kind::Canonical || basis->modes() != fam.as<SUnBoson>().n ||
        basis->particles() != fam.as<SUnBoson>().N)
      throw BasisMismatch("Fock basis does not match " + fam.name());
    lnorm = -0.5 * fam.particle_number() * std::log1p(z.squaredNorm());
  } else {
    if (basis->kind() != FockBasis::Kind::Canonical || basis->modes() != d)
      throw BasisMismatch("Fock basis does not match " + fam.name());
    lnorm = -0.5 * z.squaredNorm();
  }

  FockVector out{basis, CVector::Zero(basis->size())};
  for (Eigen::Index i = 0; i < basis->size(); ++i) {
    const auto m = basis->occupation(i);
    Complex e{basis->log_weight(i) + lnorm, 0.0};
    bool vanishes = false;
    for (int a = 0; a < d && a < n; ++a) {
      if (m[a] == 0) continue;
      if (zero[a]) {
        vanishes = true;
        break;
      }
      e += static_cast<double>(m[a]) * logz[a];
    }
    if (!vanishes) out.amps[i] = std::exp(e);
  }
  return out;
}

inline FockVector fock_coefficients(const FamilyDescriptor& fam, const Label& z) {
  return fock_coefficients(fam, z, nullptr);
}

}  // namespace ccslab
