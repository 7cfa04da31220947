#pragma once

/**
 * @file geometry.hpp
 * @brief Closed-form geometry of the supported coherent-state families.
 *
 * Everything is generated by the log-overlap f(z*, z') = log {z|z'} of the
 * non-normalized states. Functions taking a `zs` argument expect the values
 * that are substituted for z* (i.e. already conjugated); functions taking
 * plain labels conjugate internally.
 *
 *   Canonical   f = sum_a zs_a zp_a
 *   SU(n) boson f = N log(1 + sum_a zs_a zp_a)
 *   Thouless    f = log det(I_N + Zs^T Zp)
 *
 * The complex log uses the principal branch. Only differences and gradients
 * of f enter the propagator, so branch jumps along a trajectory are harmless.
 */

#include "ccslab/family.hpp"

#include <cmath>
#include <string>

namespace ccslab {

namespace detail {

inline Complex dot_plain(CSpan a, CSpan b) {
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(CSpan a) {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return s;
}

inline Eigen::Map<const CMatrix> thouless_view(const Thouless& t, CSpan z) {
  return Eigen::Map<const CMatrix>(z.data(), t.M, t.N);
}

inline Complex checked_log(Complex w, const char* fam) {
  if (w == Complex{0.0, 0.0}) {
    throw BranchPointError(std::string("log-overlap argument vanishes for ") + fam);
  }
  return std::log(w);
}

/// 1/w without the Annex-G special-case handling of operator/.
inline Complex recip(Complex w) {
  const double n = w.real() * w.real() + w.imag() * w.imag();
  return {w.real() / n, -w.imag() / n};
}

inline Complex log_fast(Complex w) { return {0.5 * std::log(w.real() * w.real() + w.imag() * w.imag()), std::arg(w)}; }

inline Complex exp_fast(Complex x) {
  const double r = std::exp(x.real());
  return {r * std::cos(x.imag()), r * std::sin(x.imag())};
}

/// w^n by repeated squaring, n >= 0.
inline Complex ipow(Complex w, int n) {
  Complex acc{1.0, 0.0};
  while (n > 0) {
    if (n & 1) acc *= w;
    w *= w;
    n >>= 1;
  }
  return acc;
}

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// f(zs, zp) and, when `grad` is non-null, df/dzs written into grad[0..d).
/// Raw-span entry point used by the propagator's inner loops.
inline Complex f_and_grad(const FamilyDescriptor& fam, CSpan zs, CSpan zp, Complex* grad) {
  return std::visit(
      [&](const auto& f) -> Complex {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Canonical>) {
          if (grad) {
            for (std::size_t a = 0; a < zp.size(); ++a) grad[a] = zp[a];
          }
          return dot_plain(zs, zp);
        } else if constexpr (std::is_same_v<T, SUnBoson>) {
          const Complex w = 1.0 + dot_plain(zs, zp);
          const Complex lw = checked_log(w, "SU(n) boson states");
          if (grad) {
            const Complex s = static_cast<double>(f.N) / w;
            for (std::size_t a = 0; a < zp.size(); ++a) grad[a] = s * zp[a];
          }
          return static_cast<double>(f.N) * lw;
        } else {
          const auto Zs = thouless_view(f, zs);
          const auto Zp = thouless_view(f, zp);
          const CMatrix X = CMatrix::Identity(f.N, f.N) + Zs.transpose() * Zp;
          Eigen::PartialPivLU<CMatrix> lu(X);
          const Complex det = lu.determinant();
          const Complex lw = checked_log(det, "Thouless states");
          if (grad) {
            if (det == Complex{0.0, 0.0}) throw SingularMatrix("I_N + z^dagger z' is singular");
            const CMatrix G = Zp * lu.inverse();
            for (Eigen::Index i = 0; i < G.size(); ++i) grad[i] = G.data()[i];
          }
          return lw;
        }
      },
      fam.variant());
}

inline void check_pair(const FamilyDescriptor& fam, const Label& zs, const Label& zp) {
  const auto d = label_dim(fam);
  if (zs.size() != d || zp.size() != d) {
    throw DimensionMismatch(fam.name() + " expects labels of dimension " + std::to_string(d));
  }
}

}  // namespace detail

/// f(z*, z'), with `zs` holding the values of z*.
inline Complex log_overlap(const FamilyDescriptor& fam, const Label& zs, const Label& zp) {
  detail::check_pair(fam, zs, zp);
  return detail::f_and_grad(fam, as_span(zs), as_span(zp), nullptr);
}

/// Componentwise df(z*, z')/dz*_a.
inline CVector grad_f_conj(const FamilyDescriptor& fam, const Label& zs, const Label& zp) {
  detail::check_pair(fam, zs, zp);
  CVector g(zp.size());
  detail::f_and_grad(fam, as_span(zs), as_span(zp), g.data());
  return g;
}

/// Phase-space metric g_ab = d^2 f(z*, z) / dz_a dz*_b.
inline CMatrix metric(const FamilyDescriptor& fam, const Label& z) {
  check_label(fam, z);
  return std::visit(
      [&](const auto& f) -> CMatrix {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Canonical>) {
          return CMatrix::Identity(f.n, f.n);
        } else if constexpr (std::is_same_v<T, SUnBoson>) {
          const double r = 1.0 + z.squaredNorm();
          CMatrix g = -(z.conjugate() * z.transpose());
          g.diagonal().array() += r;
          return g * (static_cast<double>(f.N) / (r * r));
        } else {
          const auto Z = detail::thouless_view(f, as_span(z));
          const CMatrix A = (CMatrix::Identity(f.M, f.M) + Z * Z.adjoint()).inverse();
          const CMatrix B = (CMatrix::Identity(f.N, f.N) + Z.adjoint() * Z).inverse();
          // Row index mu + M*alpha, column index nu + M*beta: g = A_{nu mu} B_{alpha beta}.
          const int d = f.N * f.M;
          CMatrix g(d, d);
          for (int alpha = 0; alpha < f.N; ++alpha)
            for (int beta = 0; beta < f.N; ++beta)
              g.block(alpha * f.M, beta * f.M, f.M, f.M) = B(alpha, beta) * A.transpose();
          return g;
        }
      },
      fam.variant());
}

/// Normalization constant kappa of the closure relation.
inline double closure_kappa(const FamilyDescriptor& fam) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Canonical>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, SUnBoson>) {
          // det g = N^{n-1} / (1+|z|^2)^n, so kappa absorbs the N^{n-1}.
          const int d = f.n - 1;
          return std::exp(detail::log_factorial(f.N + f.n - 1) - detail::log_factorial(f.N) -
                          d * std::log(static_cast<double>(f.N)));
        } else {
          const int n = f.N + f.M;
          double lk = 0.0;
          for (int gamma = 1; gamma <= f.N; ++gamma)
            lk += detail::log_factorial(n + 1 - gamma) - detail::log_factorial(f.N + 1 - gamma);
          return std::exp(lk);
        }
      },
      fam.variant());
}

/// Density w(z) with d mu = w(z) prod_a d^2 z_a.
inline double measure_density(const FamilyDescriptor& fam, const Label& z) {
  check_label(fam, z);
  const int d = label_dim(fam);
  const double pi_d = std::pow(kPi, d);
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Canonical>) {
          return 1.0 / pi_d;
        } else if constexpr (std::is_same_v<T, SUnBoson>) {
          const double lnum = detail::log_factorial(f.N + f.n - 1) - detail::log_factorial(f.N);
          return std::exp(lnum - f.n * std::log1p(z.squaredNorm())) / pi_d;
        } else {
          const auto Z = detail::thouless_view(f, as_span(z));
          const double det =
              (CMatrix::Identity(f.N, f.N) + Z.adjoint() * Z).determinant().real();
          return closure_kappa(fam) * std::pow(det, -(f.N + f.M)) / pi_d;
        }
      },
      fam.variant());
}

/// <z1|z2> between normalized states. |<z1|z2>| <= 1.
inline Complex normalized_overlap(const FamilyDescriptor& fam, const Label& z1, const Label& z2) {
  detail::check_pair(fam, z1, z2);
  if (fam.is<SUnBoson>()) {
    // (1 + z1^dagger z2)^N without going through the log branch.
    const Complex w = 1.0 + z1.dot(z2);
    if (w == Complex{0.0, 0.0}) return {0.0, 0.0};
    const double r = std::sqrt((1.0 + z1.squaredNorm()) * (1.0 + z2.squaredNorm()));
    return std::exp(static_cast<double>(fam.particle_number()) * std::log(w / r));
  }
  const CVector z1c = z1.conjugate();
  const CVector z2c = z2.conjugate();
  const Complex f12 = log_overlap(fam, z1c, z2);
  const double f11 = log_overlap(fam, z1c, z1).real();
  const double f22 = log_overlap(fam, z2c, z2).real();
  return std::exp(f12 - 0.5 * f11 - 0.5 * f22);
}

}  // namespace ccslab
