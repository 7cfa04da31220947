#pragma once

/**
 * @file models.hpp
 * @brief Model Hamiltonians, their analytic continuations H(z*, z'), and the
 * classical flow of the coherent-state labels.
 *
 * Double well (spin J = N/2):
 *   H = N Omega/2 (z + z*)/(1 + z* z) + N chi/2 (1 - z* z)^2/(1 + z* z)^2
 * The constant chi N / (2(N-1)) of <z| Omega Jx + 2chi/(N-1) Jz^2 |z> is dropped;
 * see doublewell_energy_offset().
 *
 * Triple well (SU(3), N bosons):
 *   H = N Omega T / W + N chi U / W^2,  W = 1 + z1* z1 + z2* z2,
 *   T = z1* z2 + z2* z1 + z1* + z1 + z2* + z2,  U = (z1* z1)^2 + (z2* z2)^2 + 1.
 *
 * The (N-1)^{-1} scaling of the collision term makes both flows N-independent.
 */

#include "ccslab/geometry.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace ccslab {

struct DoubleWell {
  double omega = 1.0;
  double chi = 0.0;
  int N = 2;
};

struct TripleWell {
  double omega = 1.0;
  double chi = 0.0;
  int N = 2;
};

/// User-supplied model: H(z*, z') analytic in both slots. The z*-gradient is
/// optional; when missing it is taken by central differences with step 1e-7.
struct CustomModel {
  FamilyDescriptor family;
  std::function<Complex(CSpan zs, CSpan zp)> h;
  std::function<void(CSpan zs, CSpan zp, Complex* grad)> grad_conj;
  std::string name = "custom";
};

class HamiltonianModel {
 public:
  using Variant = std::variant<DoubleWell, TripleWell, CustomModel>;

  HamiltonianModel(DoubleWell m) : v_(m), fam_(SUnBoson{2, m.N}) {
    if (m.N < 1) throw InvalidArgument("double well needs N >= 1");
  }
  HamiltonianModel(TripleWell m) : v_(m), fam_(SUnBoson{3, m.N}) {
    if (m.N < 1) throw InvalidArgument("triple well needs N >= 1");
  }
  HamiltonianModel(CustomModel m) : v_(std::move(m)), fam_(std::get<CustomModel>(v_).family) {
    if (!std::get<CustomModel>(v_).h) throw InvalidArgument("custom model needs H(z*, z')");
  }

  const Variant& variant() const { return v_; }
  const FamilyDescriptor& family() const { return fam_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }

  std::string name() const {
    if (is<DoubleWell>()) return "DoubleWell";
    if (is<TripleWell>()) return "TripleWell";
    return as<CustomModel>().name;
  }

 private:
  Variant v_;
  FamilyDescriptor fam_;
};

/// Constant dropped from the double-well classical Hamiltonian:
/// <z|H|z> = H_classical + chi N / (2 (N - 1)).
inline double doublewell_energy_offset(const DoubleWell& m) {
  return m.N > 1 ? m.chi * m.N / (2.0 * (m.N - 1)) : 0.0;
}

namespace detail {

inline Complex nonzero(Complex w, const char* what) {
  if (w == Complex{0.0, 0.0}) throw PoleError(std::string("vanishing denominator in ") + what);
  return w;
}

inline Complex h_raw(const HamiltonianModel& model, CSpan s, CSpan p) {
  return std::visit(
      [&](const auto& m) -> Complex {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DoubleWell>) {
          const Complex u = s[0] * p[0];
          const Complex iw = recip(nonzero(1.0 + u, "double-well H"));
          const Complex r = (1.0 - u) * iw;
          return 0.5 * m.N * (m.omega * (s[0] + p[0]) * iw + m.chi * r * r);
        } else if constexpr (std::is_same_v<T, TripleWell>) {
          const Complex u1 = s[0] * p[0];
          const Complex u2 = s[1] * p[1];
          const Complex iw = recip(nonzero(1.0 + u1 + u2, "triple-well H"));
          const Complex t = s[0] * p[1] + s[1] * p[0] + s[0] + p[0] + s[1] + p[1];
          const Complex u = u1 * u1 + u2 * u2 + 1.0;
          return static_cast<double>(m.N) * (m.omega * t * iw + m.chi * u * iw * iw);
        } else {
          return m.h(s, p);
        }
      },
      model.variant());
}

/// dH(zs, zp)/dzs written into grad[0..d).
inline void h_grad_raw(const HamiltonianModel& model, CSpan s, CSpan p, Complex* grad) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DoubleWell>) {
          const Complex u = s[0] * p[0];
          const Complex w = nonzero(1.0 + u, "double-well H");
          const Complex w2 = w * w;
          grad[0] = 0.5 * m.N * m.omega * (1.0 - p[0] * p[0]) / w2 -
                    2.0 * m.N * m.chi * p[0] * (1.0 - u) / (w2 * w);
        } else if constexpr (std::is_same_v<T, TripleWell>) {
          const Complex w = nonzero(1.0 + s[0] * p[0] + s[1] * p[1], "triple-well H");
          const Complex t = s[0] * p[1] + s[1] * p[0] + s[0] + p[0] + s[1] + p[1];
          const Complex u1 = s[0] * p[0];
          const Complex u2 = s[1] * p[1];
          const Complex u = u1 * u1 + u2 * u2 + 1.0;
          const double N = m.N;
          const Complex dt[2] = {p[1] + 1.0, p[0] + 1.0};
          for (int a = 0; a < 2; ++a) {
            const Complex du = 2.0 * s[a] * p[a] * p[a];
            grad[a] = N * m.omega * (dt[a] * w - t * p[a]) / (w * w) +
                      N * m.chi * (du * w - 2.0 * u * p[a]) / (w * w * w);
          }
        } else {
          if (m.grad_conj) {
            m.grad_conj(s, p, grad);
            return;
          }
          constexpr double h = 1e-7;
          std::vector<Complex> sp(s.begin(), s.end());
          for (std::size_t a = 0; a < s.size(); ++a) {
            const Complex keep = sp[a];
            sp[a] = keep + h;
            const Complex hp = m.h(CSpan(sp), p);
            sp[a] = keep - h;
            const Complex hm = m.h(CSpan(sp), p);
            sp[a] = keep;
            grad[a] = (hp - hm) / (2.0 * h);
          }
        }
      },
      model.variant());
}

inline void check_model_family(const HamiltonianModel& model, const FamilyDescriptor& fam) {
  if (!(model.family() == fam)) {
    throw InvalidArgument(model.name() + " pairs with " + model.family().name() + ", not " + fam.name());
  }
}

}  // namespace detail

/// H(z*, z') with `zs` substituted for z* and `zp` for z.
inline Complex hamiltonian_continued(const HamiltonianModel& model, const Label& zs, const Label& zp) {
  detail::check_pair(model.family(), zs, zp);
  return detail::h_raw(model, as_span(zs), as_span(zp));
}

inline CVector hamiltonian_grad_conj(const HamiltonianModel& model, const Label& zs, const Label& zp) {
  detail::check_pair(model.family(), zs, zp);
  CVector g(zs.size());
  detail::h_grad_raw(model, as_span(zs), as_span(zp), g.data());
  return g;
}

/// Classical energy H(z*, z) on the diagonal.
inline double classical_energy(const HamiltonianModel& model, const Label& z) {
  return hamiltonian_continued(model, z.conjugate(), z).real();
}

/// Variational flow: solves sum_b zdot_b g_ba = -i dH/dz*_a for zdot.
inline CVector zdot_variational(const HamiltonianModel& model, const FamilyDescriptor& fam, const Label& z) {
  detail::check_model_family(model, fam);
  check_label(fam, z);
  const CMatrix g = metric(fam, z);
  const CVector rhs = -I * hamiltonian_grad_conj(model, z.conjugate(), z);
  Eigen::FullPivLU<CMatrix> lu(g.transpose());
  if (!lu.isInvertible()) throw SingularMetric("phase-space metric is singular at " + fam.name() + " label");
  return lu.solve(rhs);
}

namespace detail {

inline void zdot_raw(const HamiltonianModel& model, CSpan z, Complex* out) {
  if (model.is<DoubleWell>()) {
    const auto& m = model.as<DoubleWell>();
    const Complex x = z[0];
    const double r = std::norm(x);
    // i zdot = Omega/2 (1 - z^2) + 2 chi z (|z|^2 - 1)/(1 + |z|^2)
    out[0] = -I * (0.5 * m.omega * (1.0 - x * x) + 2.0 * m.chi * x * (r - 1.0) / (1.0 + r));
  } else if (model.is<TripleWell>()) {
    const auto& m = model.as<TripleWell>();
    const double r1 = std::norm(z[0]), r2 = std::norm(z[1]);
    const double w = 1.0 + r1 + r2;
    const Complex hop = m.omega * (1.0 + z[0] + z[1]);
    out[0] = -I * (hop * (1.0 - z[0]) - 2.0 * m.chi * z[0] * (1.0 - r1) / w);
    out[1] = -I * (hop * (1.0 - z[1]) - 2.0 * m.chi * z[1] * (1.0 - r2) / w);
  } else {
    const CVector zv = Eigen::Map<const CVector>(z.data(), static_cast<Eigen::Index>(z.size()));
    const CVector v = zdot_variational(model, model.family(), zv);
    for (Eigen::Index a = 0; a < v.size(); ++a) out[a] = v[a];
  }
}

}  // namespace detail

/// Closed-form classical flow of the built-in models; custom models fall back
/// to the metric solve.
inline CVector zdot(const HamiltonianModel& model, const Label& z) {
  check_label(model.family(), z);
  CVector out(z.size());
  detail::zdot_raw(model, as_span(z), out.data());
  return out;
}

/// L = (i/2) sum_a [df/dz_a zdot_a - df/dz*_a zdot*_a] - H(z*, z), complex-valued.
inline Complex lagrangian_complex(const HamiltonianModel& model, const FamilyDescriptor& fam, const Label& z,
                                  const CVector& zd) {
  detail::check_model_family(model, fam);
  check_label(fam, z);
  if (zd.size() != z.size()) throw DimensionMismatch("zdot has wrong dimension");
  const CVector zc = z.conjugate();
  // f(zs, zp) is symmetric in its slots, so df/dz at (z*, z) is grad_f_conj(z, z*).
  const CVector df_dz = grad_f_conj(fam, z, zc);
  const CVector df_dzc = grad_f_conj(fam, zc, z);
  Complex kin{0.0, 0.0};
  for (Eigen::Index a = 0; a < z.size(); ++a) kin += df_dz[a] * zd[a] - df_dzc[a] * std::conj(zd[a]);
  return 0.5 * I * kin - hamiltonian_continued(model, zc, z);
}

inline double lagrangian(const HamiltonianModel& model, const FamilyDescriptor& fam, const Label& z,
                         const CVector& zd) {
  return lagrangian_complex(model, fam, z, zd).real();
}

namespace detail {

/// Real Lagrangian from the z*-gradient alone: L = -Im(sum conj(G_a) zdot_a) - H.
inline double lagrangian_raw(const HamiltonianModel& model, const FamilyDescriptor& fam, CSpan z, CSpan zc,
                             const Complex* zd, Complex* scratch) {
  f_and_grad(fam, zc, z, scratch);
  Complex w{0.0, 0.0};
  for (std::size_t a = 0; a < z.size(); ++a) w += std::conj(scratch[a]) * zd[a];
  return -w.imag() - h_raw(model, zc, z).real();
}

}  // namespace detail

// Observable kernels K(z*, z'): analytic continuations of diagonal expectations.
using ObservableKernel = std::function<Complex(CSpan zs, CSpan zp)>;

/// <z|b3^dagger b3|z> continued, b3 = (a1 - a2)/sqrt(2), SU(3) labels.
inline ObservableKernel b3_occupation_kernel(int N) {
  return [N](CSpan s, CSpan p) -> Complex {
    const Complex w = detail::nonzero(1.0 + s[0] * p[0] + s[1] * p[1], "b3 kernel");
    return 0.5 * N * (s[0] - s[1]) * (p[0] - p[1]) / w;
  };
}

inline ObservableKernel energy_kernel(const HamiltonianModel& model) {
  return [model](CSpan s, CSpan p) { return detail::h_raw(model, s, p); };
}

}  // namespace ccslab
