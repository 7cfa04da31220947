#pragma once

#include "ccslab/types.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <variant>

namespace ccslab {

/// Heisenberg-Weyl coherent states over n bosonic modes with unrestricted
/// occupations. `cutoff` is the largest per-mode occupation kept when a Fock
/// expansion is requested; the overlap geometry itself never needs it.
struct Canonical {
  int n = 1;
  std::optional<int> cutoff;
};

/// SU(n) bosonic coherent states: n modes, fixed total particle number N.
/// Spin J is SUnBoson{2, 2J}.
struct SUnBoson {
  int n = 2;
  int N = 1;
};

/// Thouless-parametrized Slater determinants: N occupied, M virtual orbitals,
/// label is an M x N matrix.
struct Thouless {
  int N = 1;
  int M = 1;
};

class FamilyDescriptor {
 public:
  using Variant = std::variant<Canonical, SUnBoson, Thouless>;

  FamilyDescriptor(Canonical c) : v_(c) { validate(); }
  FamilyDescriptor(SUnBoson s) : v_(s) { validate(); }
  FamilyDescriptor(Thouless t) : v_(t) { validate(); }

  static FamilyDescriptor canonical(int n, std::optional<int> cutoff = std::nullopt) {
    return Canonical{n, cutoff};
  }
  static FamilyDescriptor sun(int n, int N) { return SUnBoson{n, N}; }
  static FamilyDescriptor thouless(int N, int M) { return Thouless{N, M}; }

  /// Spin J coherent states; J must be a positive half-integer.
  static FamilyDescriptor spin(double J) {
    const double twoJ = 2.0 * J;
    if (!(twoJ >= 1.0) || std::abs(twoJ - std::round(twoJ)) > 1e-12) {
      throw InvalidArgument("spin J must be a positive half-integer, got " + std::to_string(J));
    }
    return SUnBoson{2, static_cast<int>(std::lround(twoJ))};
  }

  const Variant& variant() const { return v_; }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }

  bool is_spin() const { return is<SUnBoson>() && as<SUnBoson>().n == 2; }
  /// Total particle number for SU(n); 2J for spin.
  int particle_number() const { return is<SUnBoson>() ? as<SUnBoson>().N : 0; }
  double spin_j() const { return 0.5 * particle_number(); }

  std::string name() const {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Canonical>) {
            return "Canonical(n=" + std::to_string(f.n) + ")";
          } else if constexpr (std::is_same_v<T, SUnBoson>) {
            return "SU(" + std::to_string(f.n) + ")Boson(N=" + std::to_string(f.N) + ")";
          } else {
            return "Thouless(N=" + std::to_string(f.N) + ",M=" + std::to_string(f.M) + ")";
          }
        },
        v_);
  }

  friend bool operator==(const FamilyDescriptor& a, const FamilyDescriptor& b) {
    if (a.v_.index() != b.v_.index()) return false;
    return std::visit(
        [&](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          const auto& g = std::get<T>(b.v_);
          if constexpr (std::is_same_v<T, Canonical>) return f.n == g.n;
          else if constexpr (std::is_same_v<T, SUnBoson>) return f.n == g.n && f.N == g.N;
          else return f.N == g.N && f.M == g.M;
        },
        a.v_);
  }

 private:
  void validate() const {
    std::visit(
        [](const auto& f) {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Canonical>) {
            if (f.n < 1) throw InvalidArgument("Canonical family needs n >= 1");
            if (f.cutoff && *f.cutoff < 0) throw InvalidArgument("Canonical cutoff must be >= 0");
          } else if constexpr (std::is_same_v<T, SUnBoson>) {
            if (f.n < 2) throw InvalidArgument("SU(n) boson family needs n >= 2");
            if (f.N < 1) throw InvalidArgument("SU(n) boson family needs N >= 1");
          } else {
            if (f.N < 1 || f.M < 1) throw InvalidArgument("Thouless family needs N >= 1 and M >= 1");
          }
        },
        v_);
  }

  Variant v_;
};

inline int label_dim(const FamilyDescriptor& fam) {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Canonical>) return f.n;
        else if constexpr (std::is_same_v<T, SUnBoson>) return f.n - 1;
        else return f.N * f.M;
      },
      fam.variant());
}

inline void check_label(const FamilyDescriptor& fam, const Label& z, const char* what = "label") {
  if (z.size() != label_dim(fam)) {
    throw DimensionMismatch(std::string(what) + " has dimension " + std::to_string(z.size()) + ", " +
                            fam.name() + " expects " + std::to_string(label_dim(fam)));
  }
  if (!all_finite(z)) throw InvalidArgument(std::string(what) + " has non-finite entries");
}

}  // namespace ccslab
