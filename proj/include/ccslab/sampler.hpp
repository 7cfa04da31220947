#pragma once

/**
 * @file sampler.hpp
 * @brief Initial basis construction: the SU(2) (eta, zeta) grid and the
 * one-by-one conditioned random sampler in angular coordinates.
 *
 * Each SU(n) label component is written as z_a = tan(theta_a/2) e^{-i phi_a}.
 */

#include "ccslab/propagator.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace ccslab {

struct Angles {
  double theta = 0.0;
  double phi = 0.0;
};

/// (theta, phi) of one label component, phi in [0, 2pi). z = 0 maps to (0, 0).
inline Angles su2_angles(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw PoleAmbiguity("theta = pi has no finite label");
  }
  const double r = std::abs(z);
  if (r == 0.0) return {0.0, 0.0};
  double phi = -std::arg(z);
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi = 0.0;
  return {2.0 * std::atan(r), phi};
}

inline Complex su2_label(double theta, double phi) {
  if (!(theta >= 0.0) || theta > kPi) throw InvalidArgument("theta must lie in [0, pi]");
  if (theta == kPi) throw PoleAmbiguity("theta = pi maps to the point at infinity");
  return std::tan(0.5 * theta) * std::exp(Complex{0.0, -phi});
}

// ---------------------------------------------------------------------------
// Regular grid

struct GridConfig {
  Complex center{0.0, 0.0};
  double spacing_eta = 0.1;
  double spacing_zeta = 0.1;
  int extent_eta = 8;   // points per side: the grid has 2*extent+1 rows
  int extent_zeta = 8;
  int reference_N = 0;  // > 0: spacings scale as sqrt(reference_N / N)
};

struct GridEnsemble {
  std::vector<Label> labels;
  double weight = 0.0;
  double spacing_eta = 0.0;
  double spacing_zeta = 0.0;
};

/// Rectangular lattice in (eta, zeta) = (theta, phi sin(theta)) about the
/// centre, mapped back to labels. Points with theta outside (0, pi) or phi
/// outside [phi' - pi, phi' + pi) are cropped.
inline GridEnsemble grid_su2(const GridConfig& cfg, int N) {
  if (!(cfg.spacing_eta > 0.0) || !(cfg.spacing_zeta > 0.0)) throw InvalidArgument("grid spacings must be positive");
  if (cfg.extent_eta < 0 || cfg.extent_zeta < 0) throw InvalidArgument("grid extents must be >= 0");
  if (N < 1) throw InvalidArgument("grid needs N >= 1");
  const double scale = cfg.reference_N > 0 ? std::sqrt(static_cast<double>(cfg.reference_N) / N) : 1.0;
  const double de = cfg.spacing_eta * scale, dz = cfg.spacing_zeta * scale;
  const Angles c = su2_angles(cfg.center);
  const double eta0 = c.theta, zeta0 = c.phi * std::sin(c.theta);

  GridEnsemble out;
  out.spacing_eta = de;
  out.spacing_zeta = dz;
  out.weight = (N + 1.0) / (4.0 * kPi) * de * dz;
  for (int i = -cfg.extent_eta; i <= cfg.extent_eta; ++i) {
    const double theta = eta0 + i * de;
    if (!(theta > 0.0 && theta < kPi)) continue;
    const double s = std::sin(theta);
    for (int k = -cfg.extent_zeta; k <= cfg.extent_zeta; ++k) {
      const double phi = (zeta0 + k * dz) / s;
      if (phi < c.phi - kPi || phi >= c.phi + kPi) continue;
      Label z(1);
      z[0] = su2_label(theta, phi);
      out.labels.push_back(std::move(z));
    }
  }
  if (out.labels.empty()) throw EmptyGrid("every grid point was cropped");
  return out;
}

// ---------------------------------------------------------------------------
// Conditioned random sampling

/// How a width sigma enters exp(-(x - x')^2 / (2 s)).
enum class WidthMode {
  StdDev,    // s = sigma^2
  Variance,  // s = sigma
};

struct ConditionedConfig {
  Label center;
  std::vector<double> sigma_theta;  // one per label component
  std::vector<double> sigma_phi;
  double epsilon_limit = 1e10;
  int target_M = 1;
  int max_attempts = 10000;  // consecutive rejections per element
  WidthMode width_mode = WidthMode::StdDev;
  std::uint64_t seed = 1;
};

struct ConditionedEnsemble {
  std::vector<Label> labels;
  double epsilon = 1.0;
  long draws = 0;
};

/// The conditioned sampler could not reach the target size.
struct Saturated : Error {
  ConditionedEnsemble partial;
  int target;
  Saturated(const std::string& what, ConditionedEnsemble p, int tgt) : Error(what), partial(std::move(p)), target(tgt) {}
};

namespace detail {

/// Standard normal deviates by Box-Muller over mt19937_64, written out so the
/// stream is fixed across standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = ((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = (eng_() >> 11) * 0x1.0p-53;        // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace detail

/// One-by-one sampler: the centre is element 0; each Gaussian candidate is
/// kept iff the grown overlap matrix has epsilon < epsilon_limit.
inline ConditionedEnsemble sample_conditioned(const FamilyDescriptor& fam, const ConditionedConfig& cfg) {
  if (!fam.is<SUnBoson>()) throw UnsupportedFamily("angular sampling is defined for SU(n) labels only");
  check_label(fam, cfg.center, "sampling centre");
  const int d = label_dim(fam);
  if (static_cast<int>(cfg.sigma_theta.size()) != d || static_cast<int>(cfg.sigma_phi.size()) != d)
    throw DimensionMismatch("need one theta and one phi width per label component");
  for (int a = 0; a < d; ++a)
    if (!(cfg.sigma_theta[a] > 0.0) || !(cfg.sigma_phi[a] > 0.0)) throw InvalidArgument("widths must be positive");
  if (!(cfg.epsilon_limit > 1.0)) throw InvalidArgument("epsilon limit must exceed 1");
  if (cfg.target_M < 1) throw InvalidArgument("target basis size must be >= 1");
  if (cfg.max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");

  std::vector<Angles> centre(d);
  std::vector<double> sd_theta(d), sd_phi(d);
  for (int a = 0; a < d; ++a) {
    centre[a] = su2_angles(cfg.center[a]);
    const bool var = cfg.width_mode == WidthMode::Variance;
    sd_theta[a] = var ? std::sqrt(cfg.sigma_theta[a]) : cfg.sigma_theta[a];
    sd_phi[a] = var ? std::sqrt(cfg.sigma_phi[a]) : cfg.sigma_phi[a];
  }

  ConditionedEnsemble out;
  out.labels.push_back(cfg.center);
  detail::NormalStream gauss(cfg.seed);

  // Gram matrix grows by one row/column per acceptance.
  CMatrix gram = CMatrix::Ones(1, 1);
  while (static_cast<int>(out.labels.size()) < cfg.target_M) {
    bool accepted = false;
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
      ++out.draws;
      Label z(d);
      bool in_range = true;
      for (int a = 0; a < d; ++a) {
        const double theta = centre[a].theta + sd_theta[a] * gauss();
        const double phi = centre[a].phi + sd_phi[a] * gauss();
        if (!(theta > 0.0 && theta < kPi) || phi < centre[a].phi - kPi || phi >= centre[a].phi + kPi) {
          in_range = false;
          continue;
        }
        z[a] = su2_label(theta, phi);
      }
      if (!in_range) continue;

      const auto m = gram.rows();
      CMatrix grown(m + 1, m + 1);
      grown.topLeftCorner(m, m) = gram;
      for (Eigen::Index j = 0; j < m; ++j) {
        grown(j, m) = normalized_overlap(fam, out.labels[static_cast<std::size_t>(j)], z);
        grown(m, j) = std::conj(grown(j, m));
      }
      grown(m, m) = 1.0;
      const double eps = conditioning_factor(OverlapMatrix::from(grown));
      if (eps < cfg.epsilon_limit) {
        gram = std::move(grown);
        out.labels.push_back(std::move(z));
        out.epsilon = eps;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Saturated("sampler saturated at M = " + std::to_string(out.labels.size()) + " of " +
                          std::to_string(cfg.target_M),
                      out, cfg.target_M);
    }
  }
  return out;
}

}  // namespace ccslab
