#pragma once

#include "ccslab/models.hpp"
#include "ccslab/ode.hpp"

#include <vector>

namespace ccslab {

/// Classical orbit sampled on a fixed output grid: labels z(t) and the real
/// action S(t) = int_0^t L dt.
struct Trajectory {
  std::vector<double> times;
  std::vector<Label> labels;
  std::vector<double> actions;

  std::size_t size() const { return times.size(); }
};

namespace detail {

inline void pack_label(const Complex* z, int d, double* out) {
  for (int a = 0; a < d; ++a) {
    out[2 * a] = z[a].real();
    out[2 * a + 1] = z[a].imag();
  }
}

inline void unpack_label(const double* in, int d, Complex* z) {
  for (int a = 0; a < d; ++a) z[a] = {in[2 * a], in[2 * a + 1]};
}

inline std::vector<double> uniform_grid(double t_final, int samples) {
  if (t_final == 0.0) return {0.0};
  if (samples <= 1) return {0.0, t_final};
  std::vector<double> g(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) g[i] = t_final * i / (samples - 1);
  g.back() = t_final;
  return g;
}

}  // namespace detail

/// Integrates (z, S) jointly; the action is an extra ODE component so it
/// shares the error control of the labels.
inline Trajectory propagate_trajectory(const HamiltonianModel& model, const FamilyDescriptor& fam, const Label& z0,
                                       const std::vector<double>& sample_times, double tol = 1e-9) {
  detail::check_model_family(model, fam);
  check_label(fam, z0, "initial label");
  if (!(tol > 0.0)) throw InvalidArgument("integrator tolerance must be positive");
  if (sample_times.empty() || sample_times.front() != 0.0) {
    throw InvalidArgument("trajectory sample grid must start at t = 0");
  }
  const int d = label_dim(fam);

  RVector y(2 * d + 1);
  detail::pack_label(z0.data(), d, y.data());
  y[2 * d] = 0.0;

  std::vector<Complex> z(d), zc(d), zd(d), scratch(d);
  auto rhs = [&](double, const RVector& s, RVector& ds) {
    detail::unpack_label(s.data(), d, z.data());
    for (int a = 0; a < d; ++a) zc[a] = std::conj(z[a]);
    detail::zdot_raw(model, CSpan(z), zd.data());
    detail::pack_label(zd.data(), d, ds.data());
    ds[2 * d] = detail::lagrangian_raw(model, fam, CSpan(z), CSpan(zc), zd.data(), scratch.data());
  };

  Trajectory traj;
  auto sample = [&](double t, const RVector& s) {
    Label zl(d);
    detail::unpack_label(s.data(), d, zl.data());
    traj.times.push_back(t);
    traj.labels.push_back(std::move(zl));
    traj.actions.push_back(s[2 * d]);
  };

  DormandPrince45 solver(OdeOptions{tol, tol});
  solver.integrate(rhs, 0.0, y, sample_times, sample);
  return traj;
}

/// Convenience overload: `samples` evenly spaced output times on [0, t_final].
inline Trajectory propagate_trajectory(const HamiltonianModel& model, const FamilyDescriptor& fam, const Label& z0,
                                       double t_final, double tol = 1e-9, int samples = 101) {
  if (t_final < 0.0) throw InvalidArgument("t_final must be >= 0");
  return propagate_trajectory(model, fam, z0, detail::uniform_grid(t_final, samples), tol);
}

/// A(z*(t), z(0), t) = S(t) - (i/2) [f(z*(t), z(t)) + f(z*(0), z(0))] at the last sample.
inline Complex complex_action(const FamilyDescriptor& fam, const Trajectory& traj) {
  if (traj.size() == 0) throw InvalidArgument("complex_action needs a nonempty trajectory");
  const Label& zt = traj.labels.back();
  const Label& z0 = traj.labels.front();
  const Complex ft = log_overlap(fam, zt.conjugate(), zt);
  const Complex f0 = log_overlap(fam, z0.conjugate(), z0);
  return traj.actions.back() - 0.5 * I * (ft + f0);
}

}  // namespace ccslab
