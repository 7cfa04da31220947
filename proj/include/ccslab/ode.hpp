#pragma once

/**
 * @file ode.hpp
 * @brief Dormand-Prince 5(4) with step-size control and 4th-order dense output.
 *
 * The state is a real vector; complex quantities are packed as (re, im) pairs
 * by the callers. Output samples are produced by interpolation, so the step
 * sequence never depends on the requested sample grid.
 */

#include "ccslab/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>

namespace ccslab {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  double initial_step = 0.0;  // 0 selects automatically
  double max_step = 0.0;      // 0 means unbounded
  long max_steps = 10'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

using OdeRhs = std::function<void(double t, const RVector& y, RVector& dy)>;
using OdeSample = std::function<void(double t, const RVector& y)>;

class DormandPrince45 {
 public:
  explicit DormandPrince45(OdeOptions opt = {}) : opt_(opt) {
    if (!(opt_.rtol > 0.0) || !(opt_.atol >= 0.0)) throw InvalidArgument("integrator tolerances must be positive");
  }

  /// Integrates from (t0, y0) through the last entry of `samples` (sorted,
  /// all >= t0), invoking `sample` at each requested time.
  OdeStats integrate(const OdeRhs& rhs, double t0, RVector y, std::span<const double> samples,
                     const OdeSample& sample) const {
    OdeStats st;
    std::size_t next = 0;
    while (next < samples.size() && samples[next] <= t0) {
      if (samples[next] < t0) throw InvalidArgument("sample time precedes the initial time");
      sample(samples[next++], y);
    }
    if (next == samples.size()) return st;
    const double t_end = samples.back();

    const auto n = y.size();
    RVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
    RVector r1(n), r2(n), r3(n), r4(n), r5(n), yi(n);

    double t = t0;
    rhs(t, y, k1);
    ++st.rhs_evals;
    double h = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(rhs, t, y, k1, st);
    h = std::min(h, t_end - t);
    if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);

    double err_prev = 1e-4;
    while (t < t_end) {
      if (st.accepted + st.rejected >= opt_.max_steps) {
        throw StepSizeUnderflow("maximum number of integrator steps exceeded", t);
      }
      if (h < 1e-13 * std::max(1.0, std::abs(t))) {
        throw StepSizeUnderflow("integrator step size underflow at t = " + std::to_string(t), t);
      }
      const bool last = t + h >= t_end;
      if (last) h = t_end - t;

      ytmp = y + h * (a21 * k1);
      rhs(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs(t + h, ynew, k7);
      st.rhs_evals += 6;

      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double q = err[i] / sc;
        acc += q * q;
      }
      const double e = n > 0 ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
      if (!std::isfinite(e)) {
        ++st.rejected;
        h *= 0.1;
        continue;
      }

      if (e <= 1.0) {
        const double t_new = last ? t_end : t + h;
        // Dense-output coefficients.
        r1 = y;
        r2 = ynew - y;
        r3 = h * k1 - r2;
        r4 = r2 - h * k7 - r3;
        r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        while (next < samples.size() && samples[next] <= t_new) {
          const double th = (samples[next] - t) / h;
          const double th1 = 1.0 - th;
          yi = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
          if (samples[next] == t_new) yi = ynew;
          sample(samples[next++], yi);
        }
        t = t_new;
        y.swap(ynew);
        k1.swap(k7);
        ++st.accepted;
        // PI step-size control.
        double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, 10.0);
        err_prev = std::max(e, 1e-4);
        h *= fac;
        if (opt_.max_step > 0.0) h = std::min(h, opt_.max_step);
      } else {
        ++st.rejected;
        h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
      }
    }
    return st;
  }

 private:
  double initial_step(const OdeRhs& rhs, double t, const RVector& y, const RVector& f0, OdeStats& st) const {
    const auto n = y.size();
    auto wnorm = [&](const RVector& v) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double q = v[i] / (opt_.atol + opt_.rtol * std::abs(y[i]));
        acc += q * q;
      }
      return n > 0 ? std::sqrt(acc / static_cast<double>(n)) : 0.0;
    };
    const double d0 = wnorm(y), d1n = wnorm(f0);
    double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    RVector y1 = y + h0 * f0, f1(n);
    rhs(t + h0, y1, f1);
    ++st.rhs_evals;
    const double d2 = wnorm(f1 - f0) / h0;
    const double h1 = std::max(d1n, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                  : std::pow(0.01 / std::max(d1n, d2), 1.0 / 5.0);
    return std::min(100.0 * h0, h1);
  }

  OdeOptions opt_;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace ccslab
