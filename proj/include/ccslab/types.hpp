#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <stdexcept>
#include <string>

namespace ccslab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Coherent-state label z in C^d. Thouless labels are stored flat, column-major
/// (virtual index fastest): entry (mu, alpha) lives at mu + M * alpha.
using Label = CVector;

using CSpan = std::span<const Complex>;

inline constexpr Complex I{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline CSpan as_span(const CVector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Error hierarchy. Everything derives from ccslab::Error so callers can catch
// the library as a whole; the CLI maps subclasses onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct BranchPointError : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct UnsupportedFamily : Error {
  using Error::Error;
};
struct CutoffRequired : Error {
  using Error::Error;
};
struct PoleError : Error {
  using Error::Error;
};
struct SingularMetric : Error {
  using Error::Error;
};
struct InvalidArgument : Error {
  using Error::Error;
};
struct PoleAmbiguity : Error {
  using Error::Error;
};
struct EmptyGrid : Error {
  using Error::Error;
};
struct BasisMismatch : Error {
  using Error::Error;
};
struct EigFailure : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

/// Step size fell below the representable resolution; `time` is where it happened.
struct StepSizeUnderflow : Error {
  double time;
  StepSizeUnderflow(const std::string& what, double t) : Error(what), time(t) {}
};

/// Overlap matrix conditioning exceeded the runtime guard.
struct IllConditioned : Error {
  double epsilon;
  double time;
  IllConditioned(const std::string& what, double eps, double t) : Error(what), epsilon(eps), time(t) {}
};

inline bool all_finite(const CVector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  }
  return true;
}

}  // namespace ccslab
