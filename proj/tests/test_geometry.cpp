#include "ccslab/ccslab.hpp"
#include "ccslab/suite.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ccslab;

namespace {

std::vector<FamilyDescriptor> all_families() {
  return {FamilyDescriptor::canonical(2), FamilyDescriptor::spin(0.5), FamilyDescriptor::spin(3.0),
          FamilyDescriptor::sun(3, 7),    FamilyDescriptor::sun(4, 2),  FamilyDescriptor::thouless(1, 2),
          FamilyDescriptor::thouless(2, 2), FamilyDescriptor::thouless(2, 3)};
}

Label rnd(std::mt19937_64& rng, int d, double s = 0.4) { return detail::random_label(rng, d, s); }

}  // namespace

TEST(LogOverlap, CanonicalIsBilinear) {
  const auto fam = FamilyDescriptor::canonical(2);
  Label zs(2), zp(2);
  zs << Complex{1, 2}, Complex{0.5, -1};
  zp << Complex{-1, 0.3}, Complex{2, 1};
  EXPECT_NEAR(std::abs(log_overlap(fam, zs, zp) - (zs[0] * zp[0] + zs[1] * zp[1])), 0.0, 1e-15);
}

TEST(LogOverlap, ReferenceStateGivesZero) {
  for (const auto& fam : all_families()) {
    const Label z = Label::Zero(label_dim(fam));
    EXPECT_EQ(log_overlap(fam, z, z), Complex(0.0, 0.0)) << fam.name();
  }
}

TEST(LogOverlap, SpinMatchesClosedForm) {
  const auto fam = FamilyDescriptor::spin(2.5);
  const Label zs = Label::Constant(1, Complex{0.3, -0.2});
  const Label zp = Label::Constant(1, Complex{-0.7, 0.4});
  const Complex want = 5.0 * std::log(1.0 + zs[0] * zp[0]);
  EXPECT_NEAR(std::abs(log_overlap(fam, zs, zp) - want), 0.0, 1e-14);
}

TEST(LogOverlap, ThoulessSingleParticleEqualsSUn) {
  // One fermion in M + 1 orbitals and one boson in M + 1 modes share CP^M.
  std::mt19937_64 rng(1);
  const auto th = FamilyDescriptor::thouless(1, 3);
  const auto su = FamilyDescriptor::sun(4, 1);
  for (int i = 0; i < 10; ++i) {
    const Label zs = rnd(rng, 3), zp = rnd(rng, 3);
    EXPECT_NEAR(std::abs(log_overlap(th, zs, zp) - log_overlap(su, zs, zp)), 0.0, 1e-13);
    EXPECT_LT(detail::rel_err(metric(th, zp), metric(su, zp)), 1e-13);
    EXPECT_NEAR(measure_density(th, zp), measure_density(su, zp), 1e-13 * measure_density(su, zp));
  }
}

TEST(LogOverlap, BranchPointAndDimensionErrors) {
  const auto fam = FamilyDescriptor::spin(1.0);
  const Label zs = Label::Constant(1, Complex{1.0, 0.0});
  const Label zp = Label::Constant(1, Complex{-1.0, 0.0});
  EXPECT_THROW(log_overlap(fam, zs, zp), BranchPointError);
  EXPECT_THROW(log_overlap(fam, Label::Zero(2), zp), DimensionMismatch);
}

TEST(GradConj, MatchesFiniteDifference) {
  std::mt19937_64 rng(2);
  for (const auto& fam : all_families()) {
    const int d = label_dim(fam);
    for (int trial = 0; trial < 5; ++trial) {
      const Label zs = rnd(rng, d), zp = rnd(rng, d);
      CVector fd(d);
      const double h = 1e-5;
      for (int a = 0; a < d; ++a) {
        Label p = zs, m = zs;
        p[a] += h;
        m[a] -= h;
        fd[a] = (log_overlap(fam, p, zp) - log_overlap(fam, m, zp)) / (2 * h);
      }
      EXPECT_LT(detail::rel_err(grad_f_conj(fam, zs, zp), fd), 1e-6) << fam.name();
    }
  }
}

TEST(GradConj, SpinClosedForm) {
  const auto fam = FamilyDescriptor::spin(1.0);
  const Label zs = Label::Constant(1, Complex{0.2, 0.1});
  const Label zp = Label::Constant(1, Complex{0.4, -0.3});
  const Complex want = 2.0 * zp[0] / (1.0 + zs[0] * zp[0]);
  EXPECT_NEAR(std::abs(grad_f_conj(fam, zs, zp)[0] - want), 0.0, 1e-15);
}

TEST(Metric, MatchesMixedHessian) {
  std::mt19937_64 rng(3);
  for (const auto& fam : all_families()) {
    const int d = label_dim(fam);
    const Label z = rnd(rng, d);
    const Label zc = z.conjugate();
    const double h = 1e-4;
    CMatrix fd(d, d);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        auto f = [&](double sb, double sa) {
          Label s = zc, p = z;
          s[b] += sb;
          p[a] += sa;
          return log_overlap(fam, s, p);
        };
        fd(a, b) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
      }
    }
    EXPECT_LT(detail::rel_err(metric(fam, z), fd), 1e-5) << fam.name();
  }
}

TEST(Metric, HermitianPositiveDefinite) {
  std::mt19937_64 rng(4);
  for (const auto& fam : all_families()) {
    const CMatrix g = metric(fam, rnd(rng, label_dim(fam), 1.0));
    EXPECT_LT((g - g.adjoint()).norm(), 1e-14 * g.norm()) << fam.name();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0) << fam.name();
  }
}

TEST(Metric, Examples) {
  const auto c = FamilyDescriptor::canonical(3);
  EXPECT_EQ(metric(c, Label::Zero(3)), CMatrix::Identity(3, 3));
  const auto s = FamilyDescriptor::spin(2.0);  // N = 4
  EXPECT_NEAR(metric(s, Label::Zero(1))(0, 0).real(), 4.0, 1e-15);
  const Label z = Label::Constant(1, Complex{0.6, -0.8});  // |z| = 1
  EXPECT_NEAR(metric(s, z)(0, 0).real(), 4.0 / 4.0, 1e-14);
}

TEST(Kappa, KnownValues) {
  EXPECT_DOUBLE_EQ(closure_kappa(FamilyDescriptor::canonical(2)), 1.0);
  EXPECT_NEAR(closure_kappa(FamilyDescriptor::thouless(1, 1)), 2.0, 1e-12);
  // (N+1)!/(N! N) for SU(2)
  EXPECT_NEAR(closure_kappa(FamilyDescriptor::spin(1.5)), 4.0 / 3.0, 1e-12);
  // Thouless N=2, M=2: (4! / 2!) (3! / 1!) = 72
  EXPECT_NEAR(closure_kappa(FamilyDescriptor::thouless(2, 2)), 72.0, 1e-9);
}

TEST(Measure, SpinDensityAtOrigin) {
  // (2J+1)/pi at z = 0
  EXPECT_NEAR(measure_density(FamilyDescriptor::spin(2.0), Label::Zero(1)), 5.0 / kPi, 1e-14);
}

TEST(Measure, ClosureBySpinQuadrature) {
  std::mt19937_64 rng(5);
  std::vector<double> xt, wt;
  detail::gauss_legendre(120, 0.0, kPi, xt, wt);
  for (int twoJ : {1, 2, 5}) {
    const auto fam = FamilyDescriptor::spin(0.5 * twoJ);
    const auto basis = FockBasis::spin(twoJ);
    CVector psi = CVector::Zero(basis->size());
    psi[0] = 1.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < xt.size(); ++i) {
      const double r = std::tan(0.5 * xt[i]);
      const double jac = r * 0.5 / std::pow(std::cos(0.5 * xt[i]), 2);
      const Label z = Label::Constant(1, Complex{r, 0.0});
      acc += wt[i] * 2 * kPi * jac * measure_density(fam, z) * std::norm(fock_coefficients(fam, z, basis).amps.dot(psi));
    }
    EXPECT_NEAR(acc, 1.0, 1e-6) << "2J = " << twoJ;
  }
}

TEST(Measure, ThoulessMonteCarloNormalization) {
  // N = 1, M = 2 with the per-entry proposal 1/(pi (1+|z|^2)^2).
  const auto fam = FamilyDescriptor::thouless(1, 2);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 400000;
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < n; ++s) {
    Label z(2);
    double q = 1.0;
    for (int a = 0; a < 2; ++a) {
      const double uu = u(rng);
      const double r = std::sqrt(uu / (1.0 - uu));
      z[a] = std::polar(r, 2 * kPi * u(rng));
      q *= 1.0 / (kPi * (1 + r * r) * (1 + r * r));
    }
    const double v = measure_density(fam, z) * std::exp(-log_overlap(fam, z.conjugate(), z).real()) / q;
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / n;
  const double se = std::sqrt((acc2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 1.0, std::max(5 * se, 5e-3));
}

TEST(NormalizedOverlap, MatchesFockInnerProduct) {
  std::mt19937_64 rng(7);
  const std::vector<FamilyDescriptor> fams{FamilyDescriptor::spin(2.0), FamilyDescriptor::sun(3, 6),
                                           FamilyDescriptor::canonical(1, 40)};
  for (const auto& fam : fams) {
    const int d = label_dim(fam);
    for (int i = 0; i < 5; ++i) {
      const Label a = rnd(rng, d, 0.6), b = rnd(rng, d, 0.6);
      const Complex want = fock_coefficients(fam, a).amps.dot(fock_coefficients(fam, b).amps);
      EXPECT_NEAR(std::abs(normalized_overlap(fam, a, b) - want), 0.0, 1e-12) << fam.name();
    }
  }
}

TEST(NormalizedOverlap, UnitDiagonalAndBound) {
  std::mt19937_64 rng(8);
  for (const auto& fam : all_families()) {
    const int d = label_dim(fam);
    const Label a = rnd(rng, d, 1.0), b = rnd(rng, d, 1.0);
    EXPECT_NEAR(std::abs(normalized_overlap(fam, a, a) - 1.0), 0.0, 1e-12) << fam.name();
    EXPECT_LE(std::abs(normalized_overlap(fam, a, b)), 1.0 + 1e-12) << fam.name();
  }
}

TEST(Family, Validation) {
  EXPECT_THROW(FamilyDescriptor::spin(0.3), InvalidArgument);
  EXPECT_TRUE(FamilyDescriptor::spin(1.5).is_spin());
  EXPECT_EQ(FamilyDescriptor::spin(1.5).particle_number(), 3);
  EXPECT_EQ(label_dim(FamilyDescriptor::thouless(2, 3)), 6);
  EXPECT_THROW(check_label(FamilyDescriptor::sun(3, 2), Label::Zero(1)), DimensionMismatch);
}
