#include "ccslab/ccslab.hpp"
#include "ccslab/suite.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ccslab;

namespace {

Label L1(Complex z) { return Label::Constant(1, z); }

Label L2(Complex a, Complex b) {
  Label z(2);
  z << a, b;
  return z;
}

std::vector<Label> cloud(const Label& centre, int M, double s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Label> out{centre};
  for (int j = 1; j < M; ++j) out.push_back(centre + detail::random_label(rng, static_cast<int>(centre.size()), s));
  return out;
}

}  // namespace

TEST(Overlap, SpinHalfExample) {
  const auto fam = FamilyDescriptor::spin(0.5);
  const auto om = overlap_matrix(fam, {L1(0.0), L1(1.0)});
  EXPECT_NEAR(om.entries(0, 1).real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(om.lambda_min, 1.0 - 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(om.lambda_max, 1.0 + 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Overlap, HermitianPositiveSemidefinite) {
  const auto fam = FamilyDescriptor::sun(3, 20);
  const auto om = overlap_matrix(fam, cloud(L2(0.3, 0.3), 12, 0.3, 1));
  EXPECT_LT((om.entries - om.entries.adjoint()).norm(), 1e-14);
  EXPECT_GT(om.lambda_min, -1e-12);
  for (Eigen::Index j = 0; j < 12; ++j) EXPECT_EQ(om.entries(j, j), Complex(1.0, 0.0));
}

TEST(Conditioning, Examples) {
  EXPECT_DOUBLE_EQ(conditioning_factor(CMatrix::Identity(4, 4).eval()), 1.0);
  CMatrix m(2, 2);
  m << 1.0, Complex{0.0, 0.9}, Complex{0.0, -0.9}, 1.0;
  EXPECT_NEAR(conditioning_factor(m), 19.0, 1e-12);
  const CMatrix ones = CMatrix::Ones(2, 2);
  EXPECT_TRUE(std::isinf(conditioning_factor(ones)));
}

TEST(Coupling, DiagonalVanishes) {
  BasisEnsemble ens(TripleWell{-1.0, -1.0, 30}, Scheme::Unitary, cloud(L2(0.3, 0.2), 6, 0.3, 2));
  const CMatrix k = coupling_matrix(ens);
  for (Eigen::Index j = 0; j < 6; ++j) EXPECT_EQ(k(j, j), Complex(0.0, 0.0));
  EXPECT_GT(k.norm(), 0.0);
}

TEST(Amplitudes, SolveDResidual) {
  BasisEnsemble ens(DoubleWell{1.0, 1.0, 20}, Scheme::Unitary, cloud(L1(0.4), 8, 0.3, 3));
  ens.actions = RVector::LinSpaced(8, 0.0, 1.4);
  initialize_amplitudes(ens, L1({0.4, 0.05}));
  const auto om = overlap_matrix(ens);
  CVector r(8);
  for (Eigen::Index l = 0; l < 8; ++l) {
    Complex acc{0.0, 0.0};
    for (Eigen::Index k = 0; k < 8; ++k) acc += om.entries(l, k) * ens.D[k] * std::exp(I * (ens.actions[k] - ens.actions[l]));
    r[l] = acc - ens.C[l];
  }
  EXPECT_LT(r.norm(), 1e-10 * ens.C.norm());
}

TEST(Amplitudes, DuplicateLabelsAreIllConditioned) {
  BasisEnsemble ens(DoubleWell{1.0, 1.0, 10}, Scheme::Unitary, {L1(0.3), L1(0.3)});
  EXPECT_THROW(initialize_amplitudes(ens, L1(0.3)), IllConditioned);
}

TEST(Amplitudes, ReconstructionAtStart) {
  const auto fam = FamilyDescriptor::sun(3, 8);
  const Label zp = L2({0.2, 0.1}, {-0.1, 0.3});
  auto labels = cloud(zp, 5, 0.4, 4);
  BasisEnsemble ens(TripleWell{1.0, 0.5, 8}, Scheme::Unitary, labels);
  initialize_amplitudes(ens, zp);
  const auto psi = reconstruct_fock(ens);
  const auto want = fock_coefficients(fam, zp);
  EXPECT_LT((psi.amps - want.amps).norm(), 1e-9);
  EXPECT_NEAR(ensemble_norm(ens), 1.0, 1e-9);

  // Same state entered as a Fock vector.
  BasisEnsemble ens2(TripleWell{1.0, 0.5, 8}, Scheme::Unitary, labels);
  initialize_amplitudes(ens2, want);
  EXPECT_LT((ens2.C - ens.C).norm(), 1e-12);
}

TEST(Propagation, SingleElementKeepsAmplitude) {
  BasisEnsemble ens(TripleWell{-1.0, -1.0, 50}, Scheme::Unitary, {L2(0.3, 0.1)});
  initialize_amplitudes(ens, ens.labels[0]);
  const Complex c0 = ens.C[0];
  propagate(ens, detail::uniform_grid(3.0, 7), {1e-9}, [&](const BasisEnsemble& e) {
    EXPECT_EQ(e.C[0], c0);
  });
}

TEST(Propagation, UnitarySingleElementIsClassical) {
  const HamiltonianModel m = TripleWell{-1.0, -1.0, 100};
  const Label z0 = L2({0.29, 0.01}, {0.29, -0.02});
  BasisEnsemble u(m, Scheme::Unitary, {z0});
  BasisEnsemble c(m, Scheme::Classical, {z0});
  initialize_amplitudes(u, z0);
  initialize_amplitudes(c, z0);
  const auto ts = detail::uniform_grid(5.0, 11);
  propagate(u, ts, {1e-10}, nullptr);
  propagate(c, ts, {1e-10}, nullptr);
  EXPECT_LT((u.labels[0] - c.labels[0]).norm(), 1e-12);
  EXPECT_NEAR(u.actions[0], c.actions[0], 1e-12);
  const auto traj = propagate_trajectory(m, m.family(), z0, ts, 1e-10);
  EXPECT_LT((c.labels[0] - traj.labels.back()).norm(), 1e-8);
}

TEST(Propagation, NonUnitarySingleElementIsClassical) {
  const int N = 40;
  const HamiltonianModel m = TripleWell{-1.0, -1.0, N};
  const Label z0 = L2({0.2, 0.1}, {0.35, 0.0});
  BasisEnsemble nu(m, Scheme::NonUnitary, {z0}, RVector::Constant(1, 2.5));
  initialize_amplitudes(nu, z0);
  propagate(nu, {0.0, 2.0}, {1e-10}, nullptr);
  const auto traj = propagate_trajectory(m, m.family(), z0, {0.0, 2.0}, 1e-10);
  const Label& zt = traj.labels.back();
  const auto psi = reconstruct_fock(nu);
  EXPECT_NEAR(std::abs(psi.amps.dot(fock_coefficients(m.family(), zt).amps)), 1.0, 1e-10);
  const std::vector<Complex> s{std::conj(zt[0]), std::conj(zt[1])}, p{zt[0], zt[1]};
  EXPECT_NEAR(observable_continued(nu, b3_occupation_kernel(N)).value,
              b3_occupation_kernel(N)(CSpan(s), CSpan(p)).real(), 1e-8);
}

TEST(Propagation, LinearHamiltonianIsExact) {
  // chi = 0: coherent states stay coherent, so any basis containing z' is exact.
  const int N = 10;
  const DoubleWell dw{1.0, 0.0, N};
  const Label zp = L1({0.5, 0.2});
  BasisEnsemble ens(dw, Scheme::Unitary, cloud(zp, 5, 0.5, 5));
  initialize_amplitudes(ens, zp);
  const SpectralPropagator exact(build_h_doublewell(dw), FockBasis::spin(N));
  const auto psi0 = fock_coefficients(ens.fam, zp);
  double worst = 0.0;
  propagate(ens, detail::uniform_grid(5.0, 11), {1e-10}, [&](const BasisEnsemble& e) {
    worst = std::max(worst, 1.0 - fidelity(reconstruct_fock(e), exact.evolve(psi0, e.time)));
  });
  EXPECT_LT(worst, 1e-7);
}

TEST(Propagation, CompleteBasisReproducesExact) {
  // M = dim for N = 3: the span is the whole space while the overlap stays invertible.
  const int N = 3;
  const DoubleWell dw{1.0, 2.0, N};
  const Label zp = L1({0.3, 0.0});
  const std::vector<Label> labels{zp, L1({-0.8, 0.3}), L1({1.5, -0.6}), L1({0.1, 1.1})};
  BasisEnsemble ens(dw, Scheme::Unitary, labels);
  initialize_amplitudes(ens, zp);
  const SpectralPropagator exact(build_h_doublewell(dw), FockBasis::spin(N));
  const auto psi0 = fock_coefficients(ens.fam, zp);
  double worst_f = 0.0, worst_n = 0.0;
  propagate(ens, detail::uniform_grid(3.0, 13), {1e-11}, [&](const BasisEnsemble& e) {
    worst_f = std::max(worst_f, 1.0 - fidelity(reconstruct_fock(e), exact.evolve(psi0, e.time)));
    worst_n = std::max(worst_n, std::abs(ensemble_norm(e) - 1.0));
  });
  EXPECT_LT(worst_f, 1e-8);
  EXPECT_LT(worst_n, 1e-8);
}

TEST(Propagation, UnitaryNormDrift) {
  const HamiltonianModel m = TripleWell{-1.0, -1.0, 100};
  const Label zp = presets::triplewell_center();
  BasisEnsemble ens(m, Scheme::Unitary, cloud(zp, 10, 0.08, 6));
  initialize_amplitudes(ens, zp);
  double worst = 0.0;
  propagate(ens, detail::uniform_grid(2.0, 5), {1e-10}, [&](const BasisEnsemble& e) {
    worst = std::max(worst, std::abs(ensemble_norm(e) - 1.0));
    const double fock_norm = reconstruct_fock_raw(e).norm();
    EXPECT_NEAR(fock_norm * fock_norm, ensemble_norm(e), 1e-9);
  });
  EXPECT_LT(worst, 1e-6);
}

TEST(Propagation, SymmetricLineHasNoB3) {
  const int N = 100;
  const HamiltonianModel m = TripleWell{-1.0, -1.0, N};
  std::vector<Label> labels;
  for (Complex z : {Complex{0.29, 0.0}, Complex{0.2, 0.1}, Complex{0.4, -0.1}, Complex{0.3, 0.15}})
    labels.push_back(L2(z, z));
  BasisEnsemble ens(m, Scheme::Unitary, labels);
  initialize_amplitudes(ens, labels[0]);
  propagate(ens, detail::uniform_grid(3.0, 7), {1e-9}, [&](const BasisEnsemble& e) {
    for (const auto& z : e.labels) EXPECT_LT(std::abs(z[0] - z[1]), 1e-12);
    EXPECT_LT(std::abs(observable_continued(e, b3_occupation_kernel(N)).value), 1e-10);
  });
}

TEST(Propagation, StepHelpersCheckScheme) {
  BasisEnsemble u(DoubleWell{1.0, 1.0, 4}, Scheme::Unitary, {L1(0.1)});
  initialize_amplitudes(u, L1(0.1));
  EXPECT_THROW(step_nonunitary(u, 0.1), InvalidArgument);
  const auto v = step_unitary(u, 0.25);
  EXPECT_DOUBLE_EQ(v.time, 0.25);
  EXPECT_THROW(BasisEnsemble(DoubleWell{1.0, 1.0, 4}, Scheme::Classical, {L1(0.1), L1(0.2)}), InvalidArgument);
  EXPECT_THROW(BasisEnsemble(DoubleWell{1.0, 1.0, 4}, Scheme::NonUnitary, {L1(0.1)}), DimensionMismatch);
}

TEST(Observables, EnergyMatchesFockExpectation) {
  const int N = 12;
  const TripleWell tw{0.7, -0.4, N};
  BasisEnsemble ens(tw, Scheme::Unitary, cloud(L2(0.3, -0.2), 6, 0.4, 7));
  initialize_amplitudes(ens, L2({0.25, 0.05}, -0.15));
  const auto psi = reconstruct_fock(ens);
  const RMatrix h = build_h_triplewell(tw);
  const double want = psi.amps.dot(h * psi.amps).real();
  const auto got = observable_continued(ens, energy_kernel(tw));
  EXPECT_NEAR(got.value, want, 1e-9 * std::abs(want));
  EXPECT_LT(got.imag_residue, 1e-9);
}
