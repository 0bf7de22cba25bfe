#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qdeform/hilbert.hpp"
#include "qdeform/schrodinger.hpp"

using namespace qdeform;

namespace {

SchrodingerProblem free_problem(double lambda0, double q, std::size_t n) {
  SchrodingerProblem p;
  p.lattice = GeometricLattice::build(lambda0, DeformationParameter(q), n);
  return p;
}

}  // namespace

// D_q^2 is (1+q)/2 times the classical second divided difference
// 2 f[x, qx, q^2 x] on every row, padded rows included.
TEST(Hamiltonian, JacksonSecondDifferenceAgainstDividedDifference) {
  for (double q : {0.5, 0.9, 1.1, 2.0}) {
    const auto p = free_problem(q < 1 ? 2.0 : 2.0 * q, q, 14);
    const Eigen::MatrixXcd hq = assemble_hamiltonian(p, Member::q).entries();
    const Eigen::MatrixXcd hc = undeformed_hamiltonian(p).entries();
    const double scale = hq.cwiseAbs().maxCoeff();
    EXPECT_LE((hq - 0.5 * (1.0 + q) * hc).cwiseAbs().maxCoeff(), 1e-13 * scale) << "q=" << q;
  }
}

TEST(Hamiltonian, PotentialOnTheDiagonal) {
  auto p = free_problem(2.0, 0.7, 10);
  const Eigen::MatrixXcd h0 = assemble_hamiltonian(p, Member::q).entries();
  p.potential = PotentialSpec::from_function("linear", [](double x, const DeformationParameter&) { return 3 * x; });
  const Eigen::MatrixXcd h1 = assemble_hamiltonian(p, Member::q).entries();
  for (std::size_t i = 0; i < 10; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_NEAR((h1 - h0)(r, r).real(), 3 * p.lattice->point(i), 1e-12);
  }
  EXPECT_EQ((h1 - h0).cwiseAbs().sum(), (h1 - h0).diagonal().cwiseAbs().sum());
}

TEST(Hamiltonian, SampledPotentialMustShareTheLattice) {
  auto p = free_problem(2.0, 0.7, 10);
  const auto other = GeometricLattice::build(2.0, DeformationParameter(0.7), 11);
  p.potential = PotentialSpec::from_samples(LatticeFunction::zeros(other));
  EXPECT_THROW(assemble_hamiltonian(p, Member::q), LatticeMismatch);
}

// The forward Jackson stencil makes H upper triangular: its spectrum is the
// diagonal.
TEST(Hamiltonian, SpectrumIsTheDiagonal) {
  const auto p = free_problem(3.0, 0.8, 16);
  const OperatorMatrix h = assemble_hamiltonian(p, Member::q);
  std::vector<double> diag;
  for (Eigen::Index i = 0; i < h.entries().rows(); ++i) diag.push_back(h.entries()(i, i).real());
  std::sort(diag.begin(), diag.end());
  const auto eig = operator_spectrum(h);
  ASSERT_EQ(eig.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    EXPECT_NEAR(eig[i].real(), diag[i], 1e-9 * std::max(1.0, std::abs(diag[i])));
  }
}

TEST(Hamiltonian, CentralDifferenceIsSelfAdjointUnderWeights) {
  for (double q : {0.9, 1.2}) {
    const auto p = free_problem(2.0, q, 20);
    const Eigen::MatrixXcd h = central_difference_hamiltonian(p).entries();
    const auto w = p.lattice->weights(Member::q);
    Eigen::MatrixXcd wh = h;
    for (Eigen::Index r = 0; r < h.rows(); ++r) wh.row(r) *= w[static_cast<std::size_t>(r)];
    EXPECT_LE((wh - wh.adjoint()).cwiseAbs().maxCoeff(), 1e-12 * wh.cwiseAbs().maxCoeff());
  }
}

TEST(FreeParticle, PlaneWaveResidualAndPairIdentity) {
  for (double q : {0.9, 1.1, 1.25}) {
    for (double k : {0.5, 1.0, 2.0}) {
      SchrodingerProblem p;
      p.lattice = plane_wave_lattice(DeformationParameter(q), k);
      EXPECT_LE(free_particle_residual(k, p), 1e-8) << "q=" << q << " k=" << k;
      EXPECT_LE(eq54_pointwise_defect(k, p), 1e-8) << "q=" << q << " k=" << k;
    }
  }
}

TEST(FreeParticle, NeedsAFreeProblem) {
  auto p = free_problem(2.0, 0.9, 10);
  p.potential = PotentialSpec::from_function("v", [](double, const DeformationParameter&) { return 1.0; });
  EXPECT_THROW(free_particle_residual(1.0, p), InvalidArgument);
  EXPECT_THROW(eq54_pointwise_defect(1.0, p), InvalidArgument);
}

TEST(FreeParticle, PlaneWaveLatticeStaysInsideBothRadii) {
  for (double q : {0.5, 0.9, 1.1, 2.0}) {
    const DeformationParameter d(q);
    const double r = 1.0 / (1.0 - std::min(q, 1.0 / q));
    for (double k : {0.5, 2.0, 8.0}) {
      const auto lat = plane_wave_lattice(d, k);
      double top = 0.0;
      for (std::size_t i = 0; i < lat->size(); ++i) top = std::max(top, lat->point(i));
      EXPECT_LE(top * k, 0.6 * r * (1 + 1e-12));
      EXPECT_LE(top, 6.0 * (1 + 1e-12));
    }
  }
  EXPECT_THROW(plane_wave_lattice(DeformationParameter(0.5), 100.0), InvalidArgument);
}

TEST(FreeParticle, PlaneWaveDensityIsConstant) {
  const DeformationParameter d(1.25);
  const auto lat = plane_wave_lattice(d, 1.0);
  const auto pw = QPairedState::sample(lat, [](double x, const DeformationParameter& p) {
    return q_plane_wave(1.0, x, p);
  });
  const LatticeFunction rho = probability_density(pw);
  for (std::size_t i = 0; i < rho.size(); ++i) EXPECT_NEAR(std::abs(rho[i] - 1.0), 0.0, 1e-12);
}

TEST(TimeFactor, UnitModulusPhase) {
  EXPECT_EQ(time_factor(3.0, 0.0), cplx(1.0));
  EXPECT_NEAR(std::abs(time_factor(2.5, 7.0)), 1.0, 1e-15);
  EXPECT_LT(std::abs(time_factor(1.0, M_PI) + 1.0), 1e-15);
  EXPECT_LT(std::abs(time_factor(1.0, M_PI, 2.0) - cplx(0.0, -1.0)), 1e-15);
  EXPECT_NEAR(std::abs(time_factor(cplx(0.0, -1.0), 1.0)), std::exp(-1.0), 1e-15);
}

TEST(Stationary, BiorthonormalPairsOnWellConditionedLattices) {
  for (auto [q, l0, n] : {std::tuple{0.5, 2.0, std::size_t{12}}, std::tuple{2.0, 4.0, std::size_t{12}}}) {
    const auto p = free_problem(l0, q, n);
    const SpectralDecomposition s = solve_stationary(p, 0);
    ASSERT_GE(s.size(), 2u);
    EXPECT_EQ(s.total, n);
    EXPECT_EQ(s.size() + s.dropped, s.total);
    EXPECT_LE(gram_defect(s), 1e-8);
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_LE(s.residuals[i], 1e-8);
      EXPECT_GE(s.interior_mass[i], 0.9);
      EXPECT_EQ(s.eigenvalues_qinv[i], std::conj(s.eigenvalues_q[i]));
      if (i > 0) EXPECT_LE(s.eigenvalues_q[i - 1].real(), s.eigenvalues_q[i].real());
    }
  }
}

// The literal H_{1/q} maps the biorthogonal partner u to q^2 conj(E) u, so
// its residual against conj(E) is |1 - q^2| (relative to |E| >= 1).
TEST(Stationary, LiteralInversePartnerCarriesQSquared) {
  for (double q : {0.5, 2.0}) {
    const auto p = free_problem(q < 1 ? 2.0 : 4.0, q, 12);
    const SpectralDecomposition s = solve_stationary(p, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::abs(s.eigenvalues_q[i]) < 1.0) continue;
      EXPECT_NEAR(s.partner_residual[i], std::abs(1.0 - q * q), 1e-8) << "q=" << q;
    }
  }
}

TEST(Stationary, TooFewRetainedLevelsThrows) {
  const auto p = free_problem(2.0, 0.5, 12);
  EXPECT_THROW(solve_stationary(p, 12), DegradedSpectrum);
}

TEST(Stationary, DroppedPairsAreReported) {
  const auto p = free_problem(2.0, 0.5, 12);
  const SpectralDecomposition s = solve_stationary(p, 0);
  ASSERT_GT(s.dropped, 0u);
  const bool mentioned = std::any_of(s.warnings.begin(), s.warnings.end(), [](const std::string& w) {
    return w.find("dropped") != std::string::npos;
  });
  EXPECT_TRUE(mentioned);
}

TEST(Evolution, EigenstateNormIsConstant) {
  const auto p = free_problem(2.0, 0.5, 12);
  const SpectralDecomposition s = solve_stationary(p, 0);
  const std::vector<double> times{0.0, 0.5, 1.0, 3.0, 10.0};
  for (std::size_t n = 0; n < s.size(); ++n) {
    const EvolvedState ev = evolve_spectral(s.state(n), s, times);
    ASSERT_EQ(ev.norm_trace.size(), times.size());
    for (const cplx& v : ev.norm_trace) EXPECT_LE(std::abs(v - ev.norm_trace[0]), 1e-9);
  }
}

TEST(Evolution, TimeZeroReproducesTheState) {
  const auto p = free_problem(2.0, 0.5, 12);
  const SpectralDecomposition s = solve_stationary(p, 0);
  const QPairedState psi = cplx(0.7) * s.state(0) + cplx(0.0, 0.2) * s.state(1);
  const EvolvedState ev = evolve_spectral(psi, s, {0.0});
  EXPECT_LE((ev.states[0].psi_q - psi.psi_q).max_abs(), 1e-10);
  EXPECT_LE((ev.states[0].psi_qinv - psi.psi_qinv).max_abs(), 1e-10);
}

TEST(Evolution, SingleModePhaseMatchesTimeFactor) {
  const auto p = free_problem(2.0, 0.5, 12);
  const SpectralDecomposition s = solve_stationary(p, 0);
  const EvolvedState ev = evolve_spectral(s.state(1), s, {0.3});
  const cplx f = time_factor(s.eigenvalues_q[1], 0.3);
  EXPECT_LE((ev.states[0].psi_q - f * s.eigenvectors_q[1]).max_abs(), 1e-9 * s.eigenvectors_q[1].max_abs());
}

TEST(Evolution, OutOfSpanStateThrows) {
  const auto p = free_problem(2.0, 0.5, 12);
  const SpectralDecomposition s = solve_stationary(p, 0);
  const auto flat = QPairedState::symmetric(LatticeFunction::sample(p.lattice, [](double) { return 1.0; }));
  EXPECT_THROW(evolve_spectral(flat, s, {0.0}), ExpansionError);
}

TEST(ClassicalLimit, EigenvaluesApproachTheUndeformedOnes) {
  for (double q : {1.0 - 1e-4, 1.0 + 1e-4}) {
    auto p = free_problem(q < 1 ? 2.0 : 2.0 * q, q, 200);
    p.potential = PotentialSpec::from_function("oscillator", [](double x, const DeformationParameter&) {
      return 0.5 * x * x;
    });
    const auto eq = operator_spectrum(assemble_hamiltonian(p, Member::q));
    const auto ec = operator_spectrum(undeformed_hamiltonian(p));
    for (std::size_t n = 0; n < 3; ++n) EXPECT_LE(std::abs(eq[n] - ec[n]) / std::abs(ec[n]), 1e-2);
  }
}
