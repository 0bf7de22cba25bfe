#pragma once

// q-deformed Schroedinger layer: Hamiltonian pair, paired eigenproblem,
// plane-wave identities and spectral time evolution.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "qdeform/hilbert.hpp"
#include "qdeform/qcore.hpp"

namespace qdeform {

/// V(x) at a given deformation. Empty `fn` and no samples means free.
struct PotentialSpec {
  std::string name = "free";
  std::function<double(double, const DeformationParameter&)> fn;
  std::optional<LatticeFunction> samples;

  static PotentialSpec free() { return {}; }
  static PotentialSpec from_function(std::string name,
                                     std::function<double(double, const DeformationParameter&)> f) {
    PotentialSpec p;
    p.name = std::move(name);
    p.fn = std::move(f);
    return p;
  }
  /// A deformation-independent potential given by its lattice samples.
  static PotentialSpec from_samples(LatticeFunction v, std::string name = "lattice") {
    PotentialSpec p;
    p.name = std::move(name);
    p.samples = std::move(v);
    return p;
  }

  bool is_free() const noexcept { return !fn && !samples; }

  LatticeFunction evaluate(const LatticePtr& lattice, Member m) const {
    if (samples) {
      samples->require_same(LatticeFunction::zeros(lattice));
      return LatticeFunction(lattice, {samples->samples().begin(), samples->samples().end()});
    }
    if (!fn) return LatticeFunction::zeros(lattice);
    const DeformationParameter d = member_deformation(*lattice, m);
    return LatticeFunction::sample(lattice, [&](double x) { return fn(x, d); });
  }
};

struct SchrodingerProblem {
  LatticePtr lattice;
  PotentialSpec potential = PotentialSpec::free();
  double hbar = 1.0;
  double mass = 1.0;

  const DeformationParameter& deformation() const { return lattice->deformation(); }
  double kinetic_coefficient() const { return hbar * hbar / (2.0 * mass); }

  void validate() const {
    if (!lattice) throw InvalidArgument("Schroedinger problem needs a lattice");
    if (!(hbar > 0.0) || !(mass > 0.0)) throw InvalidArgument("hbar and mass must be positive");
  }
};

struct HamiltonianPair {
  OperatorMatrix h_q;
  OperatorMatrix h_qinv;
};

inline OperatorMatrix assemble_hamiltonian(const SchrodingerProblem& p, Member m) {
  p.validate();
  const OperatorMatrix d = jackson_derivative_matrix(p.lattice, m);
  const OperatorMatrix v =
      OperatorMatrix::diagonal(p.potential.evaluate(p.lattice, m), member_deformation(*p.lattice, m));
  return cplx(-p.kinetic_coefficient()) * (d * d) + v;
}

/// H = -(hbar^2/2m) D^2 + V at q and, on the same points, at 1/q.
inline HamiltonianPair assemble_hamiltonian(const SchrodingerProblem& p) {
  return {assemble_hamiltonian(p, Member::q), assemble_hamiltonian(p, Member::q_inverse)};
}

/// The undeformed discretization on the same points: the classical second
/// divided difference 2 f[x, qx, q^2 x] with the same zero padding. On every
/// row it equals 2/(1+q) times the Jackson second difference.
inline OperatorMatrix undeformed_hamiltonian(const SchrodingerProblem& p) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const double q = lat.q();
  const auto n = static_cast<Eigen::Index>(lat.size());
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x0 = lat.point(i);
    const double x1 = q * x0;
    const double x2 = q * x1;
    const double a = 1.0 / (x1 - x0);
    const double b = 1.0 / (x2 - x1);
    const double s = 2.0 / (x2 - x0);
    const auto r = static_cast<Eigen::Index>(i);
    k(r, r) += s * a;
    if (auto i1 = lat.shift(i, Member::q)) {
      k(r, static_cast<Eigen::Index>(*i1)) += -s * (a + b);
      if (auto i2 = lat.shift(*i1, Member::q)) k(r, static_cast<Eigen::Index>(*i2)) += s * b;
    }
  }
  const LatticeFunction v = p.potential.evaluate(p.lattice, Member::q);
  Eigen::MatrixXcd h = -p.kinetic_coefficient() * k;
  for (Eigen::Index r = 0; r < n; ++r) h(r, r) += v[static_cast<std::size_t>(r)];
  return OperatorMatrix(p.lattice, std::move(h), lat.deformation(),
                        lat.boundary_rows(Member::q, 2));
}

/// A nearest-neighbour (three-point, central) Hamiltonian that is
/// self-adjoint under the q Jackson weights: H = (hbar^2/2m) W^{-1} K + V
/// with K the symmetric stiffness matrix of each half-line chain and
/// Dirichlet ghosts one spacing past either end.
inline OperatorMatrix central_difference_hamiltonian(const SchrodingerProblem& p) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const auto n = static_cast<Eigen::Index>(lat.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (auto j = lat.shift(i, Member::q)) {
      const auto c = static_cast<Eigen::Index>(*j);
      const double g = 1.0 / std::abs(lat.point(*j) - lat.point(i));
      k(r, r) += g;
      k(c, c) += g;
      k(r, c) -= g;
      k(c, r) -= g;
    } else {
      k(r, r) += 1.0 / std::abs((lat.q() - 1.0) * lat.point(i));
    }
    if (!lat.shift(i, Member::q_inverse)) {
      k(r, r) += 1.0 / std::abs((1.0 / lat.q() - 1.0) * lat.point(i));
    }
  }
  const std::vector<double> w = lat.weights(Member::q);
  const LatticeFunction v = p.potential.evaluate(p.lattice, Member::q);
  Eigen::MatrixXcd h(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      h(r, c) = p.kinetic_coefficient() * k(r, c) / w[static_cast<std::size_t>(r)];
    }
    h(r, r) += v[static_cast<std::size_t>(r)];
  }
  return OperatorMatrix(p.lattice, std::move(h), lat.deformation());
}

/// All eigenvalues of an operator, sorted by real part then imaginary part.
inline std::vector<cplx> operator_spectrum(const OperatorMatrix& a) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a.entries(), false);
  if (es.info() != Eigen::Success) throw DegradedSpectrum("eigenvalue iteration did not converge", 0);
  std::vector<cplx> e(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(e.begin(), e.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return e;
}

struct StationaryOptions {
  double min_interior_mass = 0.9;
  double max_residual = 1e-8;
  double pairing_rel_tol = 1e-6;
  Member branch = Member::q;
};

namespace detail {

inline double edge_free_mass(const Eigen::VectorXcd& v, const std::vector<double>& w,
                             const std::vector<bool>& edge) {
  double total = 0.0;
  double inner = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = w[static_cast<std::size_t>(i)] * std::norm(v(i));
    total += m;
    if (!edge[static_cast<std::size_t>(i)]) inner += m;
  }
  return total > 0.0 ? inner / total : 0.0;
}

inline double relative_residual(const Eigen::MatrixXcd& h, const Eigen::VectorXcd& v, cplx e) {
  const double r = (h * v - e * v).cwiseAbs().maxCoeff();
  return r / (v.cwiseAbs().maxCoeff() * std::max(1.0, std::abs(e)));
}

}  // namespace detail

/// Eigenpairs of H_q with biorthogonal 1/q partners.
///
/// H_q is diagonalized with a general complex eigensolver. The 1/q member
/// of level n is u_n = W^{-1} (row n of V^{-1})^dagger, which makes the
/// q-scalar-product Gram matrix the identity. The literal H_{1/q} is
/// diagonalized as well; its eigenvalues are matched to the retained ones
/// by proximity and reported, and partner_residual measures how far u_n is
/// from being an eigenvector of the literal H_{1/q}.
///
/// Levels are kept when their interior mass and relative residual pass
/// `opts`, sorted by real part; `levels` > 0 keeps the lowest `levels`.
inline SpectralDecomposition solve_stationary(const SchrodingerProblem& p, std::size_t levels,
                                              const StationaryOptions& opts = {}) {
  const HamiltonianPair hp = assemble_hamiltonian(p);
  const Eigen::MatrixXcd& h = hp.h_q.entries();
  const GeometricLattice& lat = *p.lattice;
  const std::size_t n = lat.size();
  if (levels > n) throw InvalidArgument("more levels requested than lattice points");

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, true);
  if (es.info() != Eigen::Success) throw DegradedSpectrum("eigensolver did not converge", 0);
  Eigen::VectorXcd e = es.eigenvalues();
  Eigen::MatrixXcd v = es.eigenvectors();

  // Fix scale and phase: largest component equal to 1.
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index imax = 0;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    const cplx pivot = v(imax, c);
    if (pivot != cplx{}) v.col(c) /= pivot;
  }

  SpectralDecomposition out;
  out.lattice = p.lattice;
  out.deformation = lat.deformation();
  out.branch = opts.branch;
  out.total = n;

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
  const Eigen::MatrixXcd vinv = lu.inverse();
  const auto one_norm = [](const Eigen::MatrixXcd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
  out.gram_condition = one_norm(v) * one_norm(vinv);
  if (!std::isfinite(out.gram_condition)) out.gram_condition = INFINITY;

  const std::vector<double> w = lat.weights(opts.branch);
  const std::vector<bool> edge = lat.edge_mask();
  Eigen::MatrixXcd u = vinv.adjoint();
  for (Eigen::Index i = 0; i < u.rows(); ++i) u.row(i) /= w[static_cast<std::size_t>(i)];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const cplx ea = e(static_cast<Eigen::Index>(a));
    const cplx eb = e(static_cast<Eigen::Index>(b));
    return ea.real() != eb.real() ? ea.real() < eb.real() : ea.imag() < eb.imag();
  });

  out.literal_qinv_eigenvalues = operator_spectrum(hp.h_qinv);
  double radius = 0.0;
  for (const cplx& z : out.literal_qinv_eigenvalues) radius = std::max(radius, std::abs(z));
  out.proximity.tolerance = opts.pairing_rel_tol * radius;

  const Eigen::MatrixXcd& hinv = hp.h_qinv.entries();
  for (std::size_t c : order) {
    const auto col = static_cast<Eigen::Index>(c);
    const cplx ec = e(col);
    const Eigen::VectorXcd vc = v.col(col);
    const double res = detail::relative_residual(h, vc, ec);
    const double mass = detail::edge_free_mass(vc, w, edge);
    if (!(std::isfinite(res) && res <= opts.max_residual && mass >= opts.min_interior_mass)) {
      ++out.dropped;
      continue;
    }
    if (levels > 0 && out.size() == levels) continue;
    const Eigen::VectorXcd uc = u.col(col);
    out.eigenvalues_q.push_back(ec);
    out.eigenvalues_qinv.push_back(std::conj(ec));
    out.eigenvectors_q.push_back(LatticeFunction(p.lattice, {vc.data(), vc.data() + vc.size()}));
    out.eigenvectors_qinv.push_back(LatticeFunction(p.lattice, {uc.data(), uc.data() + uc.size()}));
    out.pairing.push_back(c);
    out.residuals.push_back(res);
    out.interior_mass.push_back(mass);
    out.partner_residual.push_back(detail::relative_residual(hinv, uc, std::conj(ec)));

    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t k = 0; k < out.literal_qinv_eigenvalues.size(); ++k) {
      const double d = std::abs(out.literal_qinv_eigenvalues[k] - ec);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out.proximity.nearest.push_back(best);
    out.proximity.distance.push_back(best_d);
    if (best_d <= out.proximity.tolerance) {
      ++out.proximity.matched;
    } else {
      ++out.proximity.unmatched;
    }
  }

  const std::size_t retained = out.size();
  if (retained < levels) {
    throw DegradedSpectrum("only " + std::to_string(retained) + " of " + std::to_string(levels) +
                               " requested levels survived filtering (" +
                               std::to_string(out.dropped) + " eigenpairs dropped)",
                           retained);
  }
  if (out.dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(out.dropped) + " of " + std::to_string(n) +
                           " eigenpairs (interior mass < " + format_number(opts.min_interior_mass) +
                           " or residual > " + format_number(opts.max_residual) + ")");
  }
  if (out.proximity.unmatched > 0) {
    out.warnings.push_back(std::to_string(out.proximity.unmatched) + " of " +
                           std::to_string(retained) +
                           " retained levels have no literal H_{1/q} eigenvalue within the pairing "
                           "tolerance");
  }
  return out;
}

namespace detail {

inline void require_free(const SchrodingerProblem& p) {
  p.validate();
  if (!p.potential.is_free()) throw InvalidArgument("plane-wave checks need a free problem");
}

inline std::vector<bool> row_mask(std::size_t n, const std::vector<std::size_t>& rows) {
  std::vector<bool> m(n, false);
  for (std::size_t r : rows) m[r] = true;
  return m;
}

}  // namespace detail

/// max_interior |D_q^2 phi + k^2 phi| / max |phi| for phi = E_q(ikx).
inline double free_particle_residual(double k, const SchrodingerProblem& p) {
  detail::require_free(p);
  const DeformationParameter& d = p.deformation();
  const LatticeFunction phi =
      LatticeFunction::sample(p.lattice, [&](double x) { return q_plane_wave(k, x, d); });
  const OperatorMatrix dm = jackson_derivative_matrix(p.lattice);
  const OperatorMatrix d2 = dm * dm;
  const LatticeFunction r = d2.apply(phi);
  const std::vector<bool> skip = detail::row_mask(phi.size(), d2.boundary_rows());
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!skip[i]) worst = std::max(worst, std::abs(r[i] + k * k * phi[i]));
  }
  return worst / std::max(phi.max_abs(), 1e-300);
}

/// max_interior |phi*_{1/q} (H_q phi_q) - (H_{1/q} phi*_{1/q}) phi_q| for the
/// plane-wave pair phi_q = E_q(ikx), phi_{1/q} = E_{1/q}(ikx).
inline double eq54_pointwise_defect(double k, const SchrodingerProblem& p) {
  detail::require_free(p);
  const DeformationParameter& d = p.deformation();
  const DeformationParameter di = d.inverse();
  const LatticeFunction phi_q =
      LatticeFunction::sample(p.lattice, [&](double x) { return q_plane_wave(k, x, d); });
  const LatticeFunction phi_qinv_star =
      LatticeFunction::sample(p.lattice, [&](double x) { return q_plane_wave(-k, x, di); });
  const HamiltonianPair hp = assemble_hamiltonian(p);
  const LatticeFunction lhs = phi_qinv_star * hp.h_q.apply(phi_q);
  const LatticeFunction rhs = hp.h_qinv.apply(phi_qinv_star) * phi_q;
  const std::vector<bool> skip = p.lattice->edge_mask();
  double worst = 0.0;
  for (std::size_t i = 0; i < phi_q.size(); ++i) {
    if (!skip[i]) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  }
  return worst;
}

inline constexpr std::size_t kMaxPlaneWaveCount = 256;

/// A lattice on which E_q(ikx) and E_{1/q}(ikx) are both evaluable: points
/// from about x_min up to 0.6 R/|k| (capped at x_cap), R the radius of
/// convergence of whichever of E_q, E_{1/q} has a finite one. Near q = 1 the
/// count is capped at kMaxPlaneWaveCount and the lower end rises above x_min.
inline LatticePtr plane_wave_lattice(const DeformationParameter& q, double k, double x_min = 0.05,
                                     double x_cap = 6.0, Branch branch = Branch::positive) {
  const double small = std::min(q.q(), q.inverse_q());
  const double radius = 1.0 / (1.0 - small);
  const double x_max = k == 0.0 ? x_cap : std::min(x_cap, 0.6 * radius / std::abs(k));
  if (!(x_max > x_min)) throw InvalidArgument("plane-wave lattice: empty domain");
  const auto count = static_cast<std::size_t>(std::ceil(std::log(x_max / x_min) / std::abs(std::log(q.q())))) + 1;
  const double lambda0 = q.q() < 1.0 ? x_max : x_max * q.q();
  return GeometricLattice::build(lambda0, q, std::clamp<std::size_t>(count, 4, kMaxPlaneWaveCount), branch);
}

/// exp(-i E t / hbar).
inline cplx time_factor(cplx e, double t, double hbar = 1.0) {
  return std::exp(cplx(0.0, -1.0) * e * t / hbar);
}

struct EvolvedState {
  std::vector<double> times;
  std::vector<QPairedState> states;
  /// <psi(t), psi(t)>_q; complex in general.
  std::vector<cplx> norm_trace;
};

/// Spectral propagation psi(t) = sum_n c_n exp(-i E_n t/hbar) phi_n, applied
/// to the q member with the q eigenvectors and to the 1/q member with the
/// partners, both with the same phase.
inline EvolvedState evolve_spectral(const QPairedState& psi0, const SpectralDecomposition& basis,
                                    const std::vector<double>& times, double hbar = 1.0,
                                    double max_out_of_span = 1e-6) {
  const double out_of_span = reconstruction_residual(psi0, basis);
  if (!(out_of_span <= max_out_of_span)) {
    throw ExpansionError("initial state is outside the span of the retained levels (residual " +
                             format_number(out_of_span) + ")",
                         out_of_span);
  }
  const ExpansionCoefficients c0 = expansion_coefficients(psi0, basis);
  EvolvedState out;
  out.times = times;
  for (double t : times) {
    ExpansionCoefficients ct = c0;
    for (std::size_t n = 0; n < basis.size(); ++n) {
      const cplx f = time_factor(basis.eigenvalues_q[n], t, hbar);
      ct.c_q[n] *= f;
      ct.c_qinv[n] *= f;
    }
    QPairedState s = reconstruct(ct, basis);
    s.label = psi0.label;
    out.norm_trace.push_back(q_inner_product(s, s, basis.branch).value);
    out.states.push_back(std::move(s));
  }
  return out;
}

/// rho_q(x) = psi*_{1/q}(x) psi_q(x).
inline LatticeFunction probability_density(const QPairedState& psi) {
  return psi.psi_qinv.conj() * psi.psi_q;
}

}  // namespace qdeform
