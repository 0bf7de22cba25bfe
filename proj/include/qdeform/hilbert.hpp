#pragma once

// q-scalar product, q-adjoint diagnostics, observables and eigen-expansions.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "qdeform/paired_state.hpp"
#include "qdeform/spectral.hpp"

namespace qdeform {

struct InnerProductResult {
  cplx value{};
  Member quadrature_branch = Member::q;
  /// Share of sum |integrand| w carried by the lattice edge rows.
  double boundary_weight_fraction = 0.0;
};

namespace detail {

inline void require_pair_lattice(const QPairedState& a, const QPairedState& b) {
  if (!a.lattice().same_points(b.lattice())) {
    throw LatticeMismatch("q-scalar product of states on different lattices");
  }
}

/// sum_i w_i conj(bra_i) ket_i with the edge-row share of |terms|.
inline InnerProductResult weighted_sum(std::span<const cplx> bra, std::span<const cplx> ket,
                                       const GeometricLattice& lat, Member branch) {
  const std::vector<double> w = lat.weights(branch);
  const std::vector<bool> edge = lat.edge_mask();
  InnerProductResult r;
  r.quadrature_branch = branch;
  double total = 0.0;
  double boundary = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const cplx term = w[i] * std::conj(bra[i]) * ket[i];
    r.value += term;
    total += std::abs(term);
    if (edge[i]) boundary += std::abs(term);
  }
  r.boundary_weight_fraction = total > 0.0 ? boundary / total : 0.0;
  return r;
}

}  // namespace detail

/// <phi, psi>_q = sum_n w_n conj(phi_{1/q}(x_n)) psi_q(x_n).
///
/// The Jackson weights w_n belong to `branch`; by default the branch of
/// psi's deformation.
inline InnerProductResult q_inner_product(const QPairedState& phi, const QPairedState& psi,
                                          std::optional<Member> branch = std::nullopt) {
  detail::require_pair_lattice(phi, psi);
  const Member b = branch.value_or(psi.natural_branch());
  return detail::weighted_sum(phi.psi_qinv.samples(), psi.psi_q.samples(), psi.lattice(), b);
}

struct NormReport {
  cplx value{};
  /// Real and nonnegative within 1e-10 (relative to max(1, |value|)).
  bool real_nonnegative = false;
};

inline NormReport q_norm_squared(const QPairedState& psi,
                                 std::optional<Member> branch = std::nullopt) {
  NormReport r;
  r.value = q_inner_product(psi, psi, branch).value;
  const double tol = 1e-10 * std::max(1.0, std::abs(r.value));
  r.real_nonnegative = std::abs(r.value.imag()) <= tol && r.value.real() >= -tol;
  return r;
}

/// <phi,phi><psi,psi> - |<phi,psi>|^2_q with |z|^2_q = <psi,phi><phi,psi>.
///
/// Complex in general; only meaningful as an inequality when both norms
/// are positive reals.
inline cplx q_schwarz_defect(const QPairedState& phi, const QPairedState& psi,
                             std::optional<Member> branch = std::nullopt) {
  const cplx pp = q_inner_product(phi, phi, branch).value;
  const cplx ss = q_inner_product(psi, psi, branch).value;
  const cplx ps = q_inner_product(phi, psi, branch).value;
  const cplx sp = q_inner_product(psi, phi, branch).value;
  return pp * ss - sp * ps;
}

/// <phi, A psi>_q - <A phi, psi>_q, where A acts on psi_q through A_q and on
/// phi_{1/q} through A_qinv.
inline cplx q_adjoint_defect(const OperatorMatrix& a_q, const OperatorMatrix& a_qinv,
                             const QPairedState& phi, const QPairedState& psi,
                             std::optional<Member> branch = std::nullopt) {
  detail::require_pair_lattice(phi, psi);
  if (a_q.dimension() != psi.psi_q.size() || a_qinv.dimension() != phi.psi_qinv.size()) {
    throw LatticeMismatch("operator dimension does not match the states");
  }
  const Member b = branch.value_or(psi.natural_branch());
  const LatticeFunction a_psi = a_q.apply(psi.psi_q);
  const LatticeFunction a_phi = a_qinv.apply(phi.psi_qinv);
  const cplx lhs = detail::weighted_sum(phi.psi_qinv.samples(), a_psi.samples(), psi.lattice(), b).value;
  const cplx rhs = detail::weighted_sum(a_phi.samples(), psi.psi_q.samples(), psi.lattice(), b).value;
  return lhs - rhs;
}

struct HermiticityReport {
  double defect = 0.0;
  /// Max over ordered pairs whose states both keep at least 90% of their
  /// norm integrand off the edge rows.
  double interior_defect = 0.0;
  std::size_t states_tested = 0;
  std::size_t interior_states = 0;
};

inline HermiticityReport hermiticity_report(const OperatorMatrix& a_q, const OperatorMatrix& a_qinv,
                                            std::span<const QPairedState> basis,
                                            std::optional<Member> branch = std::nullopt) {
  if (basis.size() < 2) throw InvalidArgument("hermiticity_report needs at least two states");
  std::vector<bool> interior(basis.size());
  HermiticityReport r;
  r.states_tested = basis.size();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    interior[i] = q_inner_product(basis[i], basis[i], branch).boundary_weight_fraction <= 0.1;
    if (interior[i]) ++r.interior_states;
  }
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double d = std::abs(q_adjoint_defect(a_q, a_qinv, basis[i], basis[j], branch));
      r.defect = std::max(r.defect, d);
      if (interior[i] && interior[j]) r.interior_defect = std::max(r.interior_defect, d);
    }
  }
  return r;
}

namespace detail {

inline void require_normalized(const QPairedState& psi, std::optional<Member> branch) {
  const cplx n = q_inner_product(psi, psi, branch).value;
  if (std::abs(n - 1.0) > 1e-8) {
    throw NormalizationError("state is not q-normalized: <psi,psi>_q = " + format_number(n.real()) +
                                 (n.imag() >= 0 ? "+" : "") + format_number(n.imag()) + "i",
                             std::abs(n));
  }
}

}  // namespace detail

/// <A>_q = sum_n w_n conj(psi_{1/q}) (A_q psi_q), for a q-normalized state.
inline cplx expectation_value(const OperatorMatrix& a_q, const QPairedState& psi,
                              std::optional<Member> branch = std::nullopt) {
  detail::require_normalized(psi, branch);
  const Member b = branch.value_or(psi.natural_branch());
  const LatticeFunction a_psi = a_q.apply(psi.psi_q);
  return detail::weighted_sum(psi.psi_qinv.samples(), a_psi.samples(), psi.lattice(), b).value;
}

/// <(A - <A>)^2>_q.
inline cplx fluctuation(const OperatorMatrix& a_q, const QPairedState& psi,
                        std::optional<Member> branch = std::nullopt) {
  const cplx mean = expectation_value(a_q, psi, branch);
  const Member b = branch.value_or(psi.natural_branch());
  const auto shifted = [&](const LatticeFunction& f) { return a_q.apply(f) - mean * f; };
  const LatticeFunction twice = shifted(shifted(psi.psi_q));
  return detail::weighted_sum(psi.psi_qinv.samples(), twice.samples(), psi.lattice(), b).value;
}

/// Expansion coefficients of a paired state in a biorthonormal basis:
/// c_q[n] = <phi_n, psi>_q expands psi_q in the q eigenvectors and
/// c_qinv[n] expands psi_{1/q} in the 1/q partners.
struct ExpansionCoefficients {
  std::vector<cplx> c_q;
  std::vector<cplx> c_qinv;

  /// |c_n|^2_q = conj(c_qinv[n]) c_q[n].
  cplx q_modulus_squared(std::size_t n) const { return std::conj(c_qinv.at(n)) * c_q.at(n); }

  cplx parseval_sum() const {
    cplx s{};
    for (std::size_t n = 0; n < c_q.size(); ++n) s += q_modulus_squared(n);
    return s;
  }
};

/// Condition estimates above this are treated as rank loss.
inline constexpr double kMaxBasisCondition = 1e12;

inline ExpansionCoefficients expansion_coefficients(const QPairedState& psi,
                                                    const SpectralDecomposition& basis) {
  if (!basis.lattice || !basis.lattice->same_points(psi.lattice())) {
    throw LatticeMismatch("state and basis live on different lattices");
  }
  if (!(basis.gram_condition <= kMaxBasisCondition)) {
    throw ExpansionError("eigenbasis is numerically rank deficient (condition estimate " +
                             format_number(basis.gram_condition) + ")",
                         basis.gram_condition);
  }
  const GeometricLattice& lat = psi.lattice();
  ExpansionCoefficients c;
  c.c_q.resize(basis.size());
  c.c_qinv.resize(basis.size());
  for (std::size_t n = 0; n < basis.size(); ++n) {
    c.c_q[n] = detail::weighted_sum(basis.eigenvectors_qinv[n].samples(), psi.psi_q.samples(), lat,
                                    basis.branch).value;
    c.c_qinv[n] = detail::weighted_sum(basis.eigenvectors_q[n].samples(), psi.psi_qinv.samples(),
                                       lat, basis.branch).value;
  }
  return c;
}

/// sum_n c_n phi_n, member-wise.
inline QPairedState reconstruct(const ExpansionCoefficients& c, const SpectralDecomposition& basis) {
  const std::size_t n = basis.lattice->size();
  std::vector<cplx> q(n), qi(n);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      q[i] += c.c_q[k] * basis.eigenvectors_q[k][i];
      qi[i] += c.c_qinv[k] * basis.eigenvectors_qinv[k][i];
    }
  }
  return QPairedState(basis.deformation, LatticeFunction(basis.lattice, std::move(q)),
                      LatticeFunction(basis.lattice, std::move(qi)));
}

/// max over both members of |psi - reconstruct(expand(psi))| / max |psi|.
inline double reconstruction_residual(const QPairedState& psi, const SpectralDecomposition& basis) {
  const QPairedState r = reconstruct(expansion_coefficients(psi, basis), basis);
  const double scale = std::max({psi.psi_q.max_abs(), psi.psi_qinv.max_abs(), 1e-300});
  return std::max((r.psi_q - psi.psi_q).max_abs(), (r.psi_qinv - psi.psi_qinv).max_abs()) / scale;
}

/// sum_n |c_n|^2_q E_n.
inline cplx spectral_expectation(const ExpansionCoefficients& c, const SpectralDecomposition& basis) {
  cplx s{};
  for (std::size_t n = 0; n < basis.size(); ++n) s += c.q_modulus_squared(n) * basis.eigenvalues_q[n];
  return s;
}

/// Max off-diagonal and diagonal deviation of the q-scalar-product Gram
/// matrix of the basis from the identity.
inline double gram_defect(const SpectralDecomposition& basis) {
  double worst = 0.0;
  for (std::size_t m = 0; m < basis.size(); ++m) {
    for (std::size_t n = 0; n < basis.size(); ++n) {
      const cplx g = q_inner_product(basis.state(m), basis.state(n), basis.branch).value;
      worst = std::max(worst, std::abs(g - (m == n ? 1.0 : 0.0)));
    }
  }
  return worst;
}

}  // namespace qdeform
