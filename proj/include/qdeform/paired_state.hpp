#pragma once

#include <string>
#include <utility>

#include "qdeform/lattice.hpp"

namespace qdeform {

/// A state known at both deformations q and 1/q, sampled on one lattice.
///
/// `deformation` is the deformation the pair is viewed at; psi_q holds the
/// member at that deformation and psi_qinv the member at its inverse.
struct QPairedState {
  DeformationParameter deformation;
  LatticeFunction psi_q;
  LatticeFunction psi_qinv;
  std::string label;

  QPairedState(LatticeFunction q_member, LatticeFunction qinv_member, std::string name = {})
      : deformation(q_member.lattice().deformation()), psi_q(std::move(q_member)),
        psi_qinv(std::move(qinv_member)), label(std::move(name)) {
    psi_q.require_same(psi_qinv);
  }

  QPairedState(DeformationParameter d, LatticeFunction q_member, LatticeFunction qinv_member,
               std::string name = {})
      : deformation(d), psi_q(std::move(q_member)), psi_qinv(std::move(qinv_member)),
        label(std::move(name)) {
    psi_q.require_same(psi_qinv);
  }

  /// A pair whose two members coincide (real symmetric states, q -> 1 data).
  static QPairedState symmetric(const LatticeFunction& f, std::string name = {}) {
    return QPairedState(f, f, std::move(name));
  }

  /// Samples f(x, p) at p = q and p = 1/q.
  template <class F>
  static QPairedState sample(const LatticePtr& lattice, F&& f, std::string name = {}) {
    const DeformationParameter d = lattice->deformation();
    const DeformationParameter di = d.inverse();
    return QPairedState(d, LatticeFunction::sample(lattice, [&](double x) { return f(x, d); }),
                        LatticeFunction::sample(lattice, [&](double x) { return f(x, di); }),
                        std::move(name));
  }

  const GeometricLattice& lattice() const noexcept { return psi_q.lattice(); }
  const LatticePtr& lattice_ptr() const noexcept { return psi_q.lattice_ptr(); }

  /// The same physical state viewed from deformation 1/q.
  QPairedState at_inverse() const { return QPairedState(deformation.inverse(), psi_qinv, psi_q, label); }

  /// Jackson quadrature branch matching this pair's deformation.
  Member natural_branch() const {
    return deformation == lattice().deformation() ? Member::q : Member::q_inverse;
  }

  friend QPairedState operator+(const QPairedState& a, const QPairedState& b) {
    return QPairedState(a.deformation, a.psi_q + b.psi_q, a.psi_qinv + b.psi_qinv);
  }
  friend QPairedState operator-(const QPairedState& a, const QPairedState& b) {
    return QPairedState(a.deformation, a.psi_q - b.psi_q, a.psi_qinv - b.psi_qinv);
  }
  /// Scales both members by c. A scalar carries no deformation of its own,
  /// so the same c multiplies the q and the 1/q member.
  friend QPairedState operator*(cplx c, const QPairedState& a) {
    return QPairedState(a.deformation, c * a.psi_q, c * a.psi_qinv, a.label);
  }
};

/// psi^dagger = psi*_{1/q}: members swapped and complex-conjugated.
inline QPairedState q_conjugate(const QPairedState& s) {
  return QPairedState(s.deformation, s.psi_qinv.conj(), s.psi_q.conj(), s.label);
}

}  // namespace qdeform
