#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdeform/paired_state.hpp"

namespace qdeform {

/// How the literal 1/q Hamiltonian's spectrum lines up with the retained
/// q eigenvalues when matched by proximity.
struct ProximityPairing {
  double tolerance = 0.0;  ///< absolute, 1e-6 times the spectral radius
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  /// Per retained level: index into literal_qinv_eigenvalues of the nearest
  /// eigenvalue, and the distance to it.
  std::vector<std::size_t> nearest;
  std::vector<double> distance;
};

/// Retained eigenpairs of H_q together with their 1/q partners.
///
/// Level n is the paired state {eigenvectors_q[n], eigenvectors_qinv[n]}.
/// The 1/q member is the biorthogonal partner of the q eigenvector under
/// the Jackson weights, so the q-scalar product of levels m and n is
/// delta_mn up to rounding.
struct SpectralDecomposition {
  LatticePtr lattice;
  DeformationParameter deformation{2.0};
  Member branch = Member::q;  ///< quadrature the basis is biorthonormal under

  std::vector<cplx> eigenvalues_q;
  std::vector<LatticeFunction> eigenvectors_q;
  /// Eigenvalue of the 1/q member under the weighted adjoint of H_q,
  /// conj(E_n).
  std::vector<cplx> eigenvalues_qinv;
  std::vector<LatticeFunction> eigenvectors_qinv;
  /// Retained level n -> column of the full eigen-decomposition.
  std::vector<std::size_t> pairing;

  double gram_condition = 1.0;  ///< 1-norm condition number of the eigenvector matrix
  std::vector<double> residuals;         ///< ||H v - E v||_inf / (||v||_inf max(1,|E|))
  std::vector<double> interior_mass;     ///< share of sum |v|^2 w off the edge rows
  std::vector<double> partner_residual;  ///< same quantity for the literal H_{1/q} and the 1/q member

  std::vector<cplx> literal_qinv_eigenvalues;
  ProximityPairing proximity;

  std::size_t total = 0;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return eigenvalues_q.size(); }

  QPairedState state(std::size_t n) const {
    return QPairedState(deformation, eigenvectors_q.at(n), eigenvectors_qinv.at(n),
                        "level " + std::to_string(n));
  }
};

}  // namespace qdeform
