#pragma once

// q-deformed Fokker-Planck layer and its map to the Schroedinger picture.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qdeform/lattice.hpp"
#include "qdeform/qcore.hpp"
#include "qdeform/schrodinger.hpp"

namespace qdeform {

/// How f(qx) in the stationary zero-flux equation is read.
///
/// literal_qx: F evaluated at q x. argument_scaling: the dilatation acts on
/// the x^2 argument of E_q(-alpha x^2), i.e. F evaluated at sqrt(q) x.
enum class DilatationConvention { literal_qx, argument_scaling };

inline std::string_view to_string(DilatationConvention c) {
  return c == DilatationConvention::literal_qx ? "literal_qx" : "argument_scaling";
}

/// Drift J1. Monomial: J1(x) = coefficient x^exponent. Operator-valued
/// (Brownian postulate): J1 = -gamma x (q T + 1) with T the dilatation.
struct DriftSpec {
  enum class Form { monomial, operator_valued };

  double gamma = 1.0;
  Form form = Form::monomial;
  double coefficient = -1.0;
  int exponent = 1;

  static DriftSpec monomial(double coefficient, int exponent, double gamma) {
    DriftSpec d;
    d.gamma = gamma;
    d.coefficient = coefficient;
    d.exponent = exponent;
    d.validate();
    return d;
  }
  /// J1 = -gamma x.
  static DriftSpec linear(double gamma) { return monomial(-gamma, 1, gamma); }
  static DriftSpec brownian(double gamma) {
    DriftSpec d;
    d.gamma = gamma;
    d.form = Form::operator_valued;
    d.validate();
    return d;
  }

  bool is_monomial() const noexcept { return form == Form::monomial; }

  void validate() const {
    if (!(gamma > 0.0)) throw InvalidArgument("drift gamma must be positive");
    if (exponent < 0) throw InvalidArgument("drift exponent must be a non-negative integer");
  }
};

struct DiffusionSpec {
  double J2 = 1.0;
  double alpha = 1.0;

  /// J2 = gamma/alpha.
  static DiffusionSpec from_brownian(double gamma, double alpha) {
    if (!(gamma > 0.0) || !(alpha > 0.0)) throw InvalidArgument("gamma and alpha must be positive");
    return {gamma / alpha, alpha};
  }
};

struct FPProblem {
  DriftSpec drift = DriftSpec::brownian(1.0);
  DiffusionSpec diffusion{};
  LatticePtr lattice;
  DilatationConvention convention = DilatationConvention::argument_scaling;

  const DeformationParameter& deformation() const { return lattice->deformation(); }

  void validate() const {
    if (!lattice) throw InvalidArgument("Fokker-Planck problem needs a lattice");
    drift.validate();
    if (!(diffusion.J2 > 0.0)) throw InvalidArgument("J2 must be positive");
    if (!(diffusion.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
  }
};

/// Phi(x) = -(1/J2) int_0^x J1(y) d_qy, for monomial drift.
inline double phi_potential(const DriftSpec& drift, const DiffusionSpec& diffusion, double x,
                            const DeformationParameter& q) {
  if (!drift.is_monomial()) {
    throw UnsupportedDrift("Phi_q is only defined for a monomial drift coefficient");
  }
  if (x == 0.0) return 0.0;
  const int p = drift.exponent;
  if (q.classical()) {
    return -drift.coefficient * std::pow(x, p + 1) / ((p + 1) * diffusion.J2);
  }
  const cplx integral = jackson_integral_function([p](double y) { return std::pow(y, p); }, x, q.q());
  return -drift.coefficient * integral.real() / diffusion.J2;
}

namespace detail {

// -gamma x (q F(s x) + F(x)), with F(s x) supplied.
inline LatticeFunction operator_drift_applied(const LatticeFunction& f, const LatticeFunction& f_scaled,
                                              double gamma, double q) {
  const GeometricLattice& lat = f.lattice();
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = -gamma * lat.point(i) * (q * f_scaled[i] + f[i]);
  }
  return LatticeFunction(f.lattice_ptr(), std::move(out), f_scaled.padded_rows());
}

inline LatticeFunction monomial_drift_applied(const LatticeFunction& f, const DriftSpec& d) {
  const GeometricLattice& lat = f.lattice();
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = d.coefficient * std::pow(lat.point(i), d.exponent) * f[i];
  }
  return LatticeFunction(f.lattice_ptr(), std::move(out));
}

inline std::vector<std::size_t> merged(std::vector<std::size_t> a, const std::vector<std::size_t>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace detail

/// Probability flux -J1 F + J2 D_q F from lattice samples. The operator
/// drift is applied with the literal dilatation F(qx); argument scaling
/// needs F off the lattice and is only available through the callable
/// overload.
inline LatticeFunction fp_flux(const LatticeFunction& f, const FPProblem& p) {
  p.validate();
  const LatticeFunction df = jackson_derivative(f);
  LatticeFunction j1f = p.drift.is_monomial()
                            ? detail::monomial_drift_applied(f, p.drift)
                            : LatticeFunction::zeros(f.lattice_ptr());
  if (!p.drift.is_monomial()) {
    if (p.convention == DilatationConvention::argument_scaling) {
      throw UnsupportedDrift(
          "argument_scaling needs F at sqrt(q) x; pass F as a callable instead of lattice samples");
    }
    j1f = detail::operator_drift_applied(f, dilate(f), p.drift.gamma, p.deformation().q());
  }
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = -j1f[i] + p.diffusion.J2 * df[i];
  return LatticeFunction(f.lattice_ptr(), std::move(out),
                         detail::merged(df.padded_rows(), j1f.padded_rows()));
}

/// Flux of a callable density; every term is evaluated analytically, so no
/// row is padded.
inline LatticeFunction fp_flux(const std::function<cplx(double)>& f, const FPProblem& p) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const double q = lat.q();
  const double s = p.convention == DilatationConvention::argument_scaling ? std::sqrt(q) : q;
  std::vector<cplx> out(lat.size());
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = lat.point(i);
    const cplx fx = f(x);
    cplx j1f;
    if (p.drift.is_monomial()) {
      j1f = p.drift.coefficient * std::pow(x, p.drift.exponent) * fx;
    } else {
      j1f = -p.drift.gamma * x * (q * f(s * x) + fx);
    }
    out[i] = -j1f + p.diffusion.J2 * jackson_derivative_at(f, x, q);
  }
  return LatticeFunction(p.lattice, std::move(out));
}

/// D_q [-J1 + J2 D_q] F.
inline LatticeFunction fp_rhs(const LatticeFunction& f, const FPProblem& p) {
  const LatticeFunction flux = fp_flux(f, p);
  const LatticeFunction r = jackson_derivative(flux);
  return LatticeFunction(f.lattice_ptr(), {r.samples().begin(), r.samples().end()},
                         detail::merged(r.padded_rows(), flux.padded_rows()));
}

inline LatticeFunction fp_rhs(const std::function<cplx(double)>& f, const FPProblem& p) {
  return jackson_derivative(fp_flux(f, p));
}

struct StationaryDensity {
  LatticeFunction density;
  double normalization = 1.0;  ///< N_q
  std::vector<DomainFlag> domain_flags;
  std::vector<std::string> warnings;
};

/// N_q E_q(-alpha x^2) sampled on the lattice, N_q fixed so that the
/// Jackson integral over the whole lattice is 1.
inline StationaryDensity fp_stationary(const FPProblem& p, const SeriesOptions& opts = {}) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const DeformationParameter& d = lat.deformation();
  const double alpha = p.diffusion.alpha;
  std::vector<cplx> s(lat.size());
  std::vector<DomainFlag> flags(lat.size());
  std::size_t reciprocal = 0;
  std::size_t negative = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = lat.point(i);
    const SeriesEvaluation e = q_exp(-alpha * x * x, d, opts);
    s[i] = e.value;
    flags[i] = e.domain_flag;
    if (e.domain_flag == DomainFlag::via_reciprocal) ++reciprocal;
    if (e.value.real() < 0.0) ++negative;
  }
  StationaryDensity out{LatticeFunction(p.lattice, s), 1.0, std::move(flags), {}};
  const IntegralResult mass = jackson_integral(out.density, lat.lambda0());
  if (!(mass.value.real() > 0.0) || !std::isfinite(mass.value.real())) {
    throw NormalizationError("stationary density has non-positive lattice mass", mass.value.real());
  }
  out.normalization = 1.0 / mass.value.real();
  out.density = cplx(out.normalization) * out.density;
  if (reciprocal > 0) {
    out.warnings.push_back("E_q(-alpha x^2) evaluated via_reciprocal at " + std::to_string(reciprocal) +
                           " of " + std::to_string(lat.size()) + " points");
  }
  if (negative > 0) {
    out.warnings.push_back("stationary density is negative at " + std::to_string(negative) +
                           " points (real zeros of E_q for q > 1)");
  }
  return out;
}

/// The density whose lattice flux vanishes on every unpadded row, built by
/// the two-term recurrence of the zero-flux condition and normalized like
/// fp_stationary. The operator drift uses the literal dilatation.
inline LatticeFunction fp_stationary_lattice(const FPProblem& p) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const double q = lat.q();
  const double j2 = p.diffusion.J2;
  std::vector<cplx> s(lat.size());
  for (std::size_t h = 0; h < lat.halves(); ++h) {
    const std::size_t base = h * lat.count();
    s[base] = 1.0;
    for (std::size_t k = 0; k + 1 < lat.count(); ++k) {
      const double x = lat.point(base + k);
      const double h1 = (q - 1.0) * x;
      double ratio;
      if (p.drift.is_monomial()) {
        // -c x^p F_i + J2 (F_{i+1} - F_i)/h1 = 0
        ratio = 1.0 + p.drift.coefficient * std::pow(x, p.drift.exponent) * h1 / j2;
      } else {
        // gamma x (q F_{i+1} + F_i) + J2 (F_{i+1} - F_i)/h1 = 0
        const double g = p.drift.gamma * x * h1 / j2;
        ratio = (1.0 - g) / (1.0 + q * g);
      }
      s[base + k + 1] = s[base + k] * ratio;
    }
  }
  LatticeFunction f(p.lattice, std::move(s));
  const IntegralResult mass = jackson_integral(f, lat.lambda0());
  if (!(mass.value.real() > 0.0)) {
    throw NormalizationError("lattice stationary density has non-positive mass", mass.value.real());
  }
  return cplx(1.0 / mass.value.real()) * f;
}

/// max over non-edge rows of |D_q F + alpha x (q F(s x) + F(x))|, s = q
/// (literal_qx) or sqrt(q) (argument_scaling), everything evaluated from
/// the callable.
inline double stationary_residual(const std::function<cplx(double)>& f, const FPProblem& p,
                                  DilatationConvention convention) {
  p.validate();
  const GeometricLattice& lat = *p.lattice;
  const double q = lat.q();
  const double s = convention == DilatationConvention::argument_scaling ? std::sqrt(q) : q;
  const double alpha = p.diffusion.alpha;
  const std::vector<bool> edge = lat.edge_mask();
  double worst = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (edge[i]) continue;
    const double x = lat.point(i);
    const cplx r = jackson_derivative_at(f, x, q) + alpha * x * (q * f(s * x) + f(x));
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// Lattice-sample version; only the literal convention is expressible.
inline double stationary_residual(const LatticeFunction& f, const FPProblem& p,
                                  DilatationConvention convention) {
  p.validate();
  if (convention != DilatationConvention::literal_qx) {
    throw InvalidArgument("argument_scaling needs F off the lattice; use the callable overload");
  }
  const GeometricLattice& lat = f.lattice();
  const LatticeFunction df = jackson_derivative(f);
  const LatticeFunction fq = dilate(f);
  const std::vector<bool> edge = lat.edge_mask();
  const double alpha = p.diffusion.alpha;
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (edge[i]) continue;
    const cplx r = df[i] + alpha * lat.point(i) * (lat.q() * fq[i] + f[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

/// The Fokker-Planck operator D_q (-J1 + J2 D_q) as a matrix. The operator
/// drift uses the literal dilatation.
inline OperatorMatrix fp_operator_matrix(const FPProblem& p) {
  p.validate();
  const LatticePtr& lat = p.lattice;
  const DeformationParameter& d = lat->deformation();
  const OperatorMatrix dm = jackson_derivative_matrix(lat);
  const OperatorMatrix x = position_matrix(lat);
  OperatorMatrix j1 = OperatorMatrix::identity(lat, d);
  if (p.drift.is_monomial()) {
    const LatticeFunction c = LatticeFunction::sample(lat, [&](double y) {
      return p.drift.coefficient * std::pow(y, p.drift.exponent);
    });
    j1 = OperatorMatrix::diagonal(c, d);
  } else {
    const OperatorMatrix t = dilatation_matrix(lat);
    j1 = cplx(-p.drift.gamma) * (x * (cplx(d.q()) * t + OperatorMatrix::identity(lat, d)));
  }
  return dm * (cplx(-1.0) * j1 + cplx(p.diffusion.J2) * dm);
}

enum class TimeScheme { explicit_euler, implicit_euler, automatic };

inline std::string_view to_string(TimeScheme s) {
  switch (s) {
    case TimeScheme::explicit_euler: return "explicit";
    case TimeScheme::implicit_euler: return "implicit";
    case TimeScheme::automatic: return "auto";
  }
  return "unknown";
}

/// Explicit step bound 0.5 min_n (Delta_q lambda_n)^2 / J2.
inline double explicit_stability_bound(const FPProblem& p) {
  const std::vector<double> w = p.lattice->weights(Member::q);
  const double m = *std::min_element(w.begin(), w.end());
  return 0.5 * m * m / p.diffusion.J2;
}

struct FPTrajectory {
  std::vector<double> times;
  std::vector<LatticeFunction> states;
  std::vector<double> mass;        ///< Jackson integral over the lattice
  std::vector<double> mass_drift;  ///< |mass(t) - mass(0)|
  TimeScheme scheme = TimeScheme::implicit_euler;
  std::vector<std::size_t> frozen_rows;
  std::vector<std::string> warnings;
};

namespace detail {

inline TimeScheme resolve(TimeScheme s, const GeometricLattice& lat) {
  if (s != TimeScheme::automatic) return s;
  return lat.count() > 64 ? TimeScheme::implicit_euler : TimeScheme::explicit_euler;
}

}  // namespace detail

/// One-step matrix S with F_{k+1} = S F_k. Rows whose stencil is truncated
/// by the lattice are held at their initial value (identity rows).
inline Eigen::MatrixXcd fp_step_matrix(const FPProblem& p, double dt, TimeScheme scheme) {
  const OperatorMatrix l = fp_operator_matrix(p);
  Eigen::MatrixXcd a = l.entries();
  for (std::size_t r : l.boundary_rows()) a.row(static_cast<Eigen::Index>(r)).setZero();
  const auto n = a.rows();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  if (detail::resolve(scheme, *p.lattice) == TimeScheme::explicit_euler) return id + dt * a;
  return (id - dt * a).partialPivLu().inverse();
}

inline double fp_step_spectral_radius(const FPProblem& p, double dt, TimeScheme scheme) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(fp_step_matrix(p, dt, scheme), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline FPTrajectory fp_evolve(const LatticeFunction& f0, const FPProblem& p, double dt, int steps,
                              TimeScheme scheme = TimeScheme::automatic) {
  p.validate();
  f0.require_same(LatticeFunction::zeros(p.lattice));
  if (!(dt > 0.0) || steps < 0) throw InvalidArgument("fp_evolve needs dt > 0 and steps >= 0");
  FPTrajectory out;
  out.scheme = detail::resolve(scheme, *p.lattice);
  if (out.scheme == TimeScheme::explicit_euler) {
    const double bound = explicit_stability_bound(p);
    if (dt > bound) {
      throw StabilityError("explicit time step " + format_number(dt) + " exceeds the bound " +
                               format_number(bound),
                           bound);
    }
  }
  if (!p.drift.is_monomial() && p.convention == DilatationConvention::argument_scaling) {
    out.warnings.push_back(
        "fp_evolve: operator drift time-stepped with the literal dilatation F(qx); argument "
        "scaling has no lattice representation");
  }
  const OperatorMatrix l = fp_operator_matrix(p);
  out.frozen_rows = l.boundary_rows();
  Eigen::MatrixXcd a = l.entries();
  for (std::size_t r : out.frozen_rows) a.row(static_cast<Eigen::Index>(r)).setZero();
  const auto n = a.rows();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu;
  if (out.scheme == TimeScheme::implicit_euler) {
    lu.compute(Eigen::MatrixXcd::Identity(n, n) - dt * a);
  }
  const double lambda0 = p.lattice->lambda0();
  Eigen::VectorXcd v = f0.vector();
  auto record = [&](double t) {
    LatticeFunction f = f0.with_samples(v);
    const double m = jackson_integral(f, lambda0).value.real();
    out.times.push_back(t);
    out.mass.push_back(m);
    out.mass_drift.push_back(std::abs(m - out.mass.front()));
    out.states.push_back(std::move(f));
  };
  record(0.0);
  for (int k = 1; k <= steps; ++k) {
    if (out.scheme == TimeScheme::explicit_euler) {
      v = v + dt * (a * v);
    } else {
      v = lu.solve(v);
    }
    record(k * dt);
  }
  return out;
}

/// Coefficients of the Schroedinger problem obtained by stochastic
/// quantization: V = (1/2) D_q J1 + J1^2/(4 J2), mass = hbar^2/(2 J2).
struct QuantizedProblem {
  PotentialSpec potential;
  double hbar = 1.0;
  double mass = 1.0;
};

inline QuantizedProblem fp_to_schrodinger(const FPProblem& p, double hbar = 1.0) {
  p.validate();
  if (!p.drift.is_monomial()) {
    throw UnsupportedDrift("V_q needs D_q J1, which is only defined for a monomial drift");
  }
  const double c = p.drift.coefficient;
  const int e = p.drift.exponent;
  const double j2 = p.diffusion.J2;
  QuantizedProblem out;
  out.hbar = hbar;
  out.mass = hbar * hbar / (2.0 * j2);
  out.potential = PotentialSpec::from_function(
      "brownian_mapped", [c, e, j2](double x, const DeformationParameter& d) {
        const double dj1 = e == 0 ? 0.0 : c * basic_number(e, d) * std::pow(x, e - 1);
        const double j1 = c * std::pow(x, e);
        return 0.5 * dj1 + j1 * j1 / (4.0 * j2);
      });
  return out;
}

}  // namespace qdeform
