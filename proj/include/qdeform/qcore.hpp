#pragma once

// q-combinatorics and the basic exponential E_q.

#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "qdeform/deformation.hpp"
#include "qdeform/errors.hpp"

namespace qdeform {

using cplx = std::complex<double>;

/// [n]_q = (q^n - 1)/(q - 1).
///
/// In the classical branch the second-order expansion
/// n + C(n,2)(q-1) + C(n,3)(q-1)^2 is used, which equals n at q = 1 and
/// joins the closed form continuously at |q - 1| = epsilon_one.
inline double basic_number(long n, const DeformationParameter& q) {
  if (n < 0) throw InvalidArgument("basic_number requires n >= 0");
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  const double d = q.q() - 1.0;
  if (q.classical()) {
    const double c2 = nd * (nd - 1.0) / 2.0;
    const double c3 = c2 * (nd - 2.0) / 3.0;
    return nd + c2 * d + c3 * d * d;
  }
  return std::expm1(nd * std::log(q.q())) / d;
}

/// [n]_q! = [1]_q [2]_q ... [n]_q, with [0]_q! = 1.
inline double basic_factorial(long n, const DeformationParameter& q) {
  if (n < 0) throw InvalidArgument("basic_factorial requires n >= 0");
  double acc = 1.0;
  for (long k = 1; k <= n; ++k) {
    acc *= basic_number(k, q);
    if (!std::isfinite(acc)) {
      throw RangeError("basic_factorial overflows the double range at k = " + std::to_string(k), k);
    }
  }
  return acc;
}

/// Gaussian binomial coefficient; zero outside 0 <= r <= n.
inline double q_binomial(long n, long r, const DeformationParameter& q) {
  if (n < 0 || r < 0 || r > n) return 0.0;
  const long m = std::min(r, n - r);
  double acc = 1.0;
  for (long j = 1; j <= m; ++j) {
    acc *= basic_number(n - m + j, q) / basic_number(j, q);
  }
  return acc;
}

/// (x + y)^(n) = (x + y)(x + q y)...(x + q^{n-1} y).
inline double basic_binomial_power(double x, double y, long n, const DeformationParameter& q) {
  if (n < 0) throw InvalidArgument("basic_binomial_power requires n >= 0");
  double acc = 1.0;
  for (long j = 0; j < n; ++j) {
    acc *= x + std::pow(q.q(), static_cast<double>(j)) * y;
  }
  return acc;
}

/// The expanded form sum_r [n r]_q q^{r(r-1)/2} x^{n-r} y^r of the same power.
inline double basic_binomial_sum(double x, double y, long n, const DeformationParameter& q) {
  if (n < 0) throw InvalidArgument("basic_binomial_sum requires n >= 0");
  double acc = 0.0;
  for (long r = 0; r <= n; ++r) {
    const double rr = static_cast<double>(r);
    acc += q_binomial(n, r, q) * std::pow(q.q(), rr * (rr - 1.0) / 2.0) *
           std::pow(x, static_cast<double>(n - r)) * std::pow(y, rr);
  }
  return acc;
}

enum class DomainFlag { inside, via_reciprocal, divergent };

inline std::string_view to_string(DomainFlag f) {
  switch (f) {
    case DomainFlag::inside: return "inside";
    case DomainFlag::via_reciprocal: return "via_reciprocal";
    case DomainFlag::divergent: return "divergent";
  }
  return "unknown";
}

/// How a series value was obtained.
struct SeriesEvaluation {
  cplx value{1.0, 0.0};
  int terms_used = 1;
  double truncation_bound = 0.0;  ///< magnitude of the first omitted term
  DomainFlag domain_flag = DomainFlag::inside;
};

struct SeriesOptions {
  double tol_rel = 1e-14;
  int max_terms = 200000;
  /// Evaluate real z < -1 as 1/E_{1/q}(-z).
  bool allow_reciprocal = true;
};

/// Radius of convergence of E_q: 1/(1-q) for q < 1, infinite otherwise.
inline double q_exp_radius(const DeformationParameter& q) {
  if (q.q() >= 1.0 || q.classical()) return INFINITY;
  return 1.0 / (1.0 - q.q());
}

/// Which evaluation route q_exp would take for z.
inline DomainFlag classify_q_exp(cplx z, const DeformationParameter& q,
                                 const SeriesOptions& opts = {}) {
  // For q > 1 the reciprocal series E_{1/q} only converges for
  // |z| < q/(q-1); past that E_q is summed directly (it is entire).
  if (opts.allow_reciprocal && z.imag() == 0.0 && z.real() < -1.0 &&
      -z.real() < q_exp_radius(q.inverse())) {
    return DomainFlag::via_reciprocal;
  }
  if (std::abs(z) >= q_exp_radius(q)) return DomainFlag::divergent;
  return DomainFlag::inside;
}

namespace detail {

// Plain partial sums of sum_k z^k/[k]_q!, stopping after three consecutive
// terms below tol_rel relative to the running sum.
inline SeriesEvaluation sum_q_exp(cplx z, double q, const SeriesOptions& opts) {
  SeriesEvaluation out;
  cplx sum{1.0, 0.0};
  cplx term{1.0, 0.0};
  double basic = 0.0;  // [k]_q via [k]_q = 1 + q [k-1]_q
  int small = 0;
  int k = 0;
  while (small < 3) {
    ++k;
    if (k > opts.max_terms) {
      throw DomainError("E_q series did not converge within " + std::to_string(opts.max_terms) +
                        " terms");
    }
    basic = 1.0 + q * basic;
    term *= z / basic;
    sum += term;
    if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag())) {
      throw RangeError("E_q partial sum overflowed at term " + std::to_string(k), k);
    }
    const double scale = std::max(std::abs(sum), 1e-300);
    small = (std::abs(term) < opts.tol_rel * scale) ? small + 1 : 0;
  }
  out.value = sum;
  out.terms_used = k + 1;
  out.truncation_bound = std::abs(term * z / (1.0 + q * basic));
  out.domain_flag = DomainFlag::inside;
  return out;
}

}  // namespace detail

/// The basic exponential E_q(z) = sum_k z^k/[k]_q!.
///
/// Real arguments below -1 go through E_q(z) = 1/E_{1/q}(-z), which avoids
/// alternating-series cancellation and extends q < 1 beyond the disc
/// |z| < 1/(1-q). Any other argument outside that disc throws DomainError.
inline SeriesEvaluation q_exp(cplx z, const DeformationParameter& q,
                              const SeriesOptions& opts = {}) {
  switch (classify_q_exp(z, q, opts)) {
    case DomainFlag::divergent:
      throw DomainError("E_q(z) diverges: |z| = " + format_number(std::abs(z)) +
                        " >= 1/(1-q) = " + format_number(q_exp_radius(q)) +
                        " and z is not a negative real");
    case DomainFlag::via_reciprocal: {
      SeriesEvaluation r = detail::sum_q_exp(-z, q.inverse_q(), opts);
      const double mag = std::abs(r.value);
      r.value = 1.0 / r.value;
      r.truncation_bound /= mag * mag;
      r.domain_flag = DomainFlag::via_reciprocal;
      return r;
    }
    case DomainFlag::inside:
      break;
  }
  return detail::sum_q_exp(z, q.q(), opts);
}

inline SeriesEvaluation q_exp(double x, const DeformationParameter& q,
                              const SeriesOptions& opts = {}) {
  return q_exp(cplx{x, 0.0}, q, opts);
}

/// |E_q(x) E_{1/q}(-x) - 1|.
inline double q_exp_inverse_defect(double x, const DeformationParameter& q,
                                   const SeriesOptions& opts = {}) {
  const cplx a = q_exp(x, q, opts).value;
  const cplx b = q_exp(-x, q.inverse(), opts).value;
  return std::abs(a * b - 1.0);
}

/// N E_q(i k x).
inline cplx q_plane_wave(double k, double x, const DeformationParameter& q, double amplitude = 1.0,
                         const SeriesOptions& opts = {}) {
  return amplitude * q_exp(cplx{0.0, k * x}, q, opts).value;
}

}  // namespace qdeform
