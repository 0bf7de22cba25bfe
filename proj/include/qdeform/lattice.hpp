#pragma once

// Geometric lattices and the Jackson calculus on them.
//
// Storage convention: within each half-line the points are stored so that
// multiplication by q is an index shift of +1 (and division by q a shift of
// -1), for q < 1 and q > 1 alike. For q < 1 the positive half is therefore
// stored outermost first (lambda0, lambda0 q, ...); for q > 1 it is stored
// innermost first (..., lambda0/q^2, lambda0/q). A symmetric lattice stores
// the mirrored negative half first, then the positive half, each with the
// same layout.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qdeform/deformation.hpp"
#include "qdeform/errors.hpp"
#include "qdeform/qcore.hpp"

namespace qdeform {

enum class Branch { positive, symmetric };

/// Selects the q or the 1/q member of a deformation pair. Used both for the
/// deformation an operator is assembled at and for the Jackson quadrature
/// (d_q x vs d_{1/q} x) of a sum.
enum class Member { q, q_inverse };

inline std::string_view to_string(Branch b) {
  return b == Branch::positive ? "positive" : "symmetric";
}
inline std::string_view to_string(Member m) { return m == Member::q ? "q" : "q_inverse"; }
inline Member other(Member m) { return m == Member::q ? Member::q_inverse : Member::q; }

class GeometricLattice;
using LatticePtr = std::shared_ptr<const GeometricLattice>;

class GeometricLattice {
 public:
  static LatticePtr build(double lambda0, const DeformationParameter& q, std::size_t count,
                          Branch branch = Branch::positive) {
    if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
      throw InvalidArgument("lattice lambda0 must be positive, got " + format_number(lambda0));
    }
    if (count < 2) throw InvalidArgument("lattice count must be >= 2");
    if (q.classical() || q.q() == 1.0) {
      throw DegenerateLattice("geometric lattice undefined for q within epsilon_one of 1 (q = " +
                              format_number(q.q()) + ")");
    }
    return LatticePtr(new GeometricLattice(lambda0, q, count, branch));
  }

  const DeformationParameter& deformation() const noexcept { return q_; }
  double q() const noexcept { return q_.q(); }
  double lambda0() const noexcept { return lambda0_; }
  std::size_t count() const noexcept { return count_; }
  Branch branch() const noexcept { return branch_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t halves() const noexcept { return branch_ == Branch::symmetric ? 2 : 1; }

  std::span<const double> points() const noexcept { return points_; }
  double point(std::size_t i) const { return points_.at(i); }

  /// lambda_n as indexed by the Jackson sum: lambda0 q^n (q < 1) or
  /// lambda0 q^{-n-1} (q > 1).
  double lambda(std::size_t n) const {
    if (n >= count_) throw InvalidArgument("lambda index out of range");
    const std::size_t local = q() < 1.0 ? n : count_ - 1 - n;
    return base_[local];
  }

  /// Jackson weights |1 - p| |x| for p = q or 1/q.
  std::vector<double> weights(Member m = Member::q) const {
    const double p = factor(m);
    std::vector<double> w(points_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::abs(1.0 - p) * std::abs(points_[i]);
    return w;
  }

  double factor(Member m) const noexcept { return m == Member::q ? q_.q() : q_.inverse_q(); }

  /// Index of p x_i (p = q or 1/q) if it is a lattice point.
  std::optional<std::size_t> shift(std::size_t i, Member m) const {
    const std::size_t local = i % count_;
    if (m == Member::q) {
      if (local + 1 >= count_) return std::nullopt;
      return i + 1;
    }
    if (local == 0) return std::nullopt;
    return i - 1;
  }

  /// Applies `shift` `steps` times.
  std::optional<std::size_t> shift(std::size_t i, Member m, int steps) const {
    std::optional<std::size_t> cur = i;
    for (int s = 0; s < steps && cur; ++s) cur = shift(*cur, m);
    return cur;
  }

  /// Rows whose `reach`-fold shift leaves the lattice.
  std::vector<std::size_t> boundary_rows(Member m, int reach) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!shift(i, m, reach)) rows.push_back(i);
    }
    return rows;
  }

  /// Rows touched by truncation of a second-order stencil at either
  /// deformation: the union of boundary_rows(q, 2) and boundary_rows(1/q, 2).
  std::vector<std::size_t> edge_rows() const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
      if (!shift(i, Member::q, 2) || !shift(i, Member::q_inverse, 2)) rows.push_back(i);
    }
    return rows;
  }

  std::vector<bool> edge_mask() const {
    std::vector<bool> mask(size(), false);
    for (std::size_t r : edge_rows()) mask[r] = true;
    return mask;
  }

  /// Index of the point equal to x within relative tolerance.
  std::optional<std::size_t> find_point(double x, double rel_tol = 1e-12) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (std::abs(points_[i] - x) <= rel_tol * std::abs(x)) return i;
    }
    return std::nullopt;
  }

  /// Two lattices are compatible when they hold the same point set.
  bool same_points(const GeometricLattice& other) const {
    return this == &other || (points_ == other.points_ && q_ == other.q_);
  }

 private:
  GeometricLattice(double lambda0, const DeformationParameter& q, std::size_t count, Branch branch)
      : q_(q), lambda0_(lambda0), count_(count), branch_(branch) {
    base_.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      const double e = q.q() < 1.0 ? static_cast<double>(j)
                                   : -static_cast<double>(count - j);
      base_[j] = lambda0 * std::pow(q.q(), e);
    }
    if (branch == Branch::symmetric) {
      for (double b : base_) points_.push_back(-b);
    }
    points_.insert(points_.end(), base_.begin(), base_.end());
  }

  DeformationParameter q_;
  double lambda0_;
  std::size_t count_;
  Branch branch_;
  std::vector<double> base_;
  std::vector<double> points_;
};

/// Complex samples of a function, one per lattice point.
class LatticeFunction {
 public:
  LatticeFunction(LatticePtr lattice, std::vector<cplx> samples,
                  std::vector<std::size_t> padded_rows = {})
      : lattice_(std::move(lattice)), samples_(std::move(samples)),
        padded_rows_(std::move(padded_rows)) {
    if (!lattice_) throw InvalidArgument("LatticeFunction needs a lattice");
    if (samples_.size() != lattice_->size()) {
      throw LatticeMismatch("sample count " + std::to_string(samples_.size()) +
                            " does not match lattice size " + std::to_string(lattice_->size()));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!std::isfinite(samples_[i].real()) || !std::isfinite(samples_[i].imag())) {
        throw DomainError("non-finite sample at lattice index " + std::to_string(i));
      }
    }
  }

  static LatticeFunction zeros(LatticePtr lattice) {
    const std::size_t n = lattice->size();
    return LatticeFunction(std::move(lattice), std::vector<cplx>(n));
  }

  /// Samples f at every lattice point; f may return double or complex.
  template <class F>
  static LatticeFunction sample(LatticePtr lattice, F&& f) {
    std::vector<cplx> s(lattice->size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = cplx(f(lattice->point(i)));
    return LatticeFunction(std::move(lattice), std::move(s));
  }

  const GeometricLattice& lattice() const noexcept { return *lattice_; }
  const LatticePtr& lattice_ptr() const noexcept { return lattice_; }
  std::span<const cplx> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const cplx& operator[](std::size_t i) const { return samples_[i]; }
  /// Rows where zero padding fired while this function was produced.
  const std::vector<std::size_t>& padded_rows() const noexcept { return padded_rows_; }

  Eigen::VectorXcd vector() const {
    return Eigen::Map<const Eigen::VectorXcd>(samples_.data(),
                                              static_cast<Eigen::Index>(samples_.size()));
  }

  LatticeFunction with_samples(std::vector<cplx> s) const {
    return LatticeFunction(lattice_, std::move(s));
  }
  LatticeFunction with_samples(const Eigen::VectorXcd& v) const {
    return LatticeFunction(lattice_, std::vector<cplx>(v.data(), v.data() + v.size()));
  }

  LatticeFunction conj() const {
    std::vector<cplx> s(samples_.size());
    std::transform(samples_.begin(), samples_.end(), s.begin(),
                   [](const cplx& z) { return std::conj(z); });
    return LatticeFunction(lattice_, std::move(s), padded_rows_);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& z : samples_) m = std::max(m, std::abs(z));
    return m;
  }

  friend LatticeFunction operator+(const LatticeFunction& a, const LatticeFunction& b) {
    a.require_same(b);
    std::vector<cplx> s(a.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a.samples_[i] + b.samples_[i];
    return LatticeFunction(a.lattice_, std::move(s));
  }
  friend LatticeFunction operator-(const LatticeFunction& a, const LatticeFunction& b) {
    a.require_same(b);
    std::vector<cplx> s(a.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a.samples_[i] - b.samples_[i];
    return LatticeFunction(a.lattice_, std::move(s));
  }
  friend LatticeFunction operator*(cplx c, const LatticeFunction& a) {
    std::vector<cplx> s(a.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = c * a.samples_[i];
    return LatticeFunction(a.lattice_, std::move(s));
  }
  /// Pointwise product.
  friend LatticeFunction operator*(const LatticeFunction& a, const LatticeFunction& b) {
    a.require_same(b);
    std::vector<cplx> s(a.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = a.samples_[i] * b.samples_[i];
    return LatticeFunction(a.lattice_, std::move(s));
  }

  void require_same(const LatticeFunction& other) const {
    if (!lattice_->same_points(*other.lattice_)) {
      throw LatticeMismatch("lattice functions live on different lattices");
    }
  }

 private:
  LatticePtr lattice_;
  std::vector<cplx> samples_;
  std::vector<std::size_t> padded_rows_;
};

namespace detail {

// One stencil entry (column, coefficient). Rows are evaluated by summing
// entries in ascending column order, so the pointwise operators and their
// matrix forms perform identical floating-point operations.
struct StencilTerm {
  std::size_t column;
  double coefficient;
};

inline cplx accumulate(std::span<const StencilTerm> terms, std::span<const cplx> samples) {
  cplx sum{0.0, 0.0};
  for (const StencilTerm& t : terms) sum += t.coefficient * samples[t.column];
  return sum;
}

// Jackson derivative stencil at row i; returns false when padding fired.
inline bool jackson_stencil(const GeometricLattice& lat, std::size_t i, Member m,
                            std::vector<StencilTerm>& out) {
  out.clear();
  const double p = lat.factor(m);
  const double c = 1.0 / ((p - 1.0) * lat.point(i));
  const auto s = lat.shift(i, m);
  if (s && *s < i) out.push_back({*s, c});
  out.push_back({i, -c});
  if (s && *s > i) out.push_back({*s, c});
  return s.has_value();
}

}  // namespace detail

/// A linear operator in the lattice sample basis.
class OperatorMatrix {
 public:
  OperatorMatrix(LatticePtr lattice, Eigen::MatrixXcd entries, DeformationParameter deformation,
                 std::vector<std::size_t> boundary_rows = {})
      : lattice_(std::move(lattice)), entries_(std::move(entries)), deformation_(deformation),
        boundary_rows_(std::move(boundary_rows)) {
    if (entries_.rows() != entries_.cols() ||
        static_cast<std::size_t>(entries_.rows()) != lattice_->size()) {
      throw LatticeMismatch("operator dimension does not match lattice size");
    }
    std::sort(boundary_rows_.begin(), boundary_rows_.end());
    boundary_rows_.erase(std::unique(boundary_rows_.begin(), boundary_rows_.end()),
                         boundary_rows_.end());
  }

  static OperatorMatrix identity(LatticePtr lattice, DeformationParameter d) {
    const auto n = static_cast<Eigen::Index>(lattice->size());
    return OperatorMatrix(std::move(lattice), Eigen::MatrixXcd::Identity(n, n), d);
  }

  static OperatorMatrix diagonal(const LatticeFunction& diag, DeformationParameter d) {
    return OperatorMatrix(diag.lattice_ptr(), diag.vector().asDiagonal().toDenseMatrix(), d);
  }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const noexcept { return entries_; }
  const DeformationParameter& deformation() const noexcept { return deformation_; }
  const std::vector<std::size_t>& boundary_rows() const noexcept { return boundary_rows_; }
  const GeometricLattice& lattice() const noexcept { return *lattice_; }
  const LatticePtr& lattice_ptr() const noexcept { return lattice_; }

  /// Matrix-vector product, rows summed in ascending column order over the
  /// nonzero entries.
  LatticeFunction apply(const LatticeFunction& f) const {
    if (!lattice_->same_points(f.lattice())) throw LatticeMismatch("operator/function lattice");
    std::vector<cplx> out(dimension());
    std::vector<cplx> in(f.samples().begin(), f.samples().end());
    for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
      cplx sum{0.0, 0.0};
      for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
        const cplx a = entries_(r, c);
        if (a == cplx{}) continue;
        if (a.imag() == 0.0) {
          sum += a.real() * in[static_cast<std::size_t>(c)];
        } else {
          sum += a * in[static_cast<std::size_t>(c)];
        }
      }
      out[static_cast<std::size_t>(r)] = sum;
    }
    return LatticeFunction(lattice_, std::move(out), boundary_rows_);
  }

  /// Composition A*B. A row is a boundary row of the product if it is one of
  /// A's or if it reads a boundary row of B.
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    std::vector<std::size_t> rows = a.boundary_rows_;
    for (Eigen::Index r = 0; r < a.entries_.rows(); ++r) {
      for (std::size_t br : b.boundary_rows_) {
        if (a.entries_(r, static_cast<Eigen::Index>(br)) != cplx{}) {
          rows.push_back(static_cast<std::size_t>(r));
          break;
        }
      }
    }
    return OperatorMatrix(a.lattice_, a.entries_ * b.entries_, a.deformation_, std::move(rows));
  }

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
    std::vector<std::size_t> rows = a.boundary_rows_;
    rows.insert(rows.end(), b.boundary_rows_.begin(), b.boundary_rows_.end());
    return OperatorMatrix(a.lattice_, a.entries_ + b.entries_, a.deformation_, std::move(rows));
  }

  friend OperatorMatrix operator*(cplx c, const OperatorMatrix& a) {
    return OperatorMatrix(a.lattice_, c * a.entries_, a.deformation_, a.boundary_rows_);
  }

 private:
  LatticePtr lattice_;
  Eigen::MatrixXcd entries_;
  DeformationParameter deformation_;
  std::vector<std::size_t> boundary_rows_;
};

inline DeformationParameter member_deformation(const GeometricLattice& lat, Member m) {
  return m == Member::q ? lat.deformation() : lat.deformation().inverse();
}

/// f(p x) for p = q (default) or 1/q; zero where p x leaves the lattice.
inline LatticeFunction dilate(const LatticeFunction& f, Member m = Member::q) {
  const GeometricLattice& lat = f.lattice();
  std::vector<cplx> out(f.size());
  std::vector<std::size_t> padded;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (auto s = lat.shift(i, m)) {
      out[i] = f[*s];
    } else {
      padded.push_back(i);
    }
  }
  return LatticeFunction(f.lattice_ptr(), std::move(out), std::move(padded));
}

/// Jackson derivative (f(p x) - f(x))/((p - 1) x), zero padding at the edge.
inline LatticeFunction jackson_derivative(const LatticeFunction& f, Member m = Member::q) {
  const GeometricLattice& lat = f.lattice();
  std::vector<cplx> out(f.size());
  std::vector<std::size_t> padded;
  std::vector<detail::StencilTerm> terms;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!detail::jackson_stencil(lat, i, m, terms)) padded.push_back(i);
    out[i] = detail::accumulate(terms, f.samples());
  }
  return LatticeFunction(f.lattice_ptr(), std::move(out), std::move(padded));
}

inline OperatorMatrix jackson_derivative_matrix(const LatticePtr& lattice, Member m = Member::q) {
  const auto n = static_cast<Eigen::Index>(lattice->size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  std::vector<std::size_t> rows;
  std::vector<detail::StencilTerm> terms;
  for (std::size_t i = 0; i < lattice->size(); ++i) {
    if (!detail::jackson_stencil(*lattice, i, m, terms)) rows.push_back(i);
    for (const auto& t : terms) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t.column)) = t.coefficient;
    }
  }
  return OperatorMatrix(lattice, std::move(a), member_deformation(*lattice, m), std::move(rows));
}

inline OperatorMatrix dilatation_matrix(const LatticePtr& lattice, Member m = Member::q) {
  const auto n = static_cast<Eigen::Index>(lattice->size());
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < lattice->size(); ++i) {
    if (auto s = lattice->shift(i, m)) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*s)) = 1.0;
    } else {
      rows.push_back(i);
    }
  }
  return OperatorMatrix(lattice, std::move(a), member_deformation(*lattice, m), std::move(rows));
}

/// Multiplication by x.
inline OperatorMatrix position_matrix(const LatticePtr& lattice, Member m = Member::q) {
  return OperatorMatrix::diagonal(LatticeFunction::sample(lattice, [](double x) { return x; }),
                                  member_deformation(*lattice, m));
}

/// Jackson derivative of a callable at a single point.
template <class F>
cplx jackson_derivative_at(F&& f, double x, double p) {
  return (cplx(f(p * x)) - cplx(f(x))) / ((p - 1.0) * x);
}

struct IntegralResult {
  cplx value{};
  double upper = 0.0;  ///< upper limit actually used
  std::optional<std::string> warning;
};

/// Jackson integral from 0 to `upper` over the lattice samples.
///
/// With p = q or 1/q the sum runs over lattice points |x| <= upper when
/// p < 1 and |x| < upper when p > 1, with weights |1 - p| |x|; on a
/// symmetric lattice both half-lines are integrated (from -upper to upper).
/// `upper` must be a lattice point or lambda0; any other value is snapped
/// to the nearest lattice point and a warning recorded.
inline IntegralResult jackson_integral(const LatticeFunction& f, double upper,
                                       Member m = Member::q) {
  const GeometricLattice& lat = f.lattice();
  IntegralResult out;
  double u = std::abs(upper);
  const auto on_lattice = [&](double v) {
    if (std::abs(v - lat.lambda0()) <= 1e-12 * lat.lambda0()) return true;
    for (double x : lat.points()) {
      if (std::abs(std::abs(x) - v) <= 1e-12 * v) return true;
    }
    return false;
  };
  if (!(u > 0.0) || !on_lattice(u)) {
    double best = lat.lambda0();
    double best_d = u > 0.0 ? std::abs(std::log(u / best)) : INFINITY;
    for (double x : lat.points()) {
      const double d = u > 0.0 ? std::abs(std::log(u / std::abs(x))) : INFINITY;
      if (d < best_d) {
        best_d = d;
        best = std::abs(x);
      }
    }
    out.warning = "jackson_integral: upper limit " + format_number(upper) +
                  " is not a lattice point; snapped to " + format_number(best);
    u = best;
  }
  out.upper = u;
  const double p = lat.factor(m);
  const std::vector<double> w = lat.weights(m);
  const double tol = 1e-12 * u;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double ax = std::abs(lat.point(i));
    const bool inside = p < 1.0 ? ax <= u + tol : ax < u - tol;
    if (inside) out.value += w[i] * f[i];
  }
  return out;
}

/// I(x_i) = Jackson integral from 0 to x_i (signed on the negative half) for
/// every lattice point, using the lattice's own q.
inline LatticeFunction cumulative_jackson_integral(const LatticeFunction& f) {
  const GeometricLattice& lat = f.lattice();
  const std::size_t n = lat.count();
  std::vector<cplx> out(f.size());
  for (std::size_t h = 0; h < lat.halves(); ++h) {
    const std::size_t off = h * n;
    // Accumulate from the innermost point outwards.
    cplx acc{};
    const double q = lat.q();
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t local = q < 1.0 ? n - 1 - k : k;
      const std::size_t i = off + local;
      const double x = lat.point(i);
      const double wsigned = (1.0 - q) * x;  // Jackson weight with the sign of the interval
      if (q < 1.0) {
        acc += wsigned * f[i];
        out[i] = acc;
      } else {
        out[i] = acc;
        acc += -wsigned * f[i];
      }
    }
  }
  return LatticeFunction(f.lattice_ptr(), std::move(out));
}

/// Jackson integral of a callable from 0 to `upper`, summing the infinite
/// geometric series until three consecutive terms fall below tol_rel.
/// max_terms <= 0 picks a cap that lets the nodes shrink by 1e-40.
template <class F>
cplx jackson_integral_function(F&& f, double upper, double p, double tol_rel = 1e-15,
                               long max_terms = 0) {
  if (upper == 0.0) return {};
  if (max_terms <= 0) max_terms = 1000 + static_cast<long>(std::ceil(92.0 / std::abs(std::log(p))));
  cplx sum{};
  int small = 0;
  for (long n = 0; n < max_terms; ++n) {
    double x, w;
    if (p < 1.0) {
      x = upper * std::pow(p, n);
      w = x * (1.0 - p);
    } else {
      x = upper * std::pow(p, -n - 1);
      w = x * (p - 1.0);
    }
    const cplx term = w * cplx(f(x));
    sum += term;
    small = std::abs(term) <= tol_rel * std::max(std::abs(sum), 1e-300) ? small + 1 : 0;
    if (small >= 3) return sum;
  }
  throw DomainError("Jackson integral series did not converge");
}

/// Coefficients D^k f(a)/[k]_q! of the q-Taylor expansion about the lattice
/// point with index `a_index`, k = 0..order.
inline std::vector<cplx> q_taylor_coefficients(const LatticeFunction& f, std::size_t a_index,
                                               int order) {
  const GeometricLattice& lat = f.lattice();
  if (a_index >= lat.size()) throw InvalidArgument("expansion index out of range");
  if (order < 0) throw InvalidArgument("q-Taylor order must be >= 0");
  if (!lat.shift(a_index, Member::q, order)) {
    throw InsufficientLattice("q-Taylor stencil of order " + std::to_string(order) +
                              " about index " + std::to_string(a_index) +
                              " exceeds the lattice");
  }
  std::vector<cplx> c;
  LatticeFunction d = f;
  for (int k = 0; k <= order; ++k) {
    c.push_back(d[a_index] / basic_factorial(k, lat.deformation()));
    if (k < order) d = jackson_derivative(d);
  }
  return c;
}

/// Same coefficients for a callable, sampled at a, qa, ..., q^order a.
template <class F>
std::vector<cplx> q_taylor_coefficients(F&& f, double a, int order, const DeformationParameter& q) {
  if (a == 0.0) throw InvalidArgument("q-Taylor expansion point must be nonzero");
  std::vector<cplx> g(static_cast<std::size_t>(order) + 1);
  for (int j = 0; j <= order; ++j) g[static_cast<std::size_t>(j)] = cplx(f(a * std::pow(q.q(), j)));
  std::vector<cplx> c;
  for (int k = 0; k <= order; ++k) {
    c.push_back(g[0] / basic_factorial(k, q));
    for (int j = 0; j + k < order; ++j) {
      const double x = a * std::pow(q.q(), j);
      g[static_cast<std::size_t>(j)] =
          (g[static_cast<std::size_t>(j) + 1] - g[static_cast<std::size_t>(j)]) /
          ((q.q() - 1.0) * x);
    }
  }
  return c;
}

/// sum_k c_k (x - a)^(k), the q-Taylor reconstruction.
inline cplx q_taylor_evaluate(std::span<const cplx> coefficients, double a, double x,
                              const DeformationParameter& q) {
  cplx sum{};
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    sum += coefficients[k] * basic_binomial_power(x, -a, static_cast<long>(k), q);
  }
  return sum;
}

}  // namespace qdeform
