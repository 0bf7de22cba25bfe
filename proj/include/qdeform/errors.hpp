#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace qdeform {

/// Shortest decimal that reads back to the same double; used in messages
/// and reports so that they do not depend on stream state.
inline std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A series or function was asked for a value outside its convergence domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Floating-point range exhausted (overflow of a product or sum).
class RangeError : public Error {
 public:
  RangeError(const std::string& what, long first_failing_index)
      : Error(what), index_(first_failing_index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A geometric lattice cannot be built because q is (numerically) 1.
class DegenerateLattice : public Error {
 public:
  using Error::Error;
};

/// A stencil reaches past the end of the lattice.
class InsufficientLattice : public Error {
 public:
  using Error::Error;
};

class LatticeMismatch : public Error {
 public:
  using Error::Error;
};

/// A state that must be q-normalized is not.
class NormalizationError : public Error {
 public:
  NormalizationError(const std::string& what, double measured)
      : Error(what), measured_(measured) {}
  double measured() const noexcept { return measured_; }

 private:
  double measured_;
};

class UnsupportedDrift : public Error {
 public:
  using Error::Error;
};

/// Explicit time step exceeds the stability bound.
class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double bound) : Error(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Fewer eigenpairs survived filtering than were requested.
class DegradedSpectrum : public Error {
 public:
  DegradedSpectrum(const std::string& what, std::size_t retained)
      : Error(what), retained_(retained) {}
  std::size_t retained() const noexcept { return retained_; }

 private:
  std::size_t retained_;
};

/// Eigen-expansion failed: basis is (numerically) rank deficient or the
/// state lies outside its span.
class ExpansionError : public Error {
 public:
  ExpansionError(const std::string& what, double estimate) : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdeform
