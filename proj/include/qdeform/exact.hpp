#pragma once

// Exact rational mirror of the q-combinatorics, for rational q.

#include <boost/multiprecision/cpp_int.hpp>

#include "qdeform/errors.hpp"

namespace qdeform::exact {

using Rational = boost::multiprecision::cpp_rational;

/// [n]_q = 1 + q + ... + q^{n-1}, exact for every rational q including 1.
inline Rational basic_number(long n, const Rational& q) {
  if (n < 0) throw InvalidArgument("basic_number requires n >= 0");
  Rational acc = 0;
  Rational power = 1;
  for (long j = 0; j < n; ++j) {
    acc += power;
    power *= q;
  }
  return acc;
}

inline Rational basic_factorial(long n, const Rational& q) {
  Rational acc = 1;
  for (long k = 1; k <= n; ++k) acc *= basic_number(k, q);
  return acc;
}

inline Rational q_binomial(long n, long r, const Rational& q) {
  if (n < 0 || r < 0 || r > n) return Rational(0);
  return basic_factorial(n, q) / (basic_factorial(r, q) * basic_factorial(n - r, q));
}

inline Rational pow(const Rational& base, long e) {
  Rational acc = 1;
  for (long i = 0; i < e; ++i) acc *= base;
  return acc;
}

}  // namespace qdeform::exact
