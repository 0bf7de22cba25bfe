#pragma once

#include <cmath>
#include <string>

#include "qdeform/errors.hpp"

namespace qdeform {

inline constexpr double kDefaultEpsilonOne = 1e-8;

/// The deformation parameter q > 0 together with its reciprocal.
///
/// The reciprocal is computed once at construction and carried along, so
/// `p.inverse().inverse()` returns a parameter whose `q()` is bit-identical
/// to `p.q()`. Within `epsilon_one` of 1 the parameter is in the classical
/// branch and every q-formula switches to its limit form.
class DeformationParameter {
 public:
  explicit DeformationParameter(double q, double epsilon_one = kDefaultEpsilonOne)
      : q_(q), inverse_(1.0 / q), epsilon_one_(epsilon_one) {
    if (!(q > 0.0) || !std::isfinite(q)) {
      throw InvalidArgument("deformation parameter q must be positive and finite, got " +
                            format_number(q));
    }
    if (!(epsilon_one >= 0.0)) {
      throw InvalidArgument("epsilon_one must be non-negative");
    }
  }

  double q() const noexcept { return q_; }
  double inverse_q() const noexcept { return inverse_; }
  double epsilon_one() const noexcept { return epsilon_one_; }

  /// True when |q - 1| < epsilon_one.
  bool classical() const noexcept { return std::abs(q_ - 1.0) < epsilon_one_; }

  DeformationParameter inverse() const noexcept {
    return DeformationParameter(inverse_, q_, epsilon_one_);
  }

  friend bool operator==(const DeformationParameter& a, const DeformationParameter& b) noexcept {
    return a.q_ == b.q_ && a.epsilon_one_ == b.epsilon_one_;
  }

 private:
  DeformationParameter(double q, double inverse, double eps) noexcept
      : q_(q), inverse_(inverse), epsilon_one_(eps) {}

  double q_;
  double inverse_;
  double epsilon_one_;
};

}  // namespace qdeform
